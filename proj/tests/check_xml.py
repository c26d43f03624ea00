"""Fails unless every .svg under the given directory parses as XML with an <svg> root."""
import pathlib
import sys
import xml.etree.ElementTree as ET

root = pathlib.Path(sys.argv[1])
files = sorted(root.glob("*.svg"))
if not files:
    sys.exit(f"no SVG files in {root}")
for f in files:
    tag = ET.parse(f).getroot().tag
    if not tag.endswith("svg"):
        sys.exit(f"{f}: root element is {tag}")
print(f"{len(files)} SVG files well-formed")
