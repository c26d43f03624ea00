#include "formsense/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "formsense/io.hpp"

namespace formsense::svg {

std::string num(double v, int decimals) { return format_fixed(v, decimals); }

std::string escape(std::string_view text) {
  std::string out;
  for (char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string hex(Color c) {
  char buf[8];
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x", c.r, c.g, c.b);
  return buf;
}

Color palette(double t) {
  static constexpr std::array<std::array<double, 3>, 5> kStops{{
      {68, 1, 84}, {59, 82, 139}, {33, 145, 140}, {94, 201, 98}, {253, 231, 37},
  }};
  t = std::clamp(t, 0.0, 1.0);
  const double pos = t * (kStops.size() - 1);
  const auto i = std::min(static_cast<std::size_t>(pos), kStops.size() - 2);
  const double f = pos - static_cast<double>(i);
  auto mix = [&](int c) { return static_cast<int>(std::lround(kStops[i][c] + f * (kStops[i + 1][c] - kStops[i][c]))); };
  return {mix(0), mix(1), mix(2)};
}

std::vector<double> ticks(double lo, double hi, int target) {
  if (!(hi > lo)) return {lo};
  const double raw = (hi - lo) / target;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double step = mag;
  for (double m : {1.0, 2.0, 5.0, 10.0})
    if (m * mag >= raw) {
      step = m * mag;
      break;
    }
  std::vector<double> out;
  for (double v = std::ceil(lo / step - 1e-9) * step; v <= hi + 1e-9 * step; v += step)
    out.push_back(std::abs(v) < 1e-12 * step ? 0.0 : v);
  return out;
}

Document::Document(double width, double height, std::string_view title) : width_(width), height_(height) {
  body_ += "  <title>" + escape(title) + "</title>\n";
  rect(0, 0, width, height, "#ffffff");
}

void Document::raw(std::string_view element) {
  body_ += "  ";
  body_ += element;
  body_ += '\n';
}

void Document::rect(double x, double y, double w, double h, std::string_view fill, std::string_view extra) {
  raw("<rect x=\"" + num(x) + "\" y=\"" + num(y) + "\" width=\"" + num(w) + "\" height=\"" + num(h) + "\" fill=\"" +
      std::string(fill) + "\"" + (extra.empty() ? "" : " " + std::string(extra)) + "/>");
}

void Document::line(double x1, double y1, double x2, double y2, std::string_view stroke, double width,
                    std::string_view extra) {
  raw("<line x1=\"" + num(x1) + "\" y1=\"" + num(y1) + "\" x2=\"" + num(x2) + "\" y2=\"" + num(y2) + "\" stroke=\"" +
      std::string(stroke) + "\" stroke-width=\"" + num(width) + "\"" + (extra.empty() ? "" : " " + std::string(extra)) +
      "/>");
}

void Document::circle(double cx, double cy, double r, std::string_view fill, std::string_view extra) {
  raw("<circle cx=\"" + num(cx) + "\" cy=\"" + num(cy) + "\" r=\"" + num(r) + "\" fill=\"" + std::string(fill) + "\"" +
      (extra.empty() ? "" : " " + std::string(extra)) + "/>");
}

void Document::text(double x, double y, std::string_view content, double size, std::string_view anchor,
                    std::string_view extra) {
  raw("<text x=\"" + num(x) + "\" y=\"" + num(y) + "\" font-family=\"sans-serif\" font-size=\"" + num(size) +
      "\" text-anchor=\"" + std::string(anchor) + "\"" + (extra.empty() ? "" : " " + std::string(extra)) + ">" +
      escape(content) + "</text>");
}

void Document::polyline(const std::vector<std::array<double, 2>>& pixels, std::string_view stroke, double width,
                        std::string_view extra) {
  std::string pts;
  for (const auto& p : pixels) {
    if (!pts.empty()) pts += ' ';
    pts += num(p[0]) + "," + num(p[1]);
  }
  raw("<polyline points=\"" + pts + "\" fill=\"none\" stroke=\"" + std::string(stroke) + "\" stroke-width=\"" +
      num(width) + "\"" + (extra.empty() ? "" : " " + std::string(extra)) + "/>");
}

void Document::axes(const Frame& f, std::string_view x_label, std::string_view y_label) {
  rect(f.left, f.top, f.width, f.height, "none", "stroke=\"#333333\" stroke-width=\"1\"");
  const double bottom = f.top + f.height;
  for (double v : ticks(f.x_lo, f.x_hi)) {
    const double x = f.x(v);
    line(x, bottom, x, bottom + 5, "#333333");
    text(x, bottom + 18, format_number(std::round(v * 1e6) / 1e6), 11, "middle");
  }
  for (double v : ticks(f.y_lo, f.y_hi)) {
    const double y = f.y(v);
    line(f.left - 5, y, f.left, y, "#333333");
    text(f.left - 8, y + 4, format_number(std::round(v * 1e6) / 1e6), 11, "end");
  }
  text(f.left + f.width / 2, bottom + 38, x_label, 13, "middle");
  const double ly = f.top + f.height / 2;
  text(f.left - 45, ly, y_label, 13, "middle",
       "transform=\"rotate(-90 " + num(f.left - 45) + " " + num(ly) + ")\"");
}

void Document::arrow(double x1, double y1, double x2, double y2, std::string_view stroke, double width) {
  line(x1, y1, x2, y2, stroke, width);
  const double len = std::hypot(x2 - x1, y2 - y1);
  if (len == 0.0) return;
  const double ux = (x2 - x1) / len, uy = (y2 - y1) / len;
  const double head = std::min(12.0, 0.4 * len);
  const double bx = x2 - head * ux, by = y2 - head * uy;
  const double px = -uy * head * 0.45, py = ux * head * 0.45;
  raw("<polygon points=\"" + num(x2) + "," + num(y2) + " " + num(bx + px) + "," + num(by + py) + " " + num(bx - px) +
      "," + num(by - py) + "\" fill=\"" + std::string(stroke) + "\"/>");
}

std::string Document::str() const {
  return "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" +
         num(width_, 0) + "\" height=\"" + num(height_, 0) + "\" viewBox=\"0 0 " + num(width_, 0) + " " +
         num(height_, 0) + "\">\n" + body_ + "</svg>\n";
}

}  // namespace formsense::svg
