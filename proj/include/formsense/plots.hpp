#pragma once

#include <string>
#include <vector>

#include "formsense/mds.hpp"
#include "formsense/prefmap.hpp"
#include "formsense/surface.hpp"
#include "formsense/types.hpp"

namespace formsense {

/// Products in the first two perceptual axes, labelled by id and shaded by appeal when given.
std::string perceptual_map_svg(const PerceptualConfiguration& config, const AppealScores& appeal = {});
/// Perceptual map with the appeal arrow and the iso-appeal lines perpendicular to it.
std::string appeal_vector_svg(const PerceptualConfiguration& config, const VectorModelFit& fit,
                              const AppealVectorPlot& plot);
/// Heat map of the surface raster over (d2, d3), with a colour bar and optional design points.
std::string colormap_svg(const SurfaceGrid& grid, double fixed_d1,
                         const std::vector<DesignParams>& design_points = {});
/// Iso-appeal polylines, the gradient field as arrows and optional design points.
std::string iso_lines_svg(const IsoAnalysis& iso, Interval d2, Interval d3,
                          const std::vector<DesignParams>& design_points = {});

}  // namespace formsense
