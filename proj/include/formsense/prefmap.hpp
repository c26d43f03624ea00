#pragma once

#include <map>
#include <vector>

#include "formsense/mds.hpp"
#include "formsense/types.hpp"
#include "json.hpp"

namespace formsense {

/// Appeal regressed on the two perceptual axes: P = a * axis1 + b * axis2 + c.
struct VectorModelFit {
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;
  double r_squared = 0.0;
  double f_statistic = 0.0;  // +inf for an exact fit
  int dof_num = 2;
  int dof_den = 0;
  int n = 0;
  double p_value = 1.0;
  std::map<double, bool> significant_at;   // threshold -> verdict
  std::map<double, double> f_critical_at;  // threshold -> critical value
  std::vector<double> residuals;           // by product id - 1

  double predict(double x1, double x2) const { return a * x1 + b * x2 + c; }
};

inline const std::vector<double> kDefaultSignificanceLevels{0.01, 0.05};

VectorModelFit fit_vector_model(const PerceptualConfiguration& config, const AppealScores& appeal,
                                const std::vector<double>& levels = kDefaultSignificanceLevels);

/// Overall-regression F: (R^2 / p) / ((1 - R^2) / (n - p - 1)); +inf when R^2 = 1.
double f_statistic(double r_squared, int n, int p);

struct IsoAppealLine {
  double level = 0.0;
  double point[2]{0.0, 0.0};      // foot of the perpendicular from the origin
  double direction[2]{0.0, 0.0};  // unit vector along the line
};

struct AppealVectorPlot {
  double origin[2]{0.0, 0.0};
  double direction[2]{0.0, 0.0};  // unit, towards increasing appeal
  double slope = 0.0;             // |(a, b)|: appeal gained per unit along `direction`
  std::vector<IsoAppealLine> iso_lines;
};

/// Direction of steepest appeal increase plus iso-appeal lines at `levels`.
AppealVectorPlot appeal_vector(const VectorModelFit& fit, const std::vector<double>& levels = {});

nlohmann::json vector_fit_json(const VectorModelFit& fit);

}  // namespace formsense
