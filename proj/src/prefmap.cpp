#include "formsense/prefmap.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "formsense/error.hpp"
#include "formsense/fdist.hpp"
#include "formsense/io.hpp"

namespace formsense {

double f_statistic(double r_squared, int n, int p) {
  if (!(r_squared >= 0.0 && r_squared <= 1.0)) throw InvalidInput("r_squared must lie in [0, 1]");
  if (p < 1 || n <= p + 1) throw InvalidInput("f_statistic needs n > p + 1");
  if (r_squared == 1.0) return std::numeric_limits<double>::infinity();
  return (r_squared / p) / ((1.0 - r_squared) / (n - p - 1));
}

VectorModelFit fit_vector_model(const PerceptualConfiguration& config, const AppealScores& appeal,
                                const std::vector<double>& levels) {
  if (config.k() != 2) throw DimensionMismatch("the vector model needs a 2-dimensional configuration");
  const int n = config.n();
  if (n < 4) throw InvalidInput("the vector model needs at least 4 products");
  Eigen::MatrixXd design(n, 3);
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) {
    const auto it = appeal.find(i + 1);
    if (it == appeal.end()) throw InvalidInput("no appeal score for product " + std::to_string(i + 1));
    design(i, 0) = config.points(i, 0);
    design(i, 1) = config.points(i, 1);
    design(i, 2) = 1.0;
    y(i) = it->second;
  }

  VectorModelFit fit;
  fit.n = n;
  fit.dof_num = 2;
  fit.dof_den = n - 3;
  const double mean = y.mean();
  const double ss_tot = (y.array() - mean).square().sum();

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
  qr.setThreshold(1e-10);
  if (qr.rank() < 3) throw RankDeficient("perceptual coordinates are collinear; the regression plane is undefined");

  if (ss_tot == 0.0) {
    // Constant appeal: the plane is flat and explains nothing.
    fit.c = mean;
    fit.r_squared = 0.0;
  } else {
    const Eigen::Vector3d coef = qr.solve(y);
    fit.a = coef(0);
    fit.b = coef(1);
    fit.c = coef(2);
    const double ss_res = (y - design * coef).squaredNorm();
    fit.r_squared = std::clamp(1.0 - ss_res / ss_tot, 0.0, 1.0);
    // Rounding can leave an exact plane a hair below 1.
    if (ss_res <= 1e-24 * ss_tot) fit.r_squared = 1.0;
  }
  fit.f_statistic = f_statistic(fit.r_squared, n, fit.dof_num);
  fit.p_value = f_survival(fit.f_statistic, fit.dof_num, fit.dof_den);
  for (double level : levels) {
    const double crit = f_critical(level, fit.dof_num, fit.dof_den);
    fit.f_critical_at[level] = crit;
    fit.significant_at[level] = fit.f_statistic > crit;
  }
  fit.residuals.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) fit.residuals[i] = y(i) - fit.predict(design(i, 0), design(i, 1));
  return fit;
}

AppealVectorPlot appeal_vector(const VectorModelFit& fit, const std::vector<double>& levels) {
  const double norm = std::hypot(fit.a, fit.b);
  if (norm == 0.0) throw ZeroVector();
  AppealVectorPlot plot;
  plot.direction[0] = fit.a / norm;
  plot.direction[1] = fit.b / norm;
  plot.slope = norm;
  for (double level : levels) {
    IsoAppealLine line;
    line.level = level;
    const double t = (level - fit.c) / norm;
    line.point[0] = t * plot.direction[0];
    line.point[1] = t * plot.direction[1];
    line.direction[0] = -plot.direction[1];
    line.direction[1] = plot.direction[0];
    plot.iso_lines.push_back(line);
  }
  return plot;
}

nlohmann::json vector_fit_json(const VectorModelFit& fit) {
  nlohmann::json sig = nlohmann::json::object(), crit = nlohmann::json::object();
  for (const auto& [level, verdict] : fit.significant_at) sig[format_number(level)] = verdict;
  for (const auto& [level, value] : fit.f_critical_at) crit[format_number(level)] = value;
  nlohmann::json f = std::isinf(fit.f_statistic) ? nlohmann::json("inf") : nlohmann::json(fit.f_statistic);
  return {{"a", fit.a},
          {"b", fit.b},
          {"c", fit.c},
          {"r_squared", fit.r_squared},
          {"f_statistic", f},
          {"dof", {fit.dof_num, fit.dof_den}},
          {"n", fit.n},
          {"p_value", fit.p_value},
          {"f_critical", crit},
          {"significant", sig},
          {"residuals", fit.residuals}};
}

}  // namespace formsense
