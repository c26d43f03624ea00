#include "formsense/mds.hpp"

#include <cmath>
#include <numeric>
#include <vector>

#include "formsense/error.hpp"
#include "formsense/io.hpp"
#include "formsense/random.hpp"

namespace formsense {

namespace {

// Below this distance a pair contributes no majorization pull (coincident points).
constexpr double kCoincident = 1e-12;

struct Problem {
  int n = 0;
  std::vector<int> a, b;   // 0-based pair endpoints
  std::vector<double> target;
  double target_sq = 0.0;  // sum of squared dissimilarities
  Eigen::MatrixXd v_plus;  // Moore-Penrose inverse of the observed-pair Laplacian
};

int find_root(std::vector<int>& parent, int x) {
  while (parent[x] != x) x = parent[x] = parent[parent[x]];
  return x;
}

Problem prepare(const Dissimilarities& data, int k) {
  if (data.n < 2) throw InvalidInput("MDS needs at least 2 products");
  if (k < 1) throw InvalidInput("MDS dimension must be at least 1");
  if (k >= data.n) throw InvalidInput("MDS dimension must be smaller than the number of products");

  Problem p;
  p.n = data.n;
  std::vector<int> parent(p.n);
  std::iota(parent.begin(), parent.end(), 0);
  Eigen::MatrixXd laplacian = Eigen::MatrixXd::Zero(p.n, p.n);
  for (const auto& e : data.pairs) {
    const int i = e.a, j = e.b;
    if (i < 0 || j < 0 || i >= p.n || j >= p.n || i == j) throw InvalidInput("invalid dissimilarity pair");
    if (!(e.value >= 0.0) || !std::isfinite(e.value)) throw InvalidInput("dissimilarities must be finite and >= 0");
    p.a.push_back(i);
    p.b.push_back(j);
    p.target.push_back(e.value);
    p.target_sq += e.value * e.value;
    laplacian(i, j) -= 1.0;
    laplacian(j, i) -= 1.0;
    laplacian(i, i) += 1.0;
    laplacian(j, j) += 1.0;
    parent[find_root(parent, i)] = find_root(parent, j);
  }
  for (int i = 1; i < p.n; ++i)
    if (find_root(parent, i) != find_root(parent, 0))
      throw InvalidInput("the observed comparisons do not connect all products");
  if (p.target_sq == 0.0) throw InvalidInput("all observed dissimilarities are zero");
  // For a connected graph the Laplacian null space is the constant vector.
  const Eigen::MatrixXd centering = Eigen::MatrixXd::Constant(p.n, p.n, 1.0 / p.n);
  p.v_plus = (laplacian + centering).inverse() - centering;
  return p;
}

struct PairSums {
  double dd = 0.0;  // sum d^2
  double dt = 0.0;  // sum d * D
};

PairSums pair_sums(const Problem& p, const Eigen::MatrixXd& x) {
  PairSums s;
  for (std::size_t e = 0; e < p.a.size(); ++e) {
    const double d = (x.row(p.a[e]) - x.row(p.b[e])).norm();
    s.dd += d * d;
    s.dt += d * p.target[e];
  }
  return s;
}

// Stress of the configuration after the best uniform rescaling. Minimising the
// raw stress sum (d - D)^2 minimises this value too: both reduce to
// 1 - cos^2(d, D) over the observed pairs.
double scaled_stress(const Problem& p, const PairSums& s) {
  if (s.dd == 0.0) return 1.0;
  const double c = (s.dt * s.dt) / (p.target_sq * s.dd);
  return std::sqrt(std::max(0.0, 1.0 - c));
}

struct RestartResult {
  Eigen::MatrixXd points;
  double stress = 0.0;
  int iterations = 0;
  bool converged = false;
};

RestartResult run_restart(const Problem& p, const MdsOptions& options, int restart) {
  Rng rng(options.seed, static_cast<std::uint64_t>(restart));
  Eigen::MatrixXd x(p.n, options.k);
  for (int i = 0; i < p.n; ++i)
    for (int c = 0; c < options.k; ++c) x(i, c) = rng.normal();

  RestartResult r;
  double previous = scaled_stress(p, pair_sums(p, x));
  Eigen::MatrixXd b(p.n, p.n);
  for (int it = 1; it <= options.max_iterations; ++it) {
    b.setZero();
    for (std::size_t e = 0; e < p.a.size(); ++e) {
      const int i = p.a[e], j = p.b[e];
      const double d = (x.row(i) - x.row(j)).norm();
      const double w = d > kCoincident ? -p.target[e] / d : 0.0;
      b(i, j) += w;
      b(j, i) += w;
      b(i, i) -= w;
      b(j, j) -= w;
    }
    x = p.v_plus * (b * x);  // Guttman transform
    const double current = scaled_stress(p, pair_sums(p, x));
    r.iterations = it;
    if (previous - current < options.tolerance) {
      r.converged = true;
      break;
    }
    previous = current;
  }
  const auto s = pair_sums(p, x);
  if (s.dt > 0.0) x *= p.target_sq / s.dt;
  r.points = normalize_orientation(x);
  return r;
}

PerceptualConfiguration select_best(const Dissimilarities& data, std::vector<RestartResult>& results) {
  std::size_t best = 0;
  for (std::size_t r = 0; r < results.size(); ++r) results[r].stress = stress(results[r].points, data);
  for (std::size_t r = 1; r < results.size(); ++r)
    if (results[r].stress < results[best].stress) best = r;
  PerceptualConfiguration c;
  c.points = std::move(results[best].points);
  c.stress = results[best].stress;
  c.iterations = results[best].iterations;
  c.restarts_used = static_cast<int>(results.size());
  c.converged = false;
  for (const auto& r : results) c.converged = c.converged || r.converged;
  return c;
}

void check_options(const MdsOptions& options) {
  if (options.restarts < 1) throw InvalidInput("restarts must be at least 1");
  if (options.max_iterations < 1) throw InvalidInput("max_iterations must be at least 1");
}

}  // namespace

Dissimilarities Dissimilarities::from_matrix(const SparseDissimilarityMatrix& matrix) {
  Dissimilarities d;
  d.n = matrix.n;
  for (const auto& e : matrix.entries) d.pairs.push_back({e.i - 1, e.j - 1, static_cast<double>(e.value)});
  return d;
}

Dissimilarities Dissimilarities::from_points(const Eigen::MatrixXd& points) {
  Dissimilarities d;
  d.n = static_cast<int>(points.rows());
  for (int i = 0; i < d.n; ++i)
    for (int j = i + 1; j < d.n; ++j) d.pairs.push_back({i, j, (points.row(i) - points.row(j)).norm()});
  return d;
}

double stress(const Eigen::MatrixXd& points, const Dissimilarities& data) {
  if (points.rows() != data.n)
    throw DimensionMismatch("configuration has " + std::to_string(points.rows()) + " points, data has " +
                            std::to_string(data.n) + " products");
  double num = 0.0, den = 0.0;
  for (const auto& e : data.pairs) {
    const double d = (points.row(e.a) - points.row(e.b)).norm();
    num += (d - e.value) * (d - e.value);
    den += d * d;
  }
  if (den == 0.0) throw AllDistancesZero();
  return std::sqrt(num / den);
}

double stress(const Eigen::MatrixXd& points, const SparseDissimilarityMatrix& matrix) {
  return stress(points, Dissimilarities::from_matrix(matrix));
}

Eigen::MatrixXd normalize_orientation(const Eigen::MatrixXd& points) {
  Eigen::MatrixXd x = points.rowwise() - points.colwise().mean();
  const Eigen::MatrixXd cov = (x.transpose() * x) / static_cast<double>(x.rows());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
  // Eigen sorts ascending; reverse for decreasing variance.
  Eigen::MatrixXd axes = eig.eigenvectors().rowwise().reverse();
  x = x * axes;
  for (int c = 0; c < x.cols(); ++c) {
    int row = 0;
    while (row + 1 < x.rows() && x(row, c) == 0.0) ++row;
    if (x(row, c) < 0.0) x.col(c) *= -1.0;
  }
  return x;
}

PerceptualConfiguration fit_mds(const SparseDissimilarityMatrix& matrix, const MdsOptions& options) {
  const auto report = validate_dissimilarity(matrix);
  if (!report.valid()) {
    std::string msg = "invalid dissimilarity matrix:";
    for (const auto& v : report.violations) msg += " " + v.message + ";";
    throw InvalidInput(msg);
  }
  return fit_mds(Dissimilarities::from_matrix(matrix), options);
}

PerceptualConfiguration fit_mds(const Dissimilarities& data, const MdsOptions& options) {
  check_options(options);
  const auto problem = prepare(data, options.k);
  std::vector<RestartResult> results(static_cast<std::size_t>(options.restarts));
#pragma omp parallel for schedule(dynamic, 1)
  for (int r = 0; r < options.restarts; ++r) results[static_cast<std::size_t>(r)] = run_restart(problem, options, r);
  return select_best(data, results);
}

PerceptualConfiguration fit_mds_reference(const Dissimilarities& data, const MdsOptions& options) {
  check_options(options);
  const auto problem = prepare(data, options.k);
  std::vector<RestartResult> results;
  for (int r = 0; r < options.restarts; ++r) results.push_back(run_restart(problem, options, r));
  return select_best(data, results);
}

ProcrustesResult procrustes_align(const PerceptualConfiguration& config, const PerceptualConfiguration& reference) {
  if (config.points.rows() != reference.points.rows() || config.points.cols() != reference.points.cols())
    throw DimensionMismatch("procrustes alignment needs configurations of equal shape");
  const Eigen::RowVectorXd mean_x = config.points.colwise().mean();
  const Eigen::RowVectorXd mean_y = reference.points.colwise().mean();
  const Eigen::MatrixXd x = config.points.rowwise() - mean_x;
  const Eigen::MatrixXd y = reference.points.rowwise() - mean_y;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(x.transpose() * y, Eigen::ComputeFullU | Eigen::ComputeFullV);
  ProcrustesResult out;
  out.rotation = svd.matrixU() * svd.matrixV().transpose();
  out.config = config;
  out.config.points = (x * out.rotation).rowwise() + mean_y;
  out.translation = mean_y - mean_x * out.rotation;
  out.residual = (out.config.points - reference.points).squaredNorm();
  return out;
}

std::string configuration_csv(const PerceptualConfiguration& config) {
  std::string out = "id";
  for (int c = 1; c <= config.k(); ++c) out += ",x" + std::to_string(c);
  out += '\n';
  for (int i = 0; i < config.n(); ++i) {
    out += std::to_string(i + 1);
    for (int c = 0; c < config.k(); ++c) out += "," + format_number(config.points(i, c));
    out += '\n';
  }
  return out;
}

nlohmann::json configuration_json(const PerceptualConfiguration& config) {
  nlohmann::json points = nlohmann::json::array();
  for (int i = 0; i < config.n(); ++i) {
    std::vector<double> x;
    for (int c = 0; c < config.k(); ++c) x.push_back(config.points(i, c));
    points.push_back({{"id", i + 1}, {"x", x}});
  }
  return {{"k", config.k()},
          {"stress", config.stress},
          {"restarts", config.restarts_used},
          {"converged", config.converged},
          {"iterations", config.iterations},
          {"points", points}};
}

PerceptualConfiguration load_configuration_csv(std::string_view csv) {
  std::vector<std::vector<double>> rows;
  int line = 0, k = -1;
  while (!csv.empty()) {
    ++line;
    const auto nl = csv.find('\n');
    std::string raw(csv.substr(0, nl));
    csv = nl == std::string_view::npos ? std::string_view{} : csv.substr(nl + 1);
    if (!raw.empty() && raw.back() == '\r') raw.pop_back();
    if (raw.empty()) continue;
    std::vector<std::string> cells;
    std::size_t start = 0;
    while (true) {
      const auto comma = raw.find(',', start);
      cells.push_back(raw.substr(start, comma - start));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    if (k < 0) {
      if (cells.empty() || cells[0] != "id" || cells.size() < 2) throw ParseError("header must be id,x1..xK", line);
      k = static_cast<int>(cells.size()) - 1;
      continue;
    }
    if (static_cast<int>(cells.size()) != k + 1) throw ParseError("expected " + std::to_string(k + 1) + " cells", line);
    if (std::stoi(cells[0]) != static_cast<int>(rows.size()) + 1) throw ParseError("ids must be 1..N in order", line);
    std::vector<double> r;
    for (int c = 1; c <= k; ++c) {
      char* end = nullptr;
      const double v = std::strtod(cells[c].c_str(), &end);
      if (end != cells[c].c_str() + cells[c].size()) throw ParseError("bad coordinate '" + cells[c] + "'", line);
      r.push_back(v);
    }
    rows.push_back(std::move(r));
  }
  if (rows.empty()) throw ParseError("configuration has no points");
  PerceptualConfiguration c;
  c.points.resize(static_cast<long>(rows.size()), k);
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (int col = 0; col < k; ++col) c.points(static_cast<long>(i), col) = rows[i][col];
  c.restarts_used = 0;
  return c;
}

}  // namespace formsense
