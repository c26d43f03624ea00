#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "formsense/types.hpp"
#include "json.hpp"

namespace formsense {

/// MDS output: row i - 1 holds the coordinates of product i.
struct PerceptualConfiguration {
  Eigen::MatrixXd points;
  double stress = 0.0;
  int restarts_used = 0;
  bool converged = true;  // false when no restart met the tolerance
  int iterations = 0;     // of the selected restart

  int n() const { return static_cast<int>(points.rows()); }
  int k() const { return static_cast<int>(points.cols()); }
};

struct MdsOptions {
  int k = 2;
  int restarts = 20;
  int max_iterations = 2000;
  double tolerance = 1e-8;
  std::uint64_t seed = 0;
};

/// Real-valued observed dissimilarities (0-based pairs). The subject's integer
/// matrix converts to this; exact distance matrices for testing are built directly.
struct Dissimilarities {
  struct Pair {
    int a = 0;
    int b = 0;
    double value = 0.0;
  };
  int n = 0;
  std::vector<Pair> pairs;

  static Dissimilarities from_matrix(const SparseDissimilarityMatrix& matrix);
  /// Every pair's exact Euclidean distance between rows of `points`.
  static Dissimilarities from_points(const Eigen::MatrixXd& points);
};

/// Normalised stress over the observed pairs only:
/// sqrt(sum (d_ij - D_ij)^2 / sum d_ij^2) with Euclidean d_ij.
double stress(const Eigen::MatrixXd& points, const Dissimilarities& data);
double stress(const Eigen::MatrixXd& points, const SparseDissimilarityMatrix& matrix);
inline double stress(const PerceptualConfiguration& config, const SparseDissimilarityMatrix& matrix) {
  return stress(config.points, matrix);
}

/// Multi-restart majorization fit; restarts run in parallel (OpenMP) and the
/// lowest-stress restart wins, ties going to the lower restart index.
/// The integer overload validates the matrix first (coverage, range).
PerceptualConfiguration fit_mds(const SparseDissimilarityMatrix& matrix, const MdsOptions& options);
PerceptualConfiguration fit_mds(const Dissimilarities& data, const MdsOptions& options);
/// Serial reference of fit_mds; must produce bit-identical output.
PerceptualConfiguration fit_mds_reference(const Dissimilarities& data, const MdsOptions& options);

/// Centres, rotates onto principal axes (decreasing variance) and fixes signs so
/// that product 1 has nonnegative coordinates.
Eigen::MatrixXd normalize_orientation(const Eigen::MatrixXd& points);

struct ProcrustesResult {
  PerceptualConfiguration config;
  Eigen::MatrixXd rotation;     // K x K orthogonal, reflections allowed
  Eigen::RowVectorXd translation;
  double residual = 0.0;        // sum of squared distances to the reference
};

ProcrustesResult procrustes_align(const PerceptualConfiguration& config, const PerceptualConfiguration& reference);

std::string configuration_csv(const PerceptualConfiguration& config);
nlohmann::json configuration_json(const PerceptualConfiguration& config);
/// Reads `id,x1..xK` written by configuration_csv (stress is not stored in CSV).
PerceptualConfiguration load_configuration_csv(std::string_view csv);

}  // namespace formsense
