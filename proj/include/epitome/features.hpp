#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <utility>
#include <vector>

#include "epitome/raster.hpp"

namespace epitome {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

// ---------------------------------------------------------------------------
// Local orientation histograms

struct DescriptorParams {
  int grid = 28;   // keypoints per side
  int patch = 32;  // patch side in pixels
  int cells = 4;   // spatial cells per patch side
  int bins = 8;    // orientation bins over [0, 180) degrees

  int dim() const { return cells * cells * bins; }
};

/// Keypoint placement for a square canvas: patches of side `patch` whose
/// top-left corners sit at margin + k * stride, k = 0..grid-1.
struct KeypointGrid {
  int stride = 0;
  int margin = 0;

  static KeypointGrid for_canvas(int side, const DescriptorParams& params);
};

struct DescriptorSet {
  Matrix descriptors;                           // one row per keypoint
  std::vector<std::pair<int, int>> positions;   // (grid row, grid col)

  std::size_t size() const { return static_cast<std::size_t>(descriptors.rows()); }
  /// Rows with at least one non-zero entry, in keypoint order.
  Matrix nonempty() const;
};

/// Gradients come from central differences on a 3x3 box-smoothed float copy
/// of the canvas (zero outside). Orientation is taken modulo 180 degrees and
/// hard-binned; bin b covers [b, b+1) * 180/bins degrees. Each descriptor is
/// L2-normalised unless it is all zero. Parallel over keypoints.
DescriptorSet extract_descriptors(const Canvas& canvas, const DescriptorParams& params = {});

namespace reference {
/// Serial, per-keypoint recomputation of the same descriptors.
DescriptorSet extract_descriptors(const Canvas& canvas, const DescriptorParams& params = {});
}  // namespace reference

// ---------------------------------------------------------------------------
// PCA

struct PcaModel {
  Vector mean;         // D
  Matrix basis;        // d x D, orthonormal rows, descending variance
  Vector eigenvalues;  // d, sample-covariance eigenvalues (n - 1 normalisation)

  int input_dim() const { return static_cast<int>(basis.cols()); }
  int output_dim() const { return static_cast<int>(basis.rows()); }

  Matrix project(const Matrix& rows) const;
};

/// Top-d principal components of the centred sample. Each basis vector is
/// sign-fixed so that its first non-zero coefficient is positive.
PcaModel fit_pca(const Matrix& sample, int d);

// ---------------------------------------------------------------------------
// Diagonal-covariance Gaussian mixture

inline constexpr double kVarianceFloor = 1e-4;

struct GmmModel {
  Vector weights;    // K, positive, sums to 1
  Matrix means;      // K x d
  Matrix variances;  // K x d, >= variance floor

  int components() const { return static_cast<int>(weights.size()); }
  int dim() const { return static_cast<int>(means.cols()); }
};

struct GmmOptions {
  int max_iterations = 100;
  double relative_tolerance = 1e-6;
  double variance_floor = kVarianceFloor;
};

struct GmmFit {
  GmmModel model;
  /// Mean per-sample log-likelihood of each successive parameter set,
  /// starting with the k-means++ initialisation.
  std::vector<double> log_likelihood;
  bool converged = false;
};

/// EM from a deterministic k-means++ initialisation. Requires at least 10*K
/// rows that are not all identical.
GmmFit fit_gmm(const Matrix& sample, int components, std::uint64_t seed, const GmmOptions& options = {});

/// Posterior component probabilities (n x K). If `log_likelihood` is given
/// it receives log p(x_i) per row. Parallel over rows.
Matrix responsibilities(const GmmModel& gmm, const Matrix& x, Vector* log_likelihood = nullptr);

double mean_log_likelihood(const GmmModel& gmm, const Matrix& x);

/// One EM update (M-step on the given responsibilities), variances floored.
GmmModel maximization_step(const GmmModel& previous, const Matrix& x, const Matrix& resp, double variance_floor);

namespace reference {
Matrix responsibilities(const GmmModel& gmm, const Matrix& x, Vector* log_likelihood = nullptr);
}  // namespace reference

// ---------------------------------------------------------------------------
// Fisher vectors

struct FeatureVector {
  Vector values;

  std::size_t dim() const { return static_cast<std::size_t>(values.size()); }
};

/// Fisher-information-normalised gradients of the mean log-likelihood with
/// respect to the component means and standard deviations:
///   mean block k:  1/(T sqrt(w_k))    sum_t g_tk (x_t - mu_k) / sigma_k
///   sigma block k: 1/(T sqrt(2 w_k))  sum_t g_tk ((x_t - mu_k)^2 / sigma_k^2 - 1)
/// laid out as [mean blocks k = 0..K-1, sigma blocks k = 0..K-1], length 2Kd.
/// Zero rows of input give the zero vector. Parallel over components.
Vector fisher_gradients(const Matrix& projected, const GmmModel& gmm);

namespace reference {
Vector fisher_gradients(const Matrix& projected, const GmmModel& gmm);
}  // namespace reference

/// Signed square root per entry, then L2 normalisation (zero stays zero).
void power_l2_normalize(Vector& v);

/// Drops all-zero descriptors, projects the rest, encodes, normalises.
FeatureVector fisher_encode(const DescriptorSet& descriptors, const PcaModel& pca, const GmmModel& gmm);

}  // namespace epitome
