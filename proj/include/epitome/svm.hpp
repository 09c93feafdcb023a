#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "epitome/features.hpp"

namespace epitome {

enum class KernelKind { kLinear, kRbf };

const char* to_string(KernelKind kind);
KernelKind kernel_from_string(const std::string& name);

struct GridPoint {
  double C = 1.0;
  double gamma = 0.0;  // ignored by the linear kernel

  friend bool operator==(const GridPoint&, const GridPoint&) = default;
};

struct TrainConfig {
  KernelKind kernel = KernelKind::kLinear;
  double C = 1.0;
  double gamma = 0.0;
  int folds = 5;
  std::vector<GridPoint> grid;
  std::uint64_t seed = 0;
  int epochs = 20;               // linear (Pegasos) only
  double rbf_tolerance = 1e-3;   // SMO stopping gap
  long rbf_max_iterations = 10'000'000;

  /// C in {0.1, 1, 10, 100}; for rbf, gamma in {1/dim, 10/dim}.
  static std::vector<GridPoint> default_grid(KernelKind kernel, std::size_t dim);

  /// Throws DataError on non-positive parameters, folds < 2 or an empty grid.
  void validate() const;
};

struct LinearDecision {
  Vector weights;
  double bias = 0.0;
};

struct RbfDecision {
  Matrix support_vectors;
  Vector coefficients;  // alpha_i * y_i
  double bias = 0.0;
};

/// One-vs-rest decision functions, one per category.
struct SvmModel {
  std::vector<std::string> categories;
  KernelKind kernel = KernelKind::kLinear;
  double gamma = 0.0;
  std::size_t dim = 0;
  std::vector<LinearDecision> linear;
  std::vector<RbfDecision> rbf;

  Vector scores(const Vector& x) const;
};

struct Prediction {
  std::size_t index = 0;
  std::string category;
  std::vector<double> scores;
};

/// argmax of the per-category scores; the earliest category wins ties.
Prediction classify(const SvmModel& model, const FeatureVector& f);

Matrix stack_features(std::span<const FeatureVector> features);

/// Trains with cfg.C and cfg.gamma. Throws DataError on empty input, a
/// single category, length mismatch or non-uniform feature dimension.
SvmModel train(std::span<const FeatureVector> features, std::span<const std::string> labels, const TrainConfig& cfg);
SvmModel train(const Matrix& features, std::span<const std::string> labels, const TrainConfig& cfg);

// Binary solvers, exposed for testing.

struct LinearBinaryResult {
  Vector weights;
  double bias = 0.0;
  /// Primal objective at w = 0 followed by its value after each epoch.
  std::vector<double> objective;
};

/// Pegasos: lambda = 1 / (C n), step 1 / (lambda t), bias as a constant
/// feature, one seeded permutation of the rows per epoch.
LinearBinaryResult train_linear_binary(const Matrix& x, std::span<const double> y, double C, int epochs,
                                       std::uint64_t seed);

double linear_objective(const Matrix& x, std::span<const double> y, double C, const Vector& w, double bias);

struct DualSolution {
  Vector alpha;
  double bias = 0.0;
  long iterations = 0;
};

/// SMO with maximal-violating-pair selection on a precomputed kernel matrix.
DualSolution solve_svm_dual(const Eigen::MatrixXd& kernel, std::span<const double> y, double C, double tolerance,
                            long max_iterations);

Eigen::MatrixXd rbf_kernel_matrix(const Matrix& x, double gamma);

// Cross-validation

/// Fold index per item. Items sharing a group id always share a fold; groups
/// are shuffled per category (seeded) and dealt round-robin, so each fold's
/// class counts are within one group of the global proportion. Without
/// groups every item is its own group.
std::vector<int> stratified_folds(std::span<const std::string> labels, std::span<const std::size_t> groups, int folds,
                                  std::uint64_t seed);

struct CvEntry {
  GridPoint params;
  double mean_accuracy = 0.0;
  std::vector<double> fold_accuracy;
};

struct CvResult {
  GridPoint best;
  std::vector<CvEntry> table;
};

/// Grid search over cfg.grid; best is the highest mean accuracy, ties broken
/// by smallest C then smallest gamma.
CvResult cross_validate(const Matrix& features, std::span<const std::string> labels, const TrainConfig& cfg,
                        std::span<const std::size_t> groups = {});

struct EvalReport {
  std::vector<std::string> categories;
  double accuracy = 0.0;
  std::vector<std::vector<std::size_t>> confusion;  // [true][predicted]
  std::vector<std::size_t> counts;                  // per true category

  std::string to_json() const;
};

EvalReport evaluate(const SvmModel& model, std::span<const FeatureVector> features, std::span<const std::string> labels);
EvalReport evaluate_predictions(const std::vector<std::string>& categories, std::span<const std::size_t> truth,
                                std::span<const std::size_t> predicted);

}  // namespace epitome
