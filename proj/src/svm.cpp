#include "epitome/svm.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "epitome/error.hpp"
#include "epitome/random.hpp"
#include "json.hpp"

namespace epitome {

const char* to_string(KernelKind kind) { return kind == KernelKind::kLinear ? "linear" : "rbf"; }

KernelKind kernel_from_string(const std::string& name) {
  if (name == "linear") return KernelKind::kLinear;
  if (name == "rbf") return KernelKind::kRbf;
  throw DataError("unknown kernel '" + name + "' (expected linear or rbf)");
}

std::vector<GridPoint> TrainConfig::default_grid(KernelKind kernel, std::size_t dim) {
  std::vector<GridPoint> grid;
  for (double c : {0.1, 1.0, 10.0, 100.0}) {
    if (kernel == KernelKind::kLinear) {
      grid.push_back({c, 0.0});
    } else {
      const double d = static_cast<double>(std::max<std::size_t>(dim, 1));
      grid.push_back({c, 1.0 / d});
      grid.push_back({c, 10.0 / d});
    }
  }
  return grid;
}

void TrainConfig::validate() const {
  if (!(C > 0.0)) throw DataError("C must be positive");
  if (kernel == KernelKind::kRbf && !(gamma > 0.0)) throw DataError("gamma must be positive for the rbf kernel");
  if (folds < 2) throw DataError("cross-validation needs at least 2 folds");
  if (epochs < 1) throw DataError("epochs must be positive");
  if (grid.empty()) throw DataError("parameter grid is empty");
  for (const GridPoint& g : grid) {
    if (!(g.C > 0.0)) throw DataError("grid C values must be positive");
    if (kernel == KernelKind::kRbf && !(g.gamma > 0.0)) throw DataError("grid gamma values must be positive");
  }
}

Vector SvmModel::scores(const Vector& x) const {
  if (static_cast<std::size_t>(x.size()) != dim) {
    throw DataError("feature dimension " + std::to_string(x.size()) + " does not match model dimension " +
                    std::to_string(dim));
  }
  Vector s(static_cast<Eigen::Index>(categories.size()));
  if (kernel == KernelKind::kLinear) {
    for (std::size_t c = 0; c < linear.size(); ++c) s(c) = linear[c].weights.dot(x) + linear[c].bias;
  } else {
    for (std::size_t c = 0; c < rbf.size(); ++c) {
      const RbfDecision& r = rbf[c];
      double f = r.bias;
      for (Eigen::Index i = 0; i < r.support_vectors.rows(); ++i) {
        f += r.coefficients(i) * std::exp(-gamma * (r.support_vectors.row(i).transpose() - x).squaredNorm());
      }
      s(c) = f;
    }
  }
  return s;
}

Prediction classify(const SvmModel& model, const FeatureVector& f) {
  const Vector s = model.scores(f.values);
  Prediction p;
  p.scores.assign(s.data(), s.data() + s.size());
  for (std::size_t c = 1; c < p.scores.size(); ++c) {
    if (p.scores[c] > p.scores[p.index]) p.index = c;
  }
  p.category = model.categories[p.index];
  return p;
}

Matrix stack_features(std::span<const FeatureVector> features) {
  if (features.empty()) return Matrix(0, 0);
  const Eigen::Index dim = features.front().values.size();
  Matrix x(static_cast<Eigen::Index>(features.size()), dim);
  for (std::size_t i = 0; i < features.size(); ++i) {
    if (features[i].values.size() != dim) throw DataError("feature vectors have different dimensions");
    x.row(static_cast<Eigen::Index>(i)) = features[i].values.transpose();
  }
  return x;
}

// ---------------------------------------------------------------------------
// Linear: Pegasos

double linear_objective(const Matrix& x, std::span<const double> y, double C, const Vector& w, double bias) {
  const double n = static_cast<double>(x.rows());
  const double lambda = 1.0 / (C * n);
  double hinge = 0.0;
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    hinge += std::max(0.0, 1.0 - y[i] * (x.row(i).dot(w.transpose()) + bias));
  }
  return 0.5 * lambda * (w.squaredNorm() + bias * bias) + hinge / n;
}

LinearBinaryResult train_linear_binary(const Matrix& x, std::span<const double> y, double C, int epochs,
                                       std::uint64_t seed) {
  const Eigen::Index n = x.rows();
  if (n == 0 || static_cast<Eigen::Index>(y.size()) != n) throw DataError("bad binary training set");
  const double lambda = 1.0 / (C * static_cast<double>(n));

  // w = scale * v keeps the shrink step O(1).
  Vector v = Vector::Zero(x.cols());
  double vb = 0.0;
  double scale = 1.0;
  LinearBinaryResult result;
  result.objective.push_back(linear_objective(x, y, C, v, 0.0));

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  Rng rng(seed);
  double t = 0.0;
  for (int epoch = 0; epoch < epochs; ++epoch) {
    for (Eigen::Index i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
    rng.shuffle(std::span<Eigen::Index>(order));
    for (Eigen::Index i : order) {
      t += 1.0;
      const double eta = 1.0 / (lambda * t);
      const double margin = y[i] * scale * (x.row(i).dot(v.transpose()) + vb);
      const double decay = 1.0 - eta * lambda;
      if (decay <= 0.0) {
        v.setZero();
        vb = 0.0;
        scale = 1.0;
      } else {
        scale *= decay;
      }
      if (margin < 1.0) {
        const double step = eta * y[i] / scale;
        v += step * x.row(i).transpose();
        vb += step;
      }
      if (scale < 1e-9) {
        v *= scale;
        vb *= scale;
        scale = 1.0;
      }
    }
    result.objective.push_back(linear_objective(x, y, C, scale * v, scale * vb));
  }
  result.weights = scale * v;
  result.bias = scale * vb;
  return result;
}

// ---------------------------------------------------------------------------
// Kernel: SMO on the dual

Eigen::MatrixXd rbf_kernel_matrix(const Matrix& x, double gamma) {
  const Eigen::Index n = x.rows();
  const Vector sq = x.rowwise().squaredNorm();
  const Eigen::MatrixXd gram = x * x.transpose();
  Eigen::MatrixXd k(n, n);
#pragma omp parallel for schedule(static)
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i < n; ++i) {
      k(i, j) = std::exp(-gamma * std::max(0.0, sq(i) + sq(j) - 2.0 * gram(i, j)));
    }
  }
  return k;
}

DualSolution solve_svm_dual(const Eigen::MatrixXd& kernel, std::span<const double> y, double C, double tolerance,
                            long max_iterations) {
  const Eigen::Index n = kernel.rows();
  if (kernel.cols() != n || static_cast<Eigen::Index>(y.size()) != n) throw DataError("bad dual problem shape");
  constexpr double kTau = 1e-12;
  Vector alpha = Vector::Zero(n);
  Vector grad = Vector::Constant(n, -1.0);  // gradient of 0.5 a'Qa - e'a, Q_ij = y_i y_j K_ij

  auto in_up = [&](Eigen::Index i) { return (y[i] > 0 && alpha(i) < C) || (y[i] < 0 && alpha(i) > 0); };
  auto in_low = [&](Eigen::Index i) { return (y[i] > 0 && alpha(i) > 0) || (y[i] < 0 && alpha(i) < C); };

  DualSolution sol;
  for (; sol.iterations < max_iterations; ++sol.iterations) {
    Eigen::Index i = -1, j = -1;
    double gmax = -INFINITY, gmin = INFINITY;
    for (Eigen::Index t = 0; t < n; ++t) {
      const double v = -y[t] * grad(t);
      if (in_up(t) && v > gmax) {
        gmax = v;
        i = t;
      }
      if (in_low(t) && v < gmin) {
        gmin = v;
        j = t;
      }
    }
    if (i < 0 || j < 0 || gmax - gmin < tolerance) break;

    const double qij = y[i] * y[j] * kernel(i, j);
    const double old_i = alpha(i), old_j = alpha(j);
    if (y[i] != y[j]) {
      double quad = kernel(i, i) + kernel(j, j) + 2.0 * qij;
      if (quad <= 0.0) quad = kTau;
      const double delta = (-grad(i) - grad(j)) / quad;
      const double diff = alpha(i) - alpha(j);
      alpha(i) += delta;
      alpha(j) += delta;
      if (diff > 0) {
        if (alpha(j) < 0) { alpha(j) = 0; alpha(i) = diff; }
      } else {
        if (alpha(i) < 0) { alpha(i) = 0; alpha(j) = -diff; }
      }
      if (diff > 0) {
        if (alpha(i) > C) { alpha(i) = C; alpha(j) = C - diff; }
      } else {
        if (alpha(j) > C) { alpha(j) = C; alpha(i) = C + diff; }
      }
    } else {
      double quad = kernel(i, i) + kernel(j, j) - 2.0 * qij;
      if (quad <= 0.0) quad = kTau;
      const double delta = (grad(i) - grad(j)) / quad;
      const double sum = alpha(i) + alpha(j);
      alpha(i) -= delta;
      alpha(j) += delta;
      if (sum > C) {
        if (alpha(i) > C) { alpha(i) = C; alpha(j) = sum - C; }
      } else {
        if (alpha(j) < 0) { alpha(j) = 0; alpha(i) = sum; }
      }
      if (sum > C) {
        if (alpha(j) > C) { alpha(j) = C; alpha(i) = sum - C; }
      } else {
        if (alpha(i) < 0) { alpha(i) = 0; alpha(j) = sum; }
      }
    }
    const double di = alpha(i) - old_i, dj = alpha(j) - old_j;
    for (Eigen::Index t = 0; t < n; ++t) {
      grad(t) += y[t] * (y[i] * kernel(t, i) * di + y[j] * kernel(t, j) * dj);
    }
  }

  // Offset from free variables, or the midpoint of the feasible interval.
  double ub = INFINITY, lb = -INFINITY, free_sum = 0.0;
  long free_count = 0;
  for (Eigen::Index t = 0; t < n; ++t) {
    const double yg = y[t] * grad(t);
    if (alpha(t) >= C) {
      if (y[t] < 0) ub = std::min(ub, yg); else lb = std::max(lb, yg);
    } else if (alpha(t) <= 0.0) {
      if (y[t] > 0) ub = std::min(ub, yg); else lb = std::max(lb, yg);
    } else {
      ++free_count;
      free_sum += yg;
    }
  }
  const double rho = free_count > 0 ? free_sum / static_cast<double>(free_count) : 0.5 * (ub + lb);
  sol.alpha = std::move(alpha);
  sol.bias = -rho;
  return sol;
}

// ---------------------------------------------------------------------------

namespace {

struct IndexedLabels {
  std::vector<std::string> categories;
  std::vector<std::size_t> index;
};

IndexedLabels index_labels(std::span<const std::string> labels) {
  IndexedLabels out;
  std::set<std::string> names(labels.begin(), labels.end());
  out.categories.assign(names.begin(), names.end());
  out.index.reserve(labels.size());
  for (const auto& l : labels) {
    out.index.push_back(static_cast<std::size_t>(
        std::lower_bound(out.categories.begin(), out.categories.end(), l) - out.categories.begin()));
  }
  return out;
}

void check_training_set(const Matrix& x, std::span<const std::string> labels) {
  if (x.rows() == 0) throw DataError("empty training set");
  if (static_cast<std::size_t>(x.rows()) != labels.size()) throw DataError("feature and label counts differ");
  std::set<std::string> names(labels.begin(), labels.end());
  if (names.size() < 2) throw DataError("training needs at least 2 categories");
}

}  // namespace

SvmModel train(const Matrix& x, std::span<const std::string> labels, const TrainConfig& cfg) {
  check_training_set(x, labels);
  if (!(cfg.C > 0.0)) throw DataError("C must be positive");
  if (cfg.kernel == KernelKind::kRbf && !(cfg.gamma > 0.0)) throw DataError("gamma must be positive");
  const IndexedLabels il = index_labels(labels);
  const std::size_t ncat = il.categories.size();

  SvmModel model;
  model.categories = il.categories;
  model.kernel = cfg.kernel;
  model.dim = static_cast<std::size_t>(x.cols());

  auto signs_for = [&](std::size_t c) {
    std::vector<double> y(il.index.size());
    for (std::size_t i = 0; i < y.size(); ++i) y[i] = il.index[i] == c ? 1.0 : -1.0;
    return y;
  };

  if (cfg.kernel == KernelKind::kLinear) {
    model.linear.resize(ncat);
#pragma omp parallel for schedule(dynamic, 1)
    for (std::ptrdiff_t c = 0; c < static_cast<std::ptrdiff_t>(ncat); ++c) {
      const auto y = signs_for(static_cast<std::size_t>(c));
      auto r = train_linear_binary(x, y, cfg.C, cfg.epochs, mix_seed(cfg.seed, static_cast<std::uint64_t>(c)));
      model.linear[c] = {std::move(r.weights), r.bias};
    }
  } else {
    model.gamma = cfg.gamma;
    const Eigen::MatrixXd k = rbf_kernel_matrix(x, cfg.gamma);
    model.rbf.resize(ncat);
#pragma omp parallel for schedule(dynamic, 1)
    for (std::ptrdiff_t c = 0; c < static_cast<std::ptrdiff_t>(ncat); ++c) {
      const auto y = signs_for(static_cast<std::size_t>(c));
      const DualSolution sol = solve_svm_dual(k, y, cfg.C, cfg.rbf_tolerance, cfg.rbf_max_iterations);
      std::vector<Eigen::Index> sv;
      for (Eigen::Index i = 0; i < sol.alpha.size(); ++i) {
        if (sol.alpha(i) > 0.0) sv.push_back(i);
      }
      RbfDecision d;
      d.support_vectors.resize(static_cast<Eigen::Index>(sv.size()), x.cols());
      d.coefficients.resize(static_cast<Eigen::Index>(sv.size()));
      for (std::size_t s = 0; s < sv.size(); ++s) {
        d.support_vectors.row(static_cast<Eigen::Index>(s)) = x.row(sv[s]);
        d.coefficients(static_cast<Eigen::Index>(s)) = sol.alpha(sv[s]) * y[static_cast<std::size_t>(sv[s])];
      }
      d.bias = sol.bias;
      model.rbf[c] = std::move(d);
    }
  }
  return model;
}

SvmModel train(std::span<const FeatureVector> features, std::span<const std::string> labels, const TrainConfig& cfg) {
  if (features.empty()) throw DataError("empty training set");
  return train(stack_features(features), labels, cfg);
}

// ---------------------------------------------------------------------------
// Cross-validation

std::vector<int> stratified_folds(std::span<const std::string> labels, std::span<const std::size_t> groups, int folds,
                                  std::uint64_t seed) {
  if (folds < 2) throw DataError("cross-validation needs at least 2 folds");
  if (!groups.empty() && groups.size() != labels.size()) throw DataError("group and label counts differ");

  // category -> groups in order of first appearance
  std::map<std::string, std::vector<std::size_t>> members;
  std::map<std::string, std::set<std::size_t>> seen;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const std::size_t g = groups.empty() ? i : groups[i];
    if (seen[labels[i]].insert(g).second) members[labels[i]].push_back(g);
  }
  std::map<std::size_t, int> fold_of_group;
  for (auto& [category, gs] : members) {
    if (gs.size() < static_cast<std::size_t>(folds)) {
      throw DataError("category '" + category + "' has fewer examples than folds");
    }
    Rng rng(mix_seed(seed, fnv1a64(category)));
    rng.shuffle(std::span<std::size_t>(gs));
    for (std::size_t p = 0; p < gs.size(); ++p) {
      if (!fold_of_group.emplace(gs[p], static_cast<int>(p % folds)).second) {
        throw DataError("a group spans more than one category");
      }
    }
  }
  std::vector<int> out(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) out[i] = fold_of_group.at(groups.empty() ? i : groups[i]);
  return out;
}

CvResult cross_validate(const Matrix& x, std::span<const std::string> labels, const TrainConfig& cfg,
                        std::span<const std::size_t> groups) {
  check_training_set(x, labels);
  cfg.validate();
  const std::vector<int> fold = stratified_folds(labels, groups, cfg.folds, cfg.seed);

  const std::size_t ncand = cfg.grid.size();
  const std::size_t jobs = ncand * static_cast<std::size_t>(cfg.folds);
  std::vector<double> acc(jobs, 0.0);
  std::vector<std::string> errors(jobs);

#pragma omp parallel for schedule(dynamic, 1)
  for (std::ptrdiff_t job = 0; job < static_cast<std::ptrdiff_t>(jobs); ++job) {
    try {
      const GridPoint& gp = cfg.grid[static_cast<std::size_t>(job) / cfg.folds];
      const int held = static_cast<int>(job % cfg.folds);
      std::vector<Eigen::Index> tr, te;
      for (std::size_t i = 0; i < fold.size(); ++i) (fold[i] == held ? te : tr).push_back(static_cast<Eigen::Index>(i));
      Matrix xtr(static_cast<Eigen::Index>(tr.size()), x.cols());
      std::vector<std::string> ytr;
      for (std::size_t r = 0; r < tr.size(); ++r) {
        xtr.row(static_cast<Eigen::Index>(r)) = x.row(tr[r]);
        ytr.push_back(labels[static_cast<std::size_t>(tr[r])]);
      }
      TrainConfig sub = cfg;
      sub.C = gp.C;
      sub.gamma = gp.gamma;
      const SvmModel m = train(xtr, ytr, sub);
      std::size_t correct = 0;
      for (Eigen::Index i : te) {
        FeatureVector f{x.row(i).transpose()};
        if (classify(m, f).category == labels[static_cast<std::size_t>(i)]) ++correct;
      }
      acc[static_cast<std::size_t>(job)] = static_cast<double>(correct) / static_cast<double>(te.size());
    } catch (const std::exception& e) {
      errors[static_cast<std::size_t>(job)] = e.what();
    }
  }
  for (const auto& e : errors) {
    if (!e.empty()) throw DataError("cross-validation: " + e);
  }

  CvResult result;
  for (std::size_t c = 0; c < ncand; ++c) {
    CvEntry entry;
    entry.params = cfg.grid[c];
    entry.fold_accuracy.assign(acc.begin() + static_cast<std::ptrdiff_t>(c * cfg.folds),
                               acc.begin() + static_cast<std::ptrdiff_t>((c + 1) * cfg.folds));
    double s = 0.0;
    for (double a : entry.fold_accuracy) s += a;
    entry.mean_accuracy = s / cfg.folds;
    result.table.push_back(std::move(entry));
  }
  const CvEntry* best = &result.table.front();
  for (const CvEntry& e : result.table) {
    const bool better = e.mean_accuracy > best->mean_accuracy ||
                        (e.mean_accuracy == best->mean_accuracy &&
                         (e.params.C < best->params.C ||
                          (e.params.C == best->params.C && e.params.gamma < best->params.gamma)));
    if (better) best = &e;
  }
  result.best = best->params;
  return result;
}

// ---------------------------------------------------------------------------
// Evaluation

EvalReport evaluate_predictions(const std::vector<std::string>& categories, std::span<const std::size_t> truth,
                                std::span<const std::size_t> predicted) {
  if (truth.empty()) throw DataError("empty test set");
  if (truth.size() != predicted.size()) throw DataError("prediction and label counts differ");
  const std::size_t n = categories.size();
  EvalReport r;
  r.categories = categories;
  r.confusion.assign(n, std::vector<std::size_t>(n, 0));
  r.counts.assign(n, 0);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (truth[i] >= n || predicted[i] >= n) throw DataError("category index out of range");
    ++r.confusion[truth[i]][predicted[i]];
    ++r.counts[truth[i]];
    if (truth[i] == predicted[i]) ++correct;
  }
  r.accuracy = static_cast<double>(correct) / static_cast<double>(truth.size());
  return r;
}

EvalReport evaluate(const SvmModel& model, std::span<const FeatureVector> features, std::span<const std::string> labels) {
  if (features.empty()) throw DataError("empty test set");
  if (features.size() != labels.size()) throw DataError("feature and label counts differ");
  std::vector<std::size_t> truth(labels.size()), predicted(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    auto it = std::find(model.categories.begin(), model.categories.end(), labels[i]);
    if (it == model.categories.end()) throw DataError("unknown test category '" + labels[i] + "'");
    truth[i] = static_cast<std::size_t>(it - model.categories.begin());
  }
#pragma omp parallel for schedule(dynamic, 4)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(features.size()); ++i) {
    predicted[i] = classify(model, features[i]).index;
  }
  return evaluate_predictions(model.categories, truth, predicted);
}

std::string EvalReport::to_json() const {
  nlohmann::json j;
  j["accuracy"] = accuracy;
  j["categories"] = categories;
  j["confusion"] = confusion;
  j["counts"] = counts;
  return j.dump(2);
}

}  // namespace epitome
