#include <algorithm>
#include <cmath>
#include <limits>

#include "epitome/error.hpp"
#include "epitome/features.hpp"
#include "epitome/random.hpp"

namespace epitome {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;

// log w_k - 0.5 * sum_d log(2 pi var_kd)
Vector component_constants(const GmmModel& gmm) {
  Vector c(gmm.components());
  for (int k = 0; k < gmm.components(); ++k) {
    double s = 0.0;
    for (int j = 0; j < gmm.dim(); ++j) s += kLog2Pi + std::log(gmm.variances(k, j));
    c(k) = std::log(gmm.weights(k)) - 0.5 * s;
  }
  return c;
}

// Fills one row of responsibilities, returns log p(x).
double posterior_row(const GmmModel& gmm, const Vector& constants, const double* x, double* out) {
  const int K = gmm.components();
  const int d = gmm.dim();
  double top = -std::numeric_limits<double>::infinity();
  for (int k = 0; k < K; ++k) {
    double q = 0.0;
    for (int j = 0; j < d; ++j) {
      const double diff = x[j] - gmm.means(k, j);
      q += diff * diff / gmm.variances(k, j);
    }
    out[k] = constants(k) - 0.5 * q;
    top = std::max(top, out[k]);
  }
  double sum = 0.0;
  for (int k = 0; k < K; ++k) {
    out[k] = std::exp(out[k] - top);
    sum += out[k];
  }
  for (int k = 0; k < K; ++k) out[k] /= sum;
  return top + std::log(sum);
}

void check_dims(const GmmModel& gmm, const Matrix& x) {
  if (x.cols() != gmm.dim()) throw DataError("GMM input dimension mismatch");
}

Matrix kmeanspp_centers(const Matrix& x, int K, Rng& rng) {
  const Eigen::Index n = x.rows();
  Matrix centers(K, x.cols());
  centers.row(0) = x.row(static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(n))));
  Vector nearest = (x.rowwise() - centers.row(0)).rowwise().squaredNorm();
  for (int k = 1; k < K; ++k) {
    const double total = nearest.sum();
    Eigen::Index pick = 0;
    if (total > 0.0) {
      const double target = rng.uniform() * total;
      double acc = 0.0;
      pick = n - 1;
      for (Eigen::Index i = 0; i < n; ++i) {
        acc += nearest(i);
        if (acc > target) {
          pick = i;
          break;
        }
      }
    } else {
      pick = static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(n)));
    }
    centers.row(k) = x.row(pick);
    nearest = nearest.cwiseMin((x.rowwise() - centers.row(k)).rowwise().squaredNorm());
  }
  return centers;
}

}  // namespace

Matrix responsibilities(const GmmModel& gmm, const Matrix& x, Vector* log_likelihood) {
  check_dims(gmm, x);
  const Vector constants = component_constants(gmm);
  Matrix resp(x.rows(), gmm.components());
  if (log_likelihood) log_likelihood->resize(x.rows());
#pragma omp parallel for schedule(static)
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const double ll = posterior_row(gmm, constants, x.row(i).data(), resp.row(i).data());
    if (log_likelihood) (*log_likelihood)(i) = ll;
  }
  return resp;
}

namespace reference {

Matrix responsibilities(const GmmModel& gmm, const Matrix& x, Vector* log_likelihood) {
  check_dims(gmm, x);
  const int K = gmm.components();
  Matrix resp(x.rows(), K);
  if (log_likelihood) log_likelihood->resize(x.rows());
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    Vector logp(K);
    for (int k = 0; k < K; ++k) {
      double s = std::log(gmm.weights(k));
      for (int j = 0; j < gmm.dim(); ++j) {
        const double v = gmm.variances(k, j);
        const double diff = x(i, j) - gmm.means(k, j);
        s -= 0.5 * (kLog2Pi + std::log(v) + diff * diff / v);
      }
      logp(k) = s;
    }
    const double top = logp.maxCoeff();
    const double lse = top + std::log((logp.array() - top).exp().sum());
    resp.row(i) = (logp.array() - lse).exp().matrix().transpose();
    if (log_likelihood) (*log_likelihood)(i) = lse;
  }
  return resp;
}

}  // namespace reference

double mean_log_likelihood(const GmmModel& gmm, const Matrix& x) {
  Vector ll;
  responsibilities(gmm, x, &ll);
  return ll.mean();
}

GmmModel maximization_step(const GmmModel& previous, const Matrix& x, const Matrix& resp, double variance_floor) {
  const int K = previous.components();
  const int d = previous.dim();
  const Eigen::Index n = x.rows();
  GmmModel next = previous;
  Vector mass(K);

  // Each component sums over rows in a fixed order, so results do not depend
  // on the thread count.
#pragma omp parallel for schedule(static)
  for (int k = 0; k < K; ++k) {
    double nk = 0.0;
    Vector sum = Vector::Zero(d);
    for (Eigen::Index i = 0; i < n; ++i) {
      nk += resp(i, k);
      sum += resp(i, k) * x.row(i).transpose();
    }
    mass(k) = nk;
    if (nk <= std::numeric_limits<double>::min()) continue;  // keep the stale component
    const Vector mu = sum / nk;
    Vector var = Vector::Zero(d);
    for (Eigen::Index i = 0; i < n; ++i) {
      var += resp(i, k) * (x.row(i).transpose() - mu).cwiseAbs2();
    }
    var /= nk;
    next.means.row(k) = mu.transpose();
    next.variances.row(k) = var.cwiseMax(variance_floor).transpose();
  }
  const Vector floored = mass.cwiseMax(1e-10 * static_cast<double>(n));
  next.weights = floored / floored.sum();
  return next;
}

GmmFit fit_gmm(const Matrix& sample, int K, std::uint64_t seed, const GmmOptions& options) {
  if (K <= 0) throw DataError("GMM needs at least one component");
  if (sample.rows() < 10 * static_cast<Eigen::Index>(K)) {
    throw DataError("GMM sample must have at least 10 rows per component");
  }
  bool all_identical = true;
  for (Eigen::Index i = 1; i < sample.rows() && all_identical; ++i) {
    all_identical = sample.row(i) == sample.row(0);
  }
  if (all_identical) throw DataError("GMM sample is degenerate: all points identical");

  Rng rng(seed);
  GmmModel gmm;
  gmm.means = kmeanspp_centers(sample, K, rng);
  const Vector mean = sample.colwise().mean().transpose();
  const Vector global_var =
      ((sample.rowwise() - mean.transpose()).colwise().squaredNorm() / static_cast<double>(sample.rows()))
          .transpose()
          .cwiseMax(options.variance_floor);
  gmm.variances = global_var.transpose().replicate(K, 1);
  gmm.weights = Vector::Constant(K, 1.0 / K);

  GmmFit fit;
  Vector ll;
  Matrix resp = responsibilities(gmm, sample, &ll);
  fit.log_likelihood.push_back(ll.mean());
  for (int it = 0; it < options.max_iterations; ++it) {
    GmmModel next = maximization_step(gmm, sample, resp, options.variance_floor);
    Matrix next_resp = responsibilities(next, sample, &ll);
    const double prev = fit.log_likelihood.back();
    const double cur = ll.mean();
    fit.log_likelihood.push_back(cur);
    gmm = std::move(next);
    resp = std::move(next_resp);
    if (cur - prev < options.relative_tolerance * std::abs(prev)) {
      fit.converged = true;
      break;
    }
  }
  fit.model = std::move(gmm);
  return fit;
}

}  // namespace epitome
