#pragma once

// Independent reference computations used as test oracles. Nothing here
// calls into the library's own implementations of the same quantity.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <set>
#include <utility>
#include <vector>

#include "epitome/features.hpp"
#include "epitome/raster.hpp"
#include "epitome/random.hpp"

namespace oracle {

using PixelSet = std::set<std::pair<int, int>>;

/// Classic octant-folding Bresenham.
inline PixelSet bresenham(int x0, int y0, int x1, int y1) {
  PixelSet out;
  const bool steep = std::abs(y1 - y0) > std::abs(x1 - x0);
  if (steep) {
    std::swap(x0, y0);
    std::swap(x1, y1);
  }
  if (x0 > x1) {
    std::swap(x0, x1);
    std::swap(y0, y1);
  }
  const int dx = x1 - x0;
  const int dy = std::abs(y1 - y0);
  const int ystep = y0 < y1 ? 1 : -1;
  int err = dx / 2;
  int y = y0;
  for (int x = x0; x <= x1; ++x) {
    out.insert(steep ? std::pair{y, x} : std::pair{x, y});
    err -= dy;
    if (err < 0) {
      y += ystep;
      err += dx;
    }
  }
  return out;
}

inline PixelSet ink(const epitome::Canvas& c) {
  PixelSet out;
  for (int y = 0; y < c.height(); ++y) {
    for (int x = 0; x < c.width(); ++x) {
      if (c.at(x, y)) out.insert({x, y});
    }
  }
  return out;
}

/// Double-loop 5x5 neighbourhood dilation.
inline epitome::Canvas dilate(const epitome::Canvas& c) {
  epitome::Canvas out(c.width(), c.height());
  for (int y = 0; y < c.height(); ++y) {
    for (int x = 0; x < c.width(); ++x) {
      std::uint8_t v = 0;
      for (int dy = -2; dy <= 2 && !v; ++dy) {
        for (int dx = -2; dx <= 2 && !v; ++dx) {
          if (c.contains(x + dx, y + dy) && c.at(x + dx, y + dy)) v = 1;
        }
      }
      out.set(x, y, v);
    }
  }
  return out;
}

/// Pure translation with zero fill.
inline epitome::Canvas shift(const epitome::Canvas& c, int dx, int dy) {
  epitome::Canvas out(c.width(), c.height());
  for (int y = 0; y < c.height(); ++y) {
    for (int x = 0; x < c.width(); ++x) {
      if (c.at(x, y) && out.contains(x + dx, y + dy)) out.set(x + dx, y + dy);
    }
  }
  return out;
}

inline epitome::Canvas random_canvas(epitome::Rng& rng, int side, double density) {
  epitome::Canvas c(side, side);
  for (int y = 0; y < side; ++y) {
    for (int x = 0; x < side; ++x) {
      if (rng.uniform() < density) c.set(x, y);
    }
  }
  return c;
}

/// Cyclic Jacobi eigenvalues of a symmetric matrix, sorted descending.
inline std::vector<double> jacobi_eigenvalues(Eigen::MatrixXd a, double tol = 1e-14, int max_sweeps = 100) {
  const Eigen::Index n = a.rows();
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    double off = 0.0;
    for (Eigen::Index p = 0; p < n; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
    }
    if (off < tol * tol) break;
    for (Eigen::Index p = 0; p < n; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        if (std::abs(a(p, q)) < 1e-300) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (Eigen::Index k = 0; k < n; ++k) {
          const double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
      }
    }
  }
  std::vector<double> ev(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) ev[static_cast<std::size_t>(i)] = a(i, i);
  std::sort(ev.rbegin(), ev.rend());
  return ev;
}

/// Sample covariance with n - 1 normalisation, formed explicitly.
inline Eigen::MatrixXd covariance(const epitome::Matrix& x) {
  const Eigen::Index n = x.rows(), d = x.cols();
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(d);
  for (Eigen::Index i = 0; i < n; ++i) mean += x.row(i).transpose();
  mean /= static_cast<double>(n);
  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(d, d);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index a = 0; a < d; ++a) {
      for (Eigen::Index b = 0; b < d; ++b) cov(a, b) += (x(i, a) - mean(a)) * (x(i, b) - mean(b));
    }
  }
  return cov / static_cast<double>(n - 1);
}

/// Mean per-row log-likelihood under a diagonal GMM parameterised by
/// standard deviations.
inline double gmm_mean_log_likelihood(const epitome::Matrix& x, const Eigen::VectorXd& w, const Eigen::MatrixXd& mu,
                                      const Eigen::MatrixXd& sigma) {
  const double log2pi = std::log(2.0 * 3.14159265358979323846);
  double total = 0.0;
  for (Eigen::Index t = 0; t < x.rows(); ++t) {
    std::vector<double> lp(static_cast<std::size_t>(w.size()));
    for (Eigen::Index k = 0; k < w.size(); ++k) {
      double s = std::log(w(k));
      for (Eigen::Index j = 0; j < x.cols(); ++j) {
        const double z = (x(t, j) - mu(k, j)) / sigma(k, j);
        s += -0.5 * (log2pi + z * z) - std::log(sigma(k, j));
      }
      lp[static_cast<std::size_t>(k)] = s;
    }
    const double m = *std::max_element(lp.begin(), lp.end());
    double acc = 0.0;
    for (double v : lp) acc += std::exp(v - m);
    total += m + std::log(acc);
  }
  return total / static_cast<double>(x.rows());
}

/// Fisher blocks from central finite differences of the mean log-likelihood,
/// scaled by the diagonal Fisher information factors sigma/sqrt(w) (means)
/// and sigma/sqrt(2w) (standard deviations).
inline Eigen::VectorXd fisher_by_finite_differences(const epitome::Matrix& x, const epitome::GmmModel& g,
                                                    double h = 1e-5) {
  const Eigen::Index K = g.weights.size(), d = g.means.cols();
  const Eigen::VectorXd w = g.weights;
  const Eigen::MatrixXd mu = g.means;
  const Eigen::MatrixXd sigma = g.variances.array().sqrt().matrix();
  Eigen::VectorXd out(2 * K * d);
  for (Eigen::Index k = 0; k < K; ++k) {
    for (Eigen::Index j = 0; j < d; ++j) {
      Eigen::MatrixXd mp = mu, mm = mu;
      mp(k, j) += h;
      mm(k, j) -= h;
      const double dmu =
          (gmm_mean_log_likelihood(x, w, mp, sigma) - gmm_mean_log_likelihood(x, w, mm, sigma)) / (2.0 * h);
      out(k * d + j) = dmu * sigma(k, j) / std::sqrt(w(k));

      Eigen::MatrixXd sp = sigma, sm = sigma;
      sp(k, j) += h;
      sm(k, j) -= h;
      const double dsig =
          (gmm_mean_log_likelihood(x, w, mu, sp) - gmm_mean_log_likelihood(x, w, mu, sm)) / (2.0 * h);
      out(K * d + k * d + j) = dsig * sigma(k, j) / std::sqrt(2.0 * w(k));
    }
  }
  return out;
}

struct QpSolution {
  Eigen::VectorXd alpha;
  double bias = 0.0;
  double objective = std::numeric_limits<double>::infinity();
};

/// Exact SVM dual by enumerating every active set (alpha_i at 0, at C, or
/// free) and solving the KKT system of the free variables. Small n only.
inline QpSolution svm_dual_exhaustive(const Eigen::MatrixXd& kernel, const std::vector<double>& y, double C) {
  const int n = static_cast<int>(y.size());
  Eigen::MatrixXd Q(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) Q(i, j) = y[i] * y[j] * kernel(i, j);
  }
  QpSolution best;
  int states = 1;
  for (int i = 0; i < n; ++i) states *= 3;
  for (int code = 0; code < states; ++code) {
    std::vector<int> state(n);
    std::vector<int> free;
    for (int i = 0, c = code; i < n; ++i, c /= 3) {
      state[i] = c % 3;  // 0: at zero, 1: at C, 2: free
      if (state[i] == 2) free.push_back(i);
    }
    Eigen::VectorXd alpha = Eigen::VectorXd::Zero(n);
    for (int i = 0; i < n; ++i) {
      if (state[i] == 1) alpha(i) = C;
    }
    double bias = 0.0;
    if (!free.empty()) {
      const int m = static_cast<int>(free.size());
      Eigen::MatrixXd A = Eigen::MatrixXd::Zero(m + 1, m + 1);
      Eigen::VectorXd rhs(m + 1);
      for (int a = 0; a < m; ++a) {
        double fixed = 0.0;
        for (int j = 0; j < n; ++j) {
          if (state[j] == 1) fixed += Q(free[a], j) * C;
        }
        for (int b = 0; b < m; ++b) A(a, b) = Q(free[a], free[b]);
        A(a, m) = y[free[a]];
        A(m, a) = y[free[a]];
        rhs(a) = 1.0 - fixed;
      }
      double ysum = 0.0;
      for (int j = 0; j < n; ++j) {
        if (state[j] == 1) ysum += y[j] * C;
      }
      rhs(m) = -ysum;
      const Eigen::FullPivLU<Eigen::MatrixXd> lu(A);
      if (!lu.isInvertible()) continue;
      const Eigen::VectorXd sol = lu.solve(rhs);
      bool ok = true;
      for (int a = 0; a < m; ++a) {
        if (sol(a) < -1e-12 || sol(a) > C + 1e-12) ok = false;
        alpha(free[a]) = sol(a);
      }
      if (!ok) continue;
      bias = sol(m);  // Lagrange multiplier of the equality: f(x) = sum a_j y_j K + b
    } else {
      double ysum = 0.0;
      for (int j = 0; j < n; ++j) ysum += y[j] * alpha(j);
      if (std::abs(ysum) > 1e-12) continue;
    }
    const double obj = 0.5 * alpha.dot(Q * alpha) - alpha.sum();
    if (obj < best.objective - 1e-12) {
      best.alpha = alpha;
      best.bias = bias;
      best.objective = obj;
    }
  }
  return best;
}

/// Cubic Bezier evaluated in Bernstein form.
inline std::pair<double, double> bezier(double t, std::pair<double, double> p0, std::pair<double, double> p1,
                                        std::pair<double, double> p2, std::pair<double, double> p3) {
  const double u = 1.0 - t;
  const double b0 = u * u * u, b1 = 3 * u * u * t, b2 = 3 * u * t * t, b3 = t * t * t;
  return {b0 * p0.first + b1 * p1.first + b2 * p2.first + b3 * p3.first,
          b0 * p0.second + b1 * p1.second + b2 * p2.second + b3 * p3.second};
}

/// Sort-based median.
inline double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

/// Sample standard deviation over sqrt(n), two-pass.
inline double standard_error(const std::vector<double>& v) {
  const std::size_t n = v.size();
  if (n < 2) return 0.0;
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(n);
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(n - 1)) / std::sqrt(static_cast<double>(n));
}

/// 1 + (1-based position of the last zero), or 1 when there is none.
inline std::size_t last_zero_index(const std::vector<std::uint8_t>& bits) {
  std::size_t e = 1;
  for (std::size_t i = 0; i < bits.size(); ++i) {
    if (bits[i] == 0) e = i + 2;
  }
  return e;
}

}  // namespace oracle
