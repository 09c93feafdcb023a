#include <cmath>

#include "epitome/error.hpp"
#include "epitome/features.hpp"

namespace epitome {

Vector fisher_gradients(const Matrix& projected, const GmmModel& gmm) {
  const int K = gmm.components();
  const int d = gmm.dim();
  Vector out = Vector::Zero(2 * static_cast<Eigen::Index>(K) * d);
  const Eigen::Index T = projected.rows();
  if (T == 0) return out;
  if (projected.cols() != d) throw DataError("Fisher encoding dimension mismatch");

  const Matrix resp = responsibilities(gmm, projected);
#pragma omp parallel for schedule(static)
  for (int k = 0; k < K; ++k) {
    const Vector mu = gmm.means.row(k).transpose();
    const Vector sigma = gmm.variances.row(k).transpose().cwiseSqrt();
    Vector g_mean = Vector::Zero(d);
    Vector g_sigma = Vector::Zero(d);
    for (Eigen::Index t = 0; t < T; ++t) {
      const double g = resp(t, k);
      if (g == 0.0) continue;
      const Vector z = (projected.row(t).transpose() - mu).cwiseQuotient(sigma);
      g_mean += g * z;
      g_sigma += g * (z.cwiseAbs2().array() - 1.0).matrix();
    }
    const double w = gmm.weights(k);
    out.segment(static_cast<Eigen::Index>(k) * d, d) = g_mean / (static_cast<double>(T) * std::sqrt(w));
    out.segment((static_cast<Eigen::Index>(K) + k) * d, d) = g_sigma / (static_cast<double>(T) * std::sqrt(2.0 * w));
  }
  return out;
}

namespace reference {

Vector fisher_gradients(const Matrix& projected, const GmmModel& gmm) {
  const int K = gmm.components();
  const int d = gmm.dim();
  Vector out = Vector::Zero(2 * static_cast<Eigen::Index>(K) * d);
  const Eigen::Index T = projected.rows();
  if (T == 0) return out;
  if (projected.cols() != d) throw DataError("Fisher encoding dimension mismatch");

  const Matrix resp = reference::responsibilities(gmm, projected);
  for (Eigen::Index t = 0; t < T; ++t) {
    for (int k = 0; k < K; ++k) {
      for (int j = 0; j < d; ++j) {
        const double sigma = std::sqrt(gmm.variances(k, j));
        const double z = (projected(t, j) - gmm.means(k, j)) / sigma;
        out(k * d + j) += resp(t, k) * z;
        out((K + k) * d + j) += resp(t, k) * (z * z - 1.0);
      }
    }
  }
  for (int k = 0; k < K; ++k) {
    const double w = gmm.weights(k);
    out.segment(static_cast<Eigen::Index>(k) * d, d) /= static_cast<double>(T) * std::sqrt(w);
    out.segment((static_cast<Eigen::Index>(K) + k) * d, d) /= static_cast<double>(T) * std::sqrt(2.0 * w);
  }
  return out;
}

}  // namespace reference

void power_l2_normalize(Vector& v) {
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    v(i) = v(i) < 0.0 ? -std::sqrt(-v(i)) : std::sqrt(v(i));
  }
  const double norm = v.norm();
  if (norm > 0.0) v /= norm;
}

FeatureVector fisher_encode(const DescriptorSet& descriptors, const PcaModel& pca, const GmmModel& gmm) {
  if (pca.output_dim() != gmm.dim()) throw DataError("PCA output dimension does not match GMM dimension");
  if (descriptors.descriptors.cols() != pca.input_dim() && descriptors.size() > 0) {
    throw DataError("descriptor dimension does not match PCA input dimension");
  }
  const Matrix kept = descriptors.nonempty();
  FeatureVector fv;
  if (kept.rows() == 0) {
    fv.values = Vector::Zero(2 * static_cast<Eigen::Index>(gmm.components()) * gmm.dim());
    return fv;
  }
  fv.values = fisher_gradients(pca.project(kept), gmm);
  power_l2_normalize(fv.values);
  return fv;
}

}  // namespace epitome
