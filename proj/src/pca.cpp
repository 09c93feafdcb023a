#include <Eigen/Eigenvalues>

#include "epitome/error.hpp"
#include "epitome/features.hpp"

namespace epitome {

Matrix PcaModel::project(const Matrix& rows) const {
  if (rows.cols() != basis.cols()) throw DataError("PCA input dimension mismatch");
  return (rows.rowwise() - mean.transpose()) * basis.transpose();
}

PcaModel fit_pca(const Matrix& sample, int d) {
  const Eigen::Index n = sample.rows();
  const Eigen::Index dim = sample.cols();
  if (d <= 0 || d > dim) throw DataError("PCA target dimension must lie in [1, input dimension]");
  if (n <= d) throw DataError("PCA sample must have more rows than the target dimension");

  PcaModel pca;
  pca.mean = sample.colwise().mean().transpose();
  const Matrix centered = sample.rowwise() - pca.mean.transpose();
  const Eigen::MatrixXd cov = (centered.transpose() * centered) / static_cast<double>(n - 1);

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
  if (solver.info() != Eigen::Success) throw InvariantError("PCA eigendecomposition failed");

  // Eigenvalues come back ascending.
  pca.basis.resize(d, dim);
  pca.eigenvalues.resize(d);
  for (int k = 0; k < d; ++k) {
    const Eigen::Index col = dim - 1 - k;
    Vector v = solver.eigenvectors().col(col);
    for (Eigen::Index j = 0; j < dim; ++j) {
      if (std::abs(v(j)) > 1e-12) {
        if (v(j) < 0.0) v = -v;
        break;
      }
    }
    pca.basis.row(k) = v.transpose();
    pca.eigenvalues(k) = std::max(0.0, solver.eigenvalues()(col));
  }
  return pca;
}

}  // namespace epitome
