#include <cmath>

#include "epitome/error.hpp"
#include "epitome/features.hpp"

namespace epitome {

namespace {

constexpr double kPi = 3.14159265358979323846;

void check_params(int side, const DescriptorParams& p) {
  if (p.grid <= 0 || p.patch <= 0 || p.cells <= 0 || p.bins <= 0) {
    throw DataError("descriptor parameters must be positive");
  }
  if (p.patch % p.cells != 0) throw DataError("patch size must be a multiple of the cell count");
  if (p.patch > side) throw DataError("patch larger than canvas");
}

int orientation_bin(double gx, double gy, int bins) {
  double theta = std::atan2(gy, gx);
  if (theta < 0.0) theta += kPi;
  if (theta >= kPi) theta -= kPi;
  const int b = static_cast<int>(theta / (kPi / bins));
  return b < bins ? b : bins - 1;
}

// Box sum of the 3x3 neighbourhood, zero outside the canvas.
int box_count(const Canvas& c, int x, int y) {
  int n = 0;
  for (int dy = -1; dy <= 1; ++dy) {
    for (int dx = -1; dx <= 1; ++dx) {
      if (c.contains(x + dx, y + dy)) n += c.at(x + dx, y + dy);
    }
  }
  return n;
}

void normalize_rows(Matrix& m) {
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    const double norm = m.row(i).norm();
    if (norm > 0.0) m.row(i) /= norm;
  }
}

DescriptorSet empty_set(const DescriptorParams& p) {
  DescriptorSet set;
  set.descriptors = Matrix::Zero(static_cast<Eigen::Index>(p.grid) * p.grid, p.dim());
  set.positions.reserve(static_cast<std::size_t>(p.grid) * p.grid);
  for (int r = 0; r < p.grid; ++r) {
    for (int c = 0; c < p.grid; ++c) set.positions.emplace_back(r, c);
  }
  return set;
}

}  // namespace

KeypointGrid KeypointGrid::for_canvas(int side, const DescriptorParams& params) {
  check_params(side, params);
  KeypointGrid g;
  g.stride = params.grid > 1 ? (side - params.patch) / (params.grid - 1) : 0;
  if (params.grid > 1 && g.stride < 1) throw DataError("keypoint grid too dense for canvas");
  g.margin = (side - (params.patch + (params.grid - 1) * g.stride)) / 2;
  return g;
}

Matrix DescriptorSet::nonempty() const {
  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = 0; i < descriptors.rows(); ++i) {
    if (descriptors.row(i).squaredNorm() > 0.0) keep.push_back(i);
  }
  Matrix out(static_cast<Eigen::Index>(keep.size()), descriptors.cols());
  for (std::size_t k = 0; k < keep.size(); ++k) out.row(static_cast<Eigen::Index>(k)) = descriptors.row(keep[k]);
  return out;
}

DescriptorSet extract_descriptors(const Canvas& canvas, const DescriptorParams& p) {
  if (canvas.width() != canvas.height()) throw DataError("descriptor extraction expects a square canvas");
  const int side = canvas.width();
  const KeypointGrid grid = KeypointGrid::for_canvas(side, p);
  DescriptorSet set = empty_set(p);
  if (canvas.blank()) return set;

  const std::size_t npix = static_cast<std::size_t>(side) * side;
  std::vector<double> smooth(npix);
  std::vector<double> magnitude(npix);
  std::vector<int> bin(npix);

#pragma omp parallel
  {
#pragma omp for schedule(static)
    for (int y = 0; y < side; ++y) {
      for (int x = 0; x < side; ++x) smooth[static_cast<std::size_t>(y) * side + x] = box_count(canvas, x, y) / 9.0;
    }
#pragma omp for schedule(static)
    for (int y = 0; y < side; ++y) {
      for (int x = 0; x < side; ++x) {
        const std::size_t i = static_cast<std::size_t>(y) * side + x;
        const double right = x + 1 < side ? smooth[i + 1] : 0.0;
        const double left = x > 0 ? smooth[i - 1] : 0.0;
        const double down = y + 1 < side ? smooth[i + side] : 0.0;
        const double up = y > 0 ? smooth[i - side] : 0.0;
        const double gx = 0.5 * (right - left);
        const double gy = 0.5 * (down - up);
        magnitude[i] = std::sqrt(gx * gx + gy * gy);
        bin[i] = orientation_bin(gx, gy, p.bins);
      }
    }

    const int cell = p.patch / p.cells;
#pragma omp for schedule(static)
    for (int k = 0; k < p.grid * p.grid; ++k) {
      const int x0 = grid.margin + (k % p.grid) * grid.stride;
      const int y0 = grid.margin + (k / p.grid) * grid.stride;
      auto row = set.descriptors.row(k);
      for (int dy = 0; dy < p.patch; ++dy) {
        const int cy = dy / cell;
        for (int dx = 0; dx < p.patch; ++dx) {
          const std::size_t i = static_cast<std::size_t>(y0 + dy) * side + (x0 + dx);
          if (magnitude[i] == 0.0) continue;
          row((cy * p.cells + dx / cell) * p.bins + bin[i]) += magnitude[i];
        }
      }
    }
  }
  normalize_rows(set.descriptors);
  return set;
}

namespace reference {

DescriptorSet extract_descriptors(const Canvas& canvas, const DescriptorParams& p) {
  if (canvas.width() != canvas.height()) throw DataError("descriptor extraction expects a square canvas");
  const int side = canvas.width();
  const KeypointGrid grid = KeypointGrid::for_canvas(side, p);
  DescriptorSet set = empty_set(p);

  auto smooth = [&](int x, int y) { return canvas.contains(x, y) ? box_count(canvas, x, y) / 9.0 : 0.0; };
  const int cell = p.patch / p.cells;
  for (int r = 0; r < p.grid; ++r) {
    for (int c = 0; c < p.grid; ++c) {
      const int x0 = grid.margin + c * grid.stride;
      const int y0 = grid.margin + r * grid.stride;
      auto row = set.descriptors.row(r * p.grid + c);
      for (int y = y0; y < y0 + p.patch; ++y) {
        for (int x = x0; x < x0 + p.patch; ++x) {
          const double gx = 0.5 * (smooth(x + 1, y) - smooth(x - 1, y));
          const double gy = 0.5 * (smooth(x, y + 1) - smooth(x, y - 1));
          const double mag = std::sqrt(gx * gx + gy * gy);
          if (mag == 0.0) continue;
          const int cx = (x - x0) / cell;
          const int cy = (y - y0) / cell;
          row((cy * p.cells + cx) * p.bins + orientation_bin(gx, gy, p.bins)) += mag;
        }
      }
    }
  }
  normalize_rows(set.descriptors);
  return set;
}

}  // namespace reference

}  // namespace epitome
