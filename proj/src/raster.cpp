#include "epitome/raster.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "epitome/error.hpp"

namespace epitome {

Canvas::Canvas(int width, int height) : width_(width), height_(height) {
  if (width <= 0 || height <= 0) throw DataError("canvas dimensions must be positive");
  pixels_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), 0);
}

std::size_t Canvas::ink_count() const {
  return static_cast<std::size_t>(std::count(pixels_.begin(), pixels_.end(), std::uint8_t{1}));
}

bool Canvas::subset_of(const Canvas& other) const {
  if (width_ != other.width_ || height_ != other.height_) return false;
  for (std::size_t i = 0; i < pixels_.size(); ++i) {
    if (pixels_[i] && !other.pixels_[i]) return false;
  }
  return true;
}

CanvasMapping::CanvasMapping(const Extent& extent, int side) {
  if (side <= 0) throw DataError("raster side must be positive");
  const double span = static_cast<double>(side - 1);
  scale_ = span / std::max(extent.width, extent.height);
  offset_x_ = 0.5 * (span - extent.width * scale_);
  offset_y_ = 0.5 * (span - extent.height * scale_);
}

int CanvasMapping::px(double x) const { return static_cast<int>(std::floor(x * scale_ + offset_x_ + 0.5)); }
int CanvasMapping::py(double y) const { return static_cast<int>(std::floor(y * scale_ + offset_y_ + 0.5)); }

void draw_line(Canvas& canvas, int x0, int y0, int x1, int y1) {
  const int dx = std::abs(x1 - x0);
  const int dy = -std::abs(y1 - y0);
  const int sx = x0 < x1 ? 1 : -1;
  const int sy = y0 < y1 ? 1 : -1;
  int err = dx + dy;
  while (true) {
    if (canvas.contains(x0, y0)) canvas.set(x0, y0);
    if (x0 == x1 && y0 == y1) break;
    const int e2 = 2 * err;
    if (e2 >= dy) {
      err += dy;
      x0 += sx;
    }
    if (e2 <= dx) {
      err += dx;
      y0 += sy;
    }
  }
}

void draw_stroke(Canvas& canvas, const CanvasMapping& mapping, const Stroke& stroke) {
  if (stroke.points.empty()) return;
  int prev_x = mapping.px(stroke.points.front().x);
  int prev_y = mapping.py(stroke.points.front().y);
  if (canvas.contains(prev_x, prev_y)) canvas.set(prev_x, prev_y);
  for (std::size_t i = 1; i < stroke.points.size(); ++i) {
    const int x = mapping.px(stroke.points[i].x);
    const int y = mapping.py(stroke.points[i].y);
    if (x == prev_x && y == prev_y) continue;
    draw_line(canvas, prev_x, prev_y, x, y);
    prev_x = x;
    prev_y = y;
  }
}

Canvas rasterize(const Sketch& sketch, std::size_t prefix_len, int side) {
  if (prefix_len > sketch.stroke_count()) {
    throw DataError("prefix length " + std::to_string(prefix_len) + " exceeds stroke count " +
                    std::to_string(sketch.stroke_count()));
  }
  Canvas canvas(side, side);
  const CanvasMapping mapping(sketch.extent, side);
  for (std::size_t i = 0; i < prefix_len; ++i) draw_stroke(canvas, mapping, sketch.strokes[i]);
  return canvas;
}

Canvas dilate(const Canvas& canvas) {
  const int w = canvas.width();
  const int h = canvas.height();
  const int r = kDilationRadius;
  Canvas rows(w, h);
  Canvas out(w, h);
  const auto src = canvas.pixels();
  auto tmp = rows.pixels();
  auto dst = out.pixels();

#pragma omp parallel
  {
#pragma omp for schedule(static)
    for (int y = 0; y < h; ++y) {
      const std::uint8_t* in = src.data() + static_cast<std::size_t>(y) * w;
      std::uint8_t* o = tmp.data() + static_cast<std::size_t>(y) * w;
      for (int x = 0; x < w; ++x) {
        if (!in[x]) continue;
        const int lo = std::max(0, x - r);
        const int hi = std::min(w - 1, x + r);
        for (int k = lo; k <= hi; ++k) o[k] = 1;
      }
    }
#pragma omp for schedule(static)
    for (int y = 0; y < h; ++y) {
      std::uint8_t* o = dst.data() + static_cast<std::size_t>(y) * w;
      const int lo = std::max(0, y - r);
      const int hi = std::min(h - 1, y + r);
      for (int yy = lo; yy <= hi; ++yy) {
        const std::uint8_t* t = tmp.data() + static_cast<std::size_t>(yy) * w;
        for (int x = 0; x < w; ++x) o[x] |= t[x];
      }
    }
  }
  return out;
}

namespace reference {

Canvas dilate(const Canvas& canvas) {
  const int r = kDilationRadius;
  Canvas out(canvas.width(), canvas.height());
  for (int y = 0; y < canvas.height(); ++y) {
    for (int x = 0; x < canvas.width(); ++x) {
      bool hit = false;
      for (int dy = -r; dy <= r && !hit; ++dy) {
        for (int dx = -r; dx <= r && !hit; ++dx) {
          hit = canvas.contains(x + dx, y + dy) && canvas.at(x + dx, y + dy);
        }
      }
      if (hit) out.set(x, y);
    }
  }
  return out;
}

}  // namespace reference

namespace {

int nearest(double v) { return static_cast<int>(std::floor(v + 0.5)); }

template <typename SourceOf>
Canvas resample(const Canvas& canvas, SourceOf source_of) {
  Canvas out(canvas.width(), canvas.height());
#pragma omp parallel for schedule(static)
  for (int y = 0; y < canvas.height(); ++y) {
    for (int x = 0; x < canvas.width(); ++x) {
      const auto [sx, sy] = source_of(x, y);
      if (canvas.contains(sx, sy) && canvas.at(sx, sy)) out.set(x, y);
    }
  }
  return out;
}

}  // namespace

Canvas apply_transform(const Canvas& canvas, const Transform& t) {
  const double cx = 0.5 * (canvas.width() - 1);
  const double cy = 0.5 * (canvas.height() - 1);
  switch (t.kind) {
    case TransformKind::kIdentity:
      return canvas;
    case TransformKind::kMirror: {
      const int w = canvas.width();
      return resample(canvas, [w](int x, int y) { return std::pair{w - 1 - x, y}; });
    }
    case TransformKind::kShift:
      return resample(canvas, [&t](int x, int y) { return std::pair{x - t.shift_x, y - t.shift_y}; });
    case TransformKind::kRotate: {
      const double theta = t.rotate_degrees * 3.14159265358979323846 / 180.0;
      const double c = std::cos(theta);
      const double s = std::sin(theta);
      return resample(canvas, [=](int x, int y) {
        const double u = x - cx;
        const double v = y - cy;
        return std::pair{nearest(cx + c * u - s * v), nearest(cy + s * u + c * v)};
      });
    }
    case TransformKind::kZoom: {
      const double f = 1.0 + t.zoom_percent / 100.0;
      if (f <= 0.0) throw DataError("zoom factor must be positive");
      return resample(canvas, [=](int x, int y) {
        return std::pair{nearest(cx + (x - cx) / f), nearest(cy + (y - cy) / f)};
      });
    }
  }
  throw InvariantError("unknown transform kind");
}

void write_pgm(const Canvas& canvas, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path);
  out << to_pgm(canvas);
  if (!out) throw DataError("cannot write " + path);
}

std::string to_pgm(const Canvas& canvas) {
  std::string out = "P5\n" + std::to_string(canvas.width()) + " " + std::to_string(canvas.height()) + "\n255\n";
  out.reserve(out.size() + canvas.pixels().size());
  for (std::uint8_t p : canvas.pixels()) out.push_back(static_cast<char>(p ? 0 : 255));
  return out;
}

}  // namespace epitome
