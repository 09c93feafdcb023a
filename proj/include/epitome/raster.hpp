#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "epitome/sketch_io.hpp"

namespace epitome {

/// Binary raster, row-major, 1 = ink.
class Canvas {
 public:
  Canvas() = default;
  Canvas(int width, int height);

  int width() const { return width_; }
  int height() const { return height_; }

  std::uint8_t at(int x, int y) const { return pixels_[index(x, y)]; }
  void set(int x, int y, std::uint8_t v = 1) { pixels_[index(x, y)] = v; }

  bool contains(int x, int y) const { return x >= 0 && y >= 0 && x < width_ && y < height_; }

  std::span<const std::uint8_t> pixels() const { return pixels_; }
  std::span<std::uint8_t> pixels() { return pixels_; }

  std::size_t ink_count() const;
  bool blank() const { return ink_count() == 0; }

  /// Every ink pixel of this canvas is also ink in `other` (same size).
  bool subset_of(const Canvas& other) const;

  friend bool operator==(const Canvas&, const Canvas&) = default;

 private:
  std::size_t index(int x, int y) const {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(x);
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> pixels_;
};

inline constexpr int kDefaultRasterSide = 256;
inline constexpr int kDilationRadius = 2;  // 5x5 square structuring element

/// Maps source coordinates onto a side x side canvas: uniform scale
/// (side - 1) / max(width, height), centered, rounded to the nearest pixel.
class CanvasMapping {
 public:
  CanvasMapping(const Extent& extent, int side);

  int px(double x) const;
  int py(double y) const;

 private:
  double scale_;
  double offset_x_;
  double offset_y_;
};

/// Draws a 1-pixel integer line (Bresenham), clipped to the canvas.
void draw_line(Canvas& canvas, int x0, int y0, int x1, int y1);

/// Draws one stroke; consecutive points mapping to the same pixel collapse.
void draw_stroke(Canvas& canvas, const CanvasMapping& mapping, const Stroke& stroke);

/// Renders strokes [0, prefix_len) onto a blank side x side canvas.
Canvas rasterize(const Sketch& sketch, std::size_t prefix_len, int side = kDefaultRasterSide);

/// Binary dilation with the 5x5 square structuring element, clipped at edges.
/// Separable row/column pass, parallel over rows.
Canvas dilate(const Canvas& canvas);

namespace reference {
/// Direct 25-neighbourhood scan. Serial; kept for testing and benchmarks.
Canvas dilate(const Canvas& canvas);
}  // namespace reference

enum class TransformKind { kIdentity, kMirror, kRotate, kShift, kZoom };

struct Transform {
  TransformKind kind = TransformKind::kIdentity;
  double rotate_degrees = 0.0;  // counter-clockwise as displayed
  int shift_x = 0;
  int shift_y = 0;
  double zoom_percent = 0.0;  // scale factor is 1 + zoom_percent / 100

  static Transform identity() { return {}; }
  static Transform mirror() { return {TransformKind::kMirror}; }
  static Transform rotate(double degrees) { return {TransformKind::kRotate, degrees}; }
  static Transform shift(int dx, int dy) { return {TransformKind::kShift, 0.0, dx, dy}; }
  static Transform zoom(double percent) { return {TransformKind::kZoom, 0.0, 0, 0, percent}; }

  std::string describe() const;

  friend bool operator==(const Transform&, const Transform&) = default;
};

/// Mirror reverses columns; shift translates with zero fill; rotate and zoom
/// resample about the canvas centre with nearest-neighbour lookup.
Canvas apply_transform(const Canvas& canvas, const Transform& t);

inline constexpr std::size_t kBatterySize = 30;

/// identity, mirror, rotations {-15,-5,+5,+15} deg, the 16 shifts
/// {-15,-5,+5,+15}^2 px, axis shifts (+-5,0) and (0,+-5), zooms {-7,-3,+3,+7} %.
const std::vector<Transform>& default_battery();

std::string battery_to_json(const std::vector<Transform>& battery);
/// Throws DataError unless the manifest lists exactly kBatterySize transforms.
std::vector<Transform> battery_from_json(std::string_view text);

/// Applies each battery transform to an already dilated canvas.
std::vector<Canvas> augment(const Canvas& dilated, const std::vector<Transform>& battery = default_battery());

/// Binary PGM (P5, maxval 255): ink black (0) on white (255).
std::string to_pgm(const Canvas& canvas);
void write_pgm(const Canvas& canvas, const std::string& path);

}  // namespace epitome
