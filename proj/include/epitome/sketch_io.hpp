#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace epitome {

/// Canvas-unit coordinate; origin top-left, y grows downward.
struct Point {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point&, const Point&) = default;
};

struct Stroke {
  std::vector<Point> points;

  friend bool operator==(const Stroke&, const Stroke&) = default;
};

struct Extent {
  double width = 0.0;
  double height = 0.0;

  friend bool operator==(const Extent&, const Extent&) = default;
};

/// A category label plus strokes in the order they were drawn.
struct Sketch {
  std::string id;
  std::string category;
  Extent extent;
  std::vector<Stroke> strokes;

  std::size_t stroke_count() const { return strokes.size(); }

  friend bool operator==(const Sketch&, const Sketch&) = default;
};

struct Dataset {
  std::vector<Sketch> sketches;
  std::vector<std::string> categories;  // sorted, unique

  /// Builds a dataset whose category list is derived from the sketches.
  static Dataset from_sketches(std::vector<Sketch> sketches);
};

/// Throws ParseError if the sketch violates any structural invariant.
void validate_sketch(const Sketch& sketch);

/// Parses the canonical JSON form:
///   {"id": "...", "category": "...", "extent": [w, h], "strokes": [[[x,y],...],...]}
/// The outer strokes array is temporal order.
Sketch parse_sketch(std::string_view text);

/// Serializes to the canonical JSON form. Numbers round-trip exactly.
std::string serialize_sketch(const Sketch& sketch);

/// Number of parameter samples taken per cubic Bezier segment (t = k/16, k = 1..16).
inline constexpr int kCubicSamples = 16;

/// Imports an SVG whose `path` elements use only M/m, L/l and C/c commands.
/// Each path becomes one stroke, in document order. Cubic segments are
/// flattened at kCubicSamples uniform parameter values. Flattened points
/// are clamped into the declared width/height.
Sketch import_svg(std::string_view text, std::string category, std::string id = {});

Sketch load_sketch_file(const std::filesystem::path& path, const std::string& category);

/// Loads `root/<category>/<id>.json|.svg`. Files are read in sorted path
/// order, so the result is independent of directory iteration order.
Dataset load_dataset(const std::filesystem::path& root);

void save_sketch_file(const Sketch& sketch, const std::filesystem::path& path);

/// Writes each sketch to `root/<category>/<id>.json`.
void save_dataset(const Dataset& dataset, const std::filesystem::path& root);

struct DatasetSplit {
  Dataset train;
  Dataset test;
};

/// Per-category deterministic shuffle keyed by (seed, category name); the
/// first round_half_up(train_fraction * count) shuffled items train, the
/// rest test. The train count is clamped to [1, count - 1]. Both halves keep
/// the input's relative order.
DatasetSplit split_dataset(const Dataset& dataset, double train_fraction, std::uint64_t seed);

}  // namespace epitome
