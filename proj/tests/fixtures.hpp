#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "epitome/random.hpp"
#include "epitome/sketch_io.hpp"

namespace fixture {

namespace fs = std::filesystem;

class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    epitome::Rng rng(epitome::fnv1a64(tag) ^ static_cast<std::uint64_t>(reinterpret_cast<std::uintptr_t>(this)));
    path_ = fs::temp_directory_path() / ("epitome_" + tag + "_" + std::to_string(rng.next() % 1000000000));
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const fs::path& path() const { return path_; }
  fs::path operator/(const std::string& rel) const { return path_ / rel; }

 private:
  fs::path path_;
};

inline void write_file(const fs::path& path, const std::string& text) {
  fs::create_directories(path.parent_path());
  std::ofstream(path, std::ios::binary) << text;
}

inline std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline epitome::Stroke line(double x0, double y0, double x1, double y1) { return {{{x0, y0}, {x1, y1}}}; }

/// A sketch of `n` horizontal strokes stacked top to bottom.
inline epitome::Sketch striped(const std::string& id, const std::string& category, std::size_t n,
                               double extent = 100.0) {
  epitome::Sketch s;
  s.id = id;
  s.category = category;
  s.extent = {extent, extent};
  for (std::size_t i = 0; i < n; ++i) {
    const double y = extent * (static_cast<double>(i) + 1.0) / (static_cast<double>(n) + 1.0);
    s.strokes.push_back(line(extent * 0.1, y, extent * 0.9, y));
  }
  return s;
}

/// Random polyline sketch inside a w x h extent.
inline epitome::Sketch random_sketch(epitome::Rng& rng, const std::string& id, const std::string& category,
                                     std::size_t strokes, double w = 500.0, double h = 400.0) {
  epitome::Sketch s;
  s.id = id;
  s.category = category;
  s.extent = {w, h};
  for (std::size_t i = 0; i < strokes; ++i) {
    epitome::Stroke st;
    const std::size_t pts = 2 + rng.below(6);
    for (std::size_t k = 0; k < pts; ++k) st.points.push_back({rng.uniform(0.0, w), rng.uniform(0.0, h)});
    s.strokes.push_back(std::move(st));
  }
  return s;
}

}  // namespace fixture
