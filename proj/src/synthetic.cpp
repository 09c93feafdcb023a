#include "epitome/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "epitome/random.hpp"

namespace epitome {

namespace {

constexpr double kExtent = 800.0;
constexpr double kPi = 3.14159265358979323846;

struct Placement {
  double cx, cy, scale, angle;
};

class Drawer {
 public:
  Drawer(Rng& rng, const Placement& pl, double jitter) : rng_(rng), pl_(pl), jitter_(jitter) {}

  // Local coordinates are in [-1, 1]^2 around the sketch centre.
  Point place(double u, double v) {
    const double c = std::cos(pl_.angle), s = std::sin(pl_.angle);
    const double x = pl_.cx + pl_.scale * (c * u - s * v) + jitter_ * rng_.normal();
    const double y = pl_.cy + pl_.scale * (s * u + c * v) + jitter_ * rng_.normal();
    return {std::clamp(x, 0.0, kExtent), std::clamp(y, 0.0, kExtent)};
  }

  // Densely sampled polyline through the given local vertices.
  Stroke polyline(const std::vector<std::pair<double, double>>& verts) {
    Stroke s;
    for (std::size_t i = 0; i + 1 < verts.size(); ++i) {
      const auto [u0, v0] = verts[i];
      const auto [u1, v1] = verts[i + 1];
      const double len = std::hypot(u1 - u0, v1 - v0) * pl_.scale;
      const int steps = std::max(2, static_cast<int>(len / 20.0));
      for (int k = (i == 0 ? 0 : 1); k <= steps; ++k) {
        const double t = static_cast<double>(k) / steps;
        s.points.push_back(place(u0 + t * (u1 - u0), v0 + t * (v1 - v0)));
      }
    }
    return s;
  }

 private:
  Rng& rng_;
  Placement pl_;
  double jitter_;
};

std::vector<Stroke> circle(Drawer& d, Rng& rng) {
  std::vector<Stroke> strokes;
  const double r = rng.uniform(0.8, 0.95);
  const double start = rng.uniform(0.0, 2 * kPi);
  std::vector<std::pair<double, double>> ring;
  for (int k = 0; k <= 48; ++k) {
    const double a = start + 2 * kPi * k / 48.0;
    ring.emplace_back(r * std::cos(a), r * std::sin(a));
  }
  strokes.push_back(d.polyline(ring));
  const int ticks = 2 + static_cast<int>(rng.below(2));
  for (int t = 0; t < ticks; ++t) {
    const double a = rng.uniform(0.0, 2 * kPi);
    const double r0 = r * 0.55, r1 = r * 0.75;
    strokes.push_back(d.polyline({{r0 * std::cos(a), r0 * std::sin(a)}, {r1 * std::cos(a), r1 * std::sin(a)}}));
  }
  return strokes;
}

std::vector<Stroke> cross(Drawer& d, Rng& rng) {
  const double h = rng.uniform(0.8, 0.95);
  const double w = rng.uniform(0.8, 0.95);
  return {d.polyline({{0.0, -h}, {0.0, h}}), d.polyline({{-w, 0.0}, {w, 0.0}})};
}

std::vector<Stroke> zigzag(Drawer& d, Rng& rng) {
  const double amp = rng.uniform(0.35, 0.55);
  std::vector<std::pair<double, double>> verts;
  for (int k = 0; k <= 6; ++k) verts.emplace_back(-0.9 + 0.3 * k, k % 2 ? amp : -amp);
  return {d.polyline({verts[0], verts[1], verts[2]}), d.polyline({verts[2], verts[3], verts[4]}),
          d.polyline({verts[4], verts[5], verts[6]})};
}

std::vector<Stroke> square(Drawer& d, Rng& rng) {
  const double h = rng.uniform(0.7, 0.85);
  const std::pair<double, double> c[4] = {{-h, -h}, {h, -h}, {h, h}, {-h, h}};
  std::vector<Stroke> strokes;
  for (int k = 0; k < 4; ++k) strokes.push_back(d.polyline({c[k], c[(k + 1) % 4]}));
  return strokes;
}

std::vector<Stroke> star(Drawer& d, Rng& rng) {
  const double r = rng.uniform(0.8, 0.95);
  std::pair<double, double> tip[5];
  for (int k = 0; k < 5; ++k) {
    const double a = -kPi / 2 + 2 * kPi * k / 5.0;
    tip[k] = {r * std::cos(a), r * std::sin(a)};
  }
  std::vector<Stroke> strokes;
  for (int k = 0; k < 5; ++k) strokes.push_back(d.polyline({tip[(2 * k) % 5], tip[(2 * k + 2) % 5]}));
  return strokes;
}

}  // namespace

const std::vector<std::string>& synthetic_categories() {
  static const std::vector<std::string> names = {"circle", "cross", "square", "star", "zigzag"};
  return names;
}

Dataset generate_synthetic_dataset(const SyntheticOptions& options) {
  std::vector<Sketch> sketches;
  for (const std::string& category : synthetic_categories()) {
    Rng rng(mix_seed(options.seed, fnv1a64(category)));
    for (std::size_t i = 0; i < options.per_category; ++i) {
      const Placement pl{kExtent / 2 + rng.uniform(-40.0, 40.0), kExtent / 2 + rng.uniform(-40.0, 40.0),
                         rng.uniform(0.85, 1.1) * 300.0, rng.uniform(-8.0, 8.0) * kPi / 180.0};
      Drawer d(rng, pl, options.jitter);
      Sketch s;
      char id[64];
      std::snprintf(id, sizeof id, "%s_%03zu", category.c_str(), i);
      s.id = id;
      s.category = category;
      s.extent = {kExtent, kExtent};
      if (category == "circle") s.strokes = circle(d, rng);
      else if (category == "cross") s.strokes = cross(d, rng);
      else if (category == "zigzag") s.strokes = zigzag(d, rng);
      else if (category == "square") s.strokes = square(d, rng);
      else s.strokes = star(d, rng);
      sketches.push_back(std::move(s));
    }
  }
  return Dataset::from_sketches(std::move(sketches));
}

}  // namespace epitome
