#include "epitome/sketch_io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "epitome/error.hpp"
#include "epitome/random.hpp"
#include "json.hpp"

namespace epitome {

namespace fs = std::filesystem;
using nlohmann::json;

Dataset Dataset::from_sketches(std::vector<Sketch> sketches) {
  std::set<std::string> names;
  for (const auto& s : sketches) names.insert(s.category);
  return Dataset{std::move(sketches), {names.begin(), names.end()}};
}

void validate_sketch(const Sketch& sketch) {
  if (sketch.category.empty()) throw ParseError(ParseErrorKind::kMissingField, "category is empty");
  const Extent& ext = sketch.extent;
  if (!std::isfinite(ext.width) || !std::isfinite(ext.height) || ext.width <= 0.0 ||
      ext.height <= 0.0) {
    throw ParseError(ParseErrorKind::kMalformed, "extent must be two positive finite numbers");
  }
  if (sketch.strokes.empty()) throw ParseError(ParseErrorKind::kEmptySketch, sketch.id);
  for (std::size_t i = 0; i < sketch.strokes.size(); ++i) {
    const auto& pts = sketch.strokes[i].points;
    if (pts.size() < 2) {
      throw ParseError(ParseErrorKind::kShortStroke, "stroke " + std::to_string(i));
    }
    for (const Point& p : pts) {
      if (!std::isfinite(p.x) || !std::isfinite(p.y)) {
        throw ParseError(ParseErrorKind::kNonFinite, "stroke " + std::to_string(i));
      }
      if (p.x < 0.0 || p.y < 0.0 || p.x > ext.width || p.y > ext.height) {
        std::ostringstream os;
        os << "stroke " << i << " point (" << p.x << ", " << p.y << ")";
        throw ParseError(ParseErrorKind::kOutOfExtent, os.str());
      }
    }
  }
}

namespace {

const json& require(const json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end()) throw ParseError(ParseErrorKind::kMissingField, key);
  return *it;
}

double as_number(const json& v, const char* what) {
  if (!v.is_number()) throw ParseError(ParseErrorKind::kMalformed, std::string(what) + " is not a number");
  return v.get<double>();
}

}  // namespace

Sketch parse_sketch(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw ParseError(ParseErrorKind::kMalformed, e.what());
  }
  if (!doc.is_object()) throw ParseError(ParseErrorKind::kMalformed, "top level is not an object");

  Sketch sketch;
  const json& id = require(doc, "id");
  const json& category = require(doc, "category");
  const json& extent = require(doc, "extent");
  const json& strokes = require(doc, "strokes");
  if (!id.is_string() || !category.is_string()) {
    throw ParseError(ParseErrorKind::kMalformed, "id and category must be strings");
  }
  sketch.id = id.get<std::string>();
  sketch.category = category.get<std::string>();
  if (!extent.is_array() || extent.size() != 2) {
    throw ParseError(ParseErrorKind::kMalformed, "extent must be [width, height]");
  }
  sketch.extent = {as_number(extent[0], "extent"), as_number(extent[1], "extent")};
  if (!strokes.is_array()) throw ParseError(ParseErrorKind::kMalformed, "strokes must be an array");

  sketch.strokes.reserve(strokes.size());
  for (const json& stroke : strokes) {
    if (!stroke.is_array()) throw ParseError(ParseErrorKind::kMalformed, "stroke must be an array");
    Stroke s;
    s.points.reserve(stroke.size());
    for (const json& pt : stroke) {
      if (!pt.is_array() || pt.size() != 2) {
        throw ParseError(ParseErrorKind::kMalformed, "point must be [x, y]");
      }
      s.points.push_back({as_number(pt[0], "x"), as_number(pt[1], "y")});
    }
    sketch.strokes.push_back(std::move(s));
  }
  validate_sketch(sketch);
  return sketch;
}

std::string serialize_sketch(const Sketch& sketch) {
  json strokes = json::array();
  for (const Stroke& s : sketch.strokes) {
    json pts = json::array();
    for (const Point& p : s.points) pts.push_back({p.x, p.y});
    strokes.push_back(std::move(pts));
  }
  json doc = {{"id", sketch.id},
              {"category", sketch.category},
              {"extent", {sketch.extent.width, sketch.extent.height}},
              {"strokes", std::move(strokes)}};
  return doc.dump();
}

namespace {

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  if (in.bad()) throw DataError("cannot read " + path.string());
  return os.str();
}

}  // namespace

Sketch load_sketch_file(const fs::path& path, const std::string& category) {
  const std::string text = read_text(path);
  try {
    if (path.extension() == ".svg") return import_svg(text, category, path.stem().string());
    return parse_sketch(text);
  } catch (const ParseError& e) {
    throw ParseError(e.kind(), path.string() + ": " + e.what());
  }
}

Dataset load_dataset(const fs::path& root) {
  if (!fs::is_directory(root)) throw DataError("not a directory: " + root.string());

  std::vector<std::pair<fs::path, std::string>> files;
  std::set<std::string> categories;
  for (const auto& entry : fs::directory_iterator(root)) {
    if (!entry.is_directory()) continue;
    const std::string category = entry.path().filename().string();
    for (const auto& f : fs::directory_iterator(entry.path())) {
      const auto ext = f.path().extension();
      if (f.is_regular_file() && (ext == ".json" || ext == ".svg")) {
        files.emplace_back(f.path(), category);
        categories.insert(category);
      }
    }
  }
  if (files.empty()) throw DataError("no sketch files under " + root.string());
  std::sort(files.begin(), files.end());

  std::vector<Sketch> sketches(files.size());
  std::vector<std::string> errors(files.size());
#pragma omp parallel for schedule(dynamic, 8)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(files.size()); ++i) {
    try {
      sketches[i] = load_sketch_file(files[i].first, files[i].second);
    } catch (const std::exception& e) {
      errors[i] = e.what();
    }
  }
  for (std::size_t i = 0; i < files.size(); ++i) {
    if (!errors[i].empty()) throw DataError(errors[i]);
    if (!categories.count(sketches[i].category)) {
      throw DataError(files[i].first.string() + ": category '" + sketches[i].category +
                      "' does not match any category directory");
    }
  }
  return Dataset{std::move(sketches), {categories.begin(), categories.end()}};
}

void save_sketch_file(const Sketch& sketch, const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << serialize_sketch(sketch) << '\n';
  if (!out) throw DataError("cannot write " + path.string());
}

void save_dataset(const Dataset& dataset, const fs::path& root) {
  for (const Sketch& s : dataset.sketches) {
    const fs::path dir = root / s.category;
    fs::create_directories(dir);
    save_sketch_file(s, dir / (s.id + ".json"));
  }
}

DatasetSplit split_dataset(const Dataset& dataset, double train_fraction, std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw DataError("train fraction must lie in (0, 1)");
  }
  std::map<std::string, std::vector<std::size_t>> members;
  for (std::size_t i = 0; i < dataset.sketches.size(); ++i) {
    members[dataset.sketches[i].category].push_back(i);
  }

  std::vector<bool> is_train(dataset.sketches.size(), false);
  for (auto& [category, idx] : members) {
    const std::size_t n = idx.size();
    if (n < 2) throw DataError("category '" + category + "' has fewer than 2 sketches");
    auto n_train = static_cast<std::size_t>(std::floor(train_fraction * static_cast<double>(n) + 0.5));
    n_train = std::clamp<std::size_t>(n_train, 1, n - 1);

    Rng rng(mix_seed(seed, fnv1a64(category)));
    rng.shuffle(std::span<std::size_t>(idx));
    for (std::size_t k = 0; k < n_train; ++k) is_train[idx[k]] = true;
  }

  DatasetSplit split;
  split.train.categories = dataset.categories;
  split.test.categories = dataset.categories;
  for (std::size_t i = 0; i < dataset.sketches.size(); ++i) {
    (is_train[i] ? split.train : split.test).sketches.push_back(dataset.sketches[i]);
  }
  return split;
}

}  // namespace epitome
