#include <algorithm>
#include <functional>
#include <map>
#include <set>

#include "doctest.h"
#include "epitome/error.hpp"
#include "epitome/sketch_io.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace epitome;

namespace {

std::string svg(const std::vector<std::string>& paths, int w = 100, int h = 100) {
  std::string s = "<?xml version=\"1.0\"?>\n<!-- fixture -->\n<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" +
                  std::to_string(w) + "\" height=\"" + std::to_string(h) + "\">\n";
  for (const auto& d : paths) s += "  <path d=\"" + d + "\" stroke=\"black\" fill=\"none\"/>\n";
  return s + "</svg>\n";
}

ParseErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const ParseError& e) {
    return e.kind();
  }
  FAIL("expected a ParseError");
  return ParseErrorKind::kMalformed;
}

}  // namespace

TEST_CASE("parse_sketch: minimal well-formed file") {
  const Sketch s = parse_sketch(R"({"id":"a","category":"cup","extent":[800,800],"strokes":[[[0,0],[10,10]]]})");
  CHECK(s.category == "cup");
  CHECK(s.extent == Extent{800, 800});
  REQUIRE(s.stroke_count() == 1);
  CHECK(s.strokes[0].points.size() == 2);
  CHECK(s.strokes[0].points[1] == Point{10, 10});
}

TEST_CASE("parse_sketch: empty strokes array is an empty sketch") {
  const auto text = R"({"id":"a","category":"cup","extent":[800,800],"strokes":[]})";
  CHECK(kind_of([&] { parse_sketch(text); }) == ParseErrorKind::kEmptySketch);
  try {
    parse_sketch(text);
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("empty sketch") != std::string::npos);
  }
}

TEST_CASE("parse_sketch: structural violations") {
  CHECK(kind_of([] { parse_sketch("not json"); }) == ParseErrorKind::kMalformed);
  CHECK(kind_of([] { parse_sketch(R"({"id":"a","extent":[1,1],"strokes":[[[0,0],[1,1]]]})"); }) ==
        ParseErrorKind::kMissingField);
  CHECK(kind_of([] { parse_sketch(R"({"id":"a","category":"c","extent":[1,1],"strokes":[[[0,0]]]})"); }) ==
        ParseErrorKind::kShortStroke);
  CHECK(kind_of([] { parse_sketch(R"({"id":"a","category":"c","extent":[1,1],"strokes":[[[0,0],[2,1]]]})"); }) ==
        ParseErrorKind::kOutOfExtent);
  CHECK(kind_of([] { parse_sketch(R"({"id":"a","category":"","extent":[1,1],"strokes":[[[0,0],[1,1]]]})"); }) ==
        ParseErrorKind::kMissingField);
  CHECK(kind_of([] { parse_sketch(R"({"id":"a","category":"c","extent":[0,1],"strokes":[[[0,0],[0,1]]]})"); }) ==
        ParseErrorKind::kMalformed);
}

TEST_CASE("validate_sketch rejects non-finite points") {
  Sketch s = fixture::striped("a", "c", 1);
  s.strokes[0].points[0].x = std::nan("");
  CHECK(kind_of([&] { validate_sketch(s); }) == ParseErrorKind::kNonFinite);
}

TEST_CASE("serialize/parse round trip keeps 9 strokes in order") {
  Rng rng(11);
  const Sketch s = fixture::random_sketch(rng, "nine", "cup", 9);
  const Sketch back = parse_sketch(serialize_sketch(s));
  REQUIRE(back.stroke_count() == 9);
  CHECK(back.id == s.id);
  CHECK(back.category == s.category);
  CHECK(back.extent == s.extent);
  for (std::size_t i = 0; i < 9; ++i) {
    REQUIRE(back.strokes[i].points.size() == s.strokes[i].points.size());
    for (std::size_t k = 0; k < s.strokes[i].points.size(); ++k) {
      CHECK(back.strokes[i].points[k].x == s.strokes[i].points[k].x);
      CHECK(back.strokes[i].points[k].y == s.strokes[i].points[k].y);
    }
  }
}

TEST_CASE("property: round trip is identity on random sketches") {
  Rng rng(12);
  for (int trial = 0; trial < 200; ++trial) {
    const Sketch s = fixture::random_sketch(rng, "r" + std::to_string(trial), "cat", 1 + rng.below(12));
    CHECK(parse_sketch(serialize_sketch(s)) == s);
  }
}

TEST_CASE("import_svg: single line path") {
  const Sketch s = import_svg(svg({"M 0 0 L 10 0"}), "cup", "one");
  REQUIRE(s.stroke_count() == 1);
  CHECK(s.strokes[0].points == std::vector<Point>{{0, 0}, {10, 0}});
  CHECK(s.extent == Extent{100, 100});
  CHECK(s.category == "cup");
}

TEST_CASE("import_svg: three paths keep document order") {
  const Sketch s = import_svg(svg({"M 1 1 L 2 2", "M 3 3 L 4 4", "M 5 5 L 6 6"}), "c");
  REQUIRE(s.stroke_count() == 3);
  for (int i = 0; i < 3; ++i) CHECK(s.strokes[i].points.front() == Point{1.0 + 2 * i, 1.0 + 2 * i});
}

TEST_CASE("import_svg: degenerate straight cubic stays on its segment") {
  const Sketch s = import_svg(svg({"M 0 0 C 0 0 10 0 10 0"}), "c");
  REQUIRE(s.stroke_count() == 1);
  const auto& pts = s.strokes[0].points;
  REQUIRE(pts.size() == 1 + kCubicSamples);
  for (const Point& p : pts) {
    CHECK(std::abs(p.y) <= 0.01);
    CHECK(p.x >= -0.01);
    CHECK(p.x <= 10.01);
  }
  for (int k = 1; k <= kCubicSamples; ++k) {
    const auto [bx, by] = oracle::bezier(static_cast<double>(k) / kCubicSamples, {0, 0}, {0, 0}, {10, 0}, {10, 0});
    CHECK(std::abs(pts[k].x - bx) <= 0.01);
    CHECK(std::abs(pts[k].y - by) <= 0.01);
  }
}

TEST_CASE("import_svg: curved cubic matches Bernstein evaluation, relative commands") {
  const Sketch s = import_svg(svg({"M 10 10 c 0 30 40 30 40 0 l 5 5"}), "c");
  const auto& pts = s.strokes[0].points;
  REQUIRE(pts.size() == 2 + kCubicSamples);
  for (int k = 1; k <= kCubicSamples; ++k) {
    const auto [bx, by] = oracle::bezier(static_cast<double>(k) / kCubicSamples, {10, 10}, {10, 40}, {50, 40}, {50, 10});
    CHECK(std::abs(pts[k].x - bx) <= 0.01);
    CHECK(std::abs(pts[k].y - by) <= 0.01);
  }
  CHECK(pts.back() == Point{55, 15});
}

TEST_CASE("import_svg: implicit lineto after moveto and compact number syntax") {
  const Sketch s = import_svg(svg({"M0,0 10,0 10,10", "m5 5l1.5.5"}), "c");
  CHECK(s.strokes[0].points == std::vector<Point>{{0, 0}, {10, 0}, {10, 10}});
  CHECK(s.strokes[1].points == std::vector<Point>{{5, 5}, {6.5, 5.5}});
}

TEST_CASE("import_svg: errors") {
  CHECK(kind_of([] { import_svg(svg({}), "c"); }) == ParseErrorKind::kNoPaths);
  CHECK(kind_of([] { import_svg("<svg><path d=\"M 0 0 L 1 1\"/></svg>", "c"); }) ==
        ParseErrorKind::kMissingDimensions);
  CHECK(kind_of([] { import_svg(svg({"M 0 0 Q 1 1 2 2"}), "c"); }) == ParseErrorKind::kUnsupportedCommand);
  CHECK(kind_of([] { import_svg(svg({"M 0 0 L 1 1 M 5 5 L 6 6"}), "c"); }) == ParseErrorKind::kUnsupportedCommand);
  CHECK(kind_of([] { import_svg(svg({"L 1 1"}), "c"); }) == ParseErrorKind::kMalformed);
}

TEST_CASE("property: import_svg preserves path count and order") {
  Rng rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 1 + rng.below(10);
    std::vector<std::string> paths;
    for (std::size_t i = 0; i < n; ++i) {
      paths.push_back("M " + std::to_string(i) + " 0 L " + std::to_string(i) + " 50");
    }
    const Sketch s = import_svg(svg(paths), "c");
    REQUIRE(s.stroke_count() == n);
    for (std::size_t i = 0; i < n; ++i) CHECK(s.strokes[i].points[0].x == static_cast<double>(i));
  }
}

TEST_CASE("load_dataset: counts, mixed formats, errors") {
  fixture::TempDir dir("load");
  for (const std::string cat : {"apple", "boat"}) {
    for (int i = 0; i < 3; ++i) {
      Sketch s = fixture::striped(cat + std::to_string(i), cat, 2);
      save_sketch_file(s, dir / (cat + "/" + s.id + ".json"));
    }
  }
  Dataset d = load_dataset(dir.path());
  CHECK(d.sketches.size() == 6);
  CHECK(d.categories == std::vector<std::string>{"apple", "boat"});

  fixture::write_file(dir / "boat/extra.svg", svg({"M 0 0 L 5 5", "M 1 1 L 2 2"}));
  d = load_dataset(dir.path());
  CHECK(d.sketches.size() == 7);
  const auto it = std::find_if(d.sketches.begin(), d.sketches.end(), [](const Sketch& s) { return s.id == "extra"; });
  REQUIRE(it != d.sketches.end());
  CHECK(it->category == "boat");
  CHECK(it->stroke_count() == 2);

  fixture::TempDir empty("empty");
  CHECK_THROWS_AS(load_dataset(empty.path()), DataError);
  CHECK_THROWS_AS(load_dataset(empty / "missing"), DataError);

  fixture::write_file(dir / "apple/bad.json", R"({"id":"bad","category":"apple","extent":[1,1],"strokes":[]})");
  CHECK_THROWS_AS(load_dataset(dir.path()), DataError);
}

TEST_CASE("load_dataset: category must match directory") {
  fixture::TempDir dir("mismatch");
  save_sketch_file(fixture::striped("x", "apple", 1), dir / "boat/x.json");
  CHECK_THROWS_AS(load_dataset(dir.path()), DataError);
}

TEST_CASE("save_dataset/load_dataset round trip") {
  fixture::TempDir dir("save");
  Rng rng(3);
  std::vector<Sketch> sketches;
  for (int i = 0; i < 5; ++i) sketches.push_back(fixture::random_sketch(rng, "s" + std::to_string(i), i % 2 ? "b" : "a", 3));
  const Dataset d = Dataset::from_sketches(sketches);
  save_dataset(d, dir.path());
  const Dataset back = load_dataset(dir.path());
  REQUIRE(back.sketches.size() == 5);
  for (const Sketch& s : back.sketches) {
    const auto it = std::find_if(sketches.begin(), sketches.end(), [&](const Sketch& o) { return o.id == s.id; });
    REQUIRE(it != sketches.end());
    CHECK(*it == s);
  }
}

namespace {

Dataset uniform_dataset(std::size_t categories, std::size_t per_category) {
  std::vector<Sketch> sketches;
  for (std::size_t c = 0; c < categories; ++c) {
    for (std::size_t i = 0; i < per_category; ++i) {
      sketches.push_back(fixture::striped("c" + std::to_string(c) + "_" + std::to_string(i), "cat" + std::to_string(c), 1));
    }
  }
  return Dataset::from_sketches(sketches);
}

std::map<std::string, std::size_t> per_category(const Dataset& d) {
  std::map<std::string, std::size_t> m;
  for (const Sketch& s : d.sketches) ++m[s.category];
  return m;
}

std::vector<std::string> ids(const Dataset& d) {
  std::vector<std::string> v;
  for (const Sketch& s : d.sketches) v.push_back(s.id);
  return v;
}

}  // namespace

TEST_CASE("split_dataset: 80 per category at 0.8 gives 64/16") {
  const DatasetSplit sp = split_dataset(uniform_dataset(3, 80), 0.8, 42);
  for (const auto& [cat, n] : per_category(sp.train)) CHECK(n == 64);
  for (const auto& [cat, n] : per_category(sp.test)) CHECK(n == 16);
}

TEST_CASE("split_dataset: fraction 0.5 on 2 sketches gives 1/1") {
  const DatasetSplit sp = split_dataset(uniform_dataset(1, 2), 0.5, 1);
  CHECK(sp.train.sketches.size() == 1);
  CHECK(sp.test.sketches.size() == 1);
}

TEST_CASE("split_dataset: seed determinism") {
  const Dataset d = uniform_dataset(1, 100);
  const DatasetSplit a = split_dataset(d, 0.8, 9);
  const DatasetSplit b = split_dataset(d, 0.8, 9);
  CHECK(ids(a.train) == ids(b.train));
  CHECK(ids(a.test) == ids(b.test));
  const DatasetSplit c = split_dataset(d, 0.8, 10);
  CHECK(ids(a.test) != ids(c.test));
}

TEST_CASE("split_dataset: errors") {
  CHECK_THROWS_AS(split_dataset(uniform_dataset(1, 1), 0.8, 1), DataError);
  CHECK_THROWS_AS(split_dataset(uniform_dataset(1, 5), 0.0, 1), DataError);
  CHECK_THROWS_AS(split_dataset(uniform_dataset(1, 5), 1.0, 1), DataError);
}

TEST_CASE("property: split is a disjoint, exhaustive, order-preserving partition") {
  Rng rng(77);
  for (int trial = 0; trial < 60; ++trial) {
    const std::size_t cats = 1 + rng.below(4);
    std::vector<Sketch> sketches;
    std::map<std::string, std::size_t> sizes;
    for (std::size_t c = 0; c < cats; ++c) sizes["k" + std::to_string(c)] = 2 + rng.below(30);
    std::size_t serial = 0;
    for (const auto& [cat, n] : sizes) {
      for (std::size_t i = 0; i < n; ++i) sketches.push_back(fixture::striped("id" + std::to_string(serial++), cat, 1));
    }
    Dataset d = Dataset::from_sketches(sketches);
    const double fraction = rng.uniform(0.05, 0.95);
    const DatasetSplit sp = split_dataset(d, fraction, rng.next());

    std::set<std::string> train_ids, test_ids;
    for (const auto& id : ids(sp.train)) train_ids.insert(id);
    for (const auto& id : ids(sp.test)) test_ids.insert(id);
    CHECK(train_ids.size() + test_ids.size() == d.sketches.size());
    for (const auto& id : train_ids) CHECK(test_ids.count(id) == 0);

    const auto tr = per_category(sp.train);
    for (const auto& [cat, n] : sizes) {
      const std::size_t expect = std::clamp<std::size_t>(
          static_cast<std::size_t>(std::floor(fraction * static_cast<double>(n) + 0.5)), 1, n - 1);
      CHECK(tr.at(cat) == expect);
    }
    // Relative order preserved: ids were issued in increasing order.
    auto serial_of = [](const std::string& id) { return std::stoul(id.substr(2)); };
    for (const Dataset* part : {&sp.train, &sp.test}) {
      for (std::size_t i = 1; i < part->sketches.size(); ++i) {
        CHECK(serial_of(part->sketches[i - 1].id) < serial_of(part->sketches[i].id));
      }
    }
  }
}
