#include <cstdlib>
#include <sstream>

#include "doctest.h"
#include "epitome/cli.hpp"
#include "epitome/epitome.hpp"
#include "epitome/sketch_io.hpp"
#include "fixtures.hpp"
#include "json.hpp"

using namespace epitome;
using nlohmann::json;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "epitome");
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

// Nine horizontal strokes; stub labels {0,1,0,1,1,1,1,1,1}.
void write_worked_example(const fixture::TempDir& dir) {
  save_sketch_file(fixture::striped("plane9", "airplane", 9), dir / "data/airplane/plane9.json");
  fixture::write_file(dir / "stub.json", R"({"plane9": [0, 1, 0, 1, 1, 1, 1, 1, 1]})");
}

}  // namespace

TEST_CASE("usage errors exit 1 with usage text") {
  const Run unknown = run({"frobnicate"});
  CHECK(unknown.code == cli::kUsage);
  CHECK(unknown.err.find("Usage") != std::string::npos);
  CHECK(run({}).code == cli::kUsage);
  CHECK(run({"train"}).code == cli::kUsage);
  CHECK(run({"analyze", "--results", "x"}).code == cli::kUsage);
  const Run help = run({"--help"});
  CHECK(help.code == cli::kOk);
  CHECK(help.out.find("epitome") != std::string::npos);
}

TEST_CASE("epitome with stub labels reproduces the worked example") {
  fixture::TempDir dir("cli_worked");
  write_worked_example(dir);
  const std::string out = (dir / "results.ndjson").string();
  const Run r = run({"epitome", "--data", (dir / "data").string(), "--out", out, "--stub-labels",
                     (dir / "stub.json").string(), "--dump-canvases"});
  REQUIRE(r.code == cli::kOk);
  const std::string text = fixture::read_file(out);
  const json j = json::parse(text.substr(0, text.find('\n')));
  CHECK(j["id"] == "plane9");
  CHECK(j["e"] == 4);
  CHECK(std::abs(j["score"].get<double>() - 4.0 / 9.0) < 1e-12);
  CHECK(j["epitomizable"] == true);
  CHECK(fixture::fs::exists(out + ".config.json"));
  CHECK(fixture::fs::exists(out + ".canvases/airplane/plane9_epitome.pgm"));

  const Run again = run({"epitome", "--data", (dir / "data").string(), "--out", (dir / "again.ndjson").string(),
                         "--stub-labels", (dir / "stub.json").string()});
  REQUIRE(again.code == cli::kOk);
  CHECK(fixture::read_file(dir / "again.ndjson") == text);
}

TEST_CASE("epitome needs a model or stub labels") {
  fixture::TempDir dir("cli_nomodel");
  write_worked_example(dir);
  CHECK(run({"epitome", "--data", (dir / "data").string(), "--out", (dir / "r.ndjson").string()}).code == cli::kUsage);
}

TEST_CASE("analyze: empty results exit 2 with diagnostic") {
  fixture::TempDir dir("cli_empty");
  fixture::write_file(dir / "empty.ndjson", "");
  const Run r = run({"analyze", "--results", (dir / "empty.ndjson").string(), "--out", (dir / "rep").string()});
  CHECK(r.code == cli::kDataError);
  CHECK(r.err.find("no epitomizable results") != std::string::npos);
  CHECK(std::count(r.err.begin(), r.err.end(), '\n') == 1);
}

TEST_CASE("analyze writes reports, idempotently") {
  fixture::TempDir dir("cli_analyze");
  std::string lines;
  const StubLabelSource stub = StubLabelSource::from_json(R"({"a":[0,1,1,1],"b":[1,1],"c":[0,0,1],"d":[1,0]})");
  for (const auto& [id, cat, n] : std::vector<std::tuple<std::string, std::string, std::size_t>>{
           {"a", "x", 4}, {"b", "x", 2}, {"c", "y", 3}, {"d", "y", 2}}) {
    lines += to_ndjson(extract_epitome(stub, fixture::striped(id, cat, n))) + "\n";
  }
  fixture::write_file(dir / "r.ndjson", lines);
  const auto go = [&](const std::string& out) {
    return run({"analyze", "--results", (dir / "r.ndjson").string(), "--out", (dir / out).string(), "--cutoffs",
                "0.5", "--thresholds", "0:1:0.25"});
  };
  const Run first = go("rep1");
  REQUIRE(first.code == cli::kOk);
  REQUIRE(go("rep2").code == cli::kOk);
  for (const char* f : {"category_stats.csv", "exceedance.csv", "fig3.svg", "fig4.svg", "headline.json"}) {
    CHECK(fixture::fs::exists(dir / (std::string("rep1/") + f)));
    CHECK(fixture::read_file(dir / (std::string("rep1/") + f)) == fixture::read_file(dir / (std::string("rep2/") + f)));
  }
  CHECK(fixture::fs::exists(dir / "rep1/config.json"));
  const json h = json::parse(first.out);
  CHECK(h["categories"] == 2);

  CHECK(run({"analyze", "--results", (dir / "r.ndjson").string(), "--out", (dir / "rep3").string(), "--thresholds",
             "0.5,0.2"})
            .code == cli::kDataError);
}

TEST_CASE("convert turns SVG files into canonical JSON") {
  fixture::TempDir dir("cli_convert");
  fixture::write_file(dir / "in/cup/one.svg",
                      "<svg width=\"50\" height=\"40\"><path d=\"M 0 0 L 10 10\"/><path d=\"M 5 5 C 6 6 7 7 8 8\"/></svg>");
  const Run r = run({"convert", "--in", (dir / "in").string(), "--out", (dir / "out").string()});
  REQUIRE(r.code == cli::kOk);
  const Sketch s = parse_sketch(fixture::read_file(dir / "out/cup/one.json"));
  CHECK(s.stroke_count() == 2);
  CHECK(s.extent == Extent{50, 40});
  CHECK(run({"convert", "--in", (dir / "missing").string(), "--out", (dir / "o").string()}).code == cli::kDataError);
}

TEST_CASE("augment writes 30 canvases per sketch, or only the manifest") {
  fixture::TempDir dir("cli_augment");
  save_sketch_file(fixture::striped("s", "c", 3), dir / "data/c/s.json");
  const Run m = run({"augment", "--data", (dir / "data").string(), "--out", (dir / "m").string(), "--manifest-only"});
  REQUIRE(m.code == cli::kOk);
  CHECK(json::parse(fixture::read_file(dir / "m/battery.json")).size() == 30);
  CHECK_FALSE(fixture::fs::exists(dir / "m/c/s"));

  const Run a = run({"augment", "--data", (dir / "data").string(), "--out", (dir / "a").string(), "--raster-side",
                     "64"});
  REQUIRE(a.code == cli::kOk);
  std::size_t pgms = 0;
  for (const auto& e : fixture::fs::directory_iterator(dir / "a/c/s")) pgms += e.path().extension() == ".pgm";
  CHECK(pgms == 30);
  CHECK(fixture::read_file(dir / "a/c/s/00.pgm").rfind("P5\n64 64\n255\n", 0) == 0);
}

TEST_CASE("selftest passes") {
  const Run r = run({"selftest"});
  CHECK(r.code == cli::kOk);
  CHECK(r.out.find("FAIL") == std::string::npos);
  CHECK(r.out.find("PASS") != std::string::npos);
}

TEST_CASE("synth, train, eval and epitome on a small configuration") {
  fixture::TempDir dir("cli_train");
  REQUIRE(run({"synth", "--out", (dir / "data").string(), "--per-category", "6"}).code == cli::kOk);
  fixture::write_file(dir / "cfg.json", R"({
    "raster_side": 96,
    "descriptor": {"grid": 8},
    "pca_dim": 8,
    "gmm_components": 4,
    "fit_canvas_cap": 60,
    "fit_sample_cap": 2000,
    "train": {"folds": 2, "epochs": 5, "grid": [{"C": 1.0, "gamma": 0.0}]}
  })");
  const std::string model = (dir / "model.epit").string();
  const Run t = run({"train", "--data", (dir / "data").string(), "--config", (dir / "cfg.json").string(), "--out",
                     model, "--seed", "3"});
  REQUIRE(t.code == cli::kOk);
  CHECK(t.out.find("test accuracy") != std::string::npos);
  CHECK(fixture::fs::exists(model + ".config.json"));
  CHECK(json::parse(fixture::read_file(model + ".config.json"))["seed"] == 3);

  const Run e = run({"eval", "--model", model, "--data", (dir / "data").string()});
  REQUIRE(e.code == cli::kOk);
  const json report = json::parse(e.out);
  CHECK(report["categories"].size() == 5);
  std::size_t total = 0;
  for (const auto& row : report["confusion"]) {
    for (const auto& v : row) total += v.get<std::size_t>();
  }
  CHECK(total == 5 * 1);  // round(0.8 * 6) = 5 train, 1 test per category

  const Run all = run({"eval", "--model", model, "--data", (dir / "data").string(), "--all"});
  REQUIRE(all.code == cli::kOk);
  CHECK(json::parse(all.out)["counts"][0] == 6);

  const std::string results = (dir / "r.ndjson").string();
  const Run x = run({"epitome", "--model", model, "--data", (dir / "data").string(), "--out", results});
  REQUIRE(x.code == cli::kOk);
  CHECK(read_results(results).size() == 5);

  CHECK(run({"eval", "--model", (dir / "missing.epit").string(), "--data", (dir / "data").string()}).code ==
        cli::kDataError);
  CHECK(run({"train", "--data", (dir / "data").string(), "--out", model, "--kernel", "poly"}).code == cli::kDataError);
}

TEST_CASE("EPITOME_THREADS must be a positive integer") {
  const char* previous = std::getenv("EPITOME_THREADS");
  const std::string saved = previous ? previous : "";
  setenv("EPITOME_THREADS", "zero", 1);
  CHECK(run({"selftest"}).code == cli::kDataError);
  setenv("EPITOME_THREADS", "1", 1);
  CHECK(run({"selftest"}).code == cli::kOk);
  if (previous) {
    setenv("EPITOME_THREADS", saved.c_str(), 1);
  } else {
    unsetenv("EPITOME_THREADS");
  }
}
