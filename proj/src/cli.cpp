#include "epitome/cli.hpp"

#include <omp.h>

#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "epitome/analysis.hpp"
#include "epitome/epitome.hpp"
#include "epitome/error.hpp"
#include "epitome/pipeline.hpp"
#include "epitome/selftest.hpp"
#include "epitome/synthetic.hpp"
#include "json.hpp"

namespace epitome::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << text;
  if (!out) throw DataError("write failed for " + path.string());
}

fs::path config_echo_path(const fs::path& artifact) { return fs::path(artifact.string() + ".config.json"); }

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// Caps OpenMP parallelism from EPITOME_THREADS. Throws DataError on a bad value.
void apply_thread_cap() {
  const char* env = std::getenv("EPITOME_THREADS");
  if (!env || !*env) return;
  int n = 0;
  const char* end = env + std::char_traits<char>::length(env);
  const auto [ptr, ec] = std::from_chars(env, end, n);
  if (ec != std::errc() || ptr != end || n < 1) {
    throw DataError(std::string("EPITOME_THREADS must be a positive integer, got '") + env + "'");
  }
  omp_set_num_threads(n);
}

// Flags that override values from a --config file.
struct ConfigOverrides {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<double> train_fraction;
  std::optional<int> raster_side;
  std::optional<int> pca_dim;
  std::optional<int> gmm_components;
  std::optional<std::string> kernel;
  std::optional<int> folds;
  std::optional<int> epochs;
  std::optional<std::string> battery;

  void attach(CLI::App* app) {
    app->add_option("--config", config_path, "JSON pipeline config; missing keys use defaults")->check(CLI::ExistingFile);
    app->add_option("--seed", seed, "Master seed (split, sampling, training)");
    app->add_option("--train-fraction", train_fraction, "Fraction of each category used for training");
    app->add_option("--raster-side", raster_side, "Canvas side in pixels");
    app->add_option("--pca-dim", pca_dim, "PCA output dimension");
    app->add_option("--gmm-components", gmm_components, "Gaussian mixture components");
    app->add_option("--kernel", kernel, "SVM kernel: linear or rbf");
    app->add_option("--folds", folds, "Cross-validation folds");
    app->add_option("--epochs", epochs, "Pegasos epochs (linear kernel)");
    app->add_option("--battery", battery, "Augmentation battery: 'default' or a manifest path");
  }

  PipelineConfig resolve() const {
    PipelineConfig cfg = config_path.empty() ? PipelineConfig{} : PipelineConfig::load(config_path);
    if (seed) cfg.seed = *seed;
    if (train_fraction) cfg.train_fraction = *train_fraction;
    if (raster_side) cfg.raster_side = *raster_side;
    if (pca_dim) cfg.pca_dim = *pca_dim;
    if (gmm_components) cfg.gmm_components = *gmm_components;
    if (kernel) {
      cfg.train.kernel = kernel_from_string(*kernel);
      cfg.train.grid.clear();
    }
    if (folds) cfg.train.folds = *folds;
    if (epochs) cfg.train.epochs = *epochs;
    if (battery) cfg.battery = *battery;
    cfg.validate();
    return cfg;
  }
};

// ---------------------------------------------------------------------------

struct ConvertArgs {
  std::string in, out;
};

int cmd_convert(const ConvertArgs& a, std::ostream& out, std::ostream& err) {
  const Dataset d = load_dataset(a.in);
  save_dataset(d, a.out);
  err << "converted " << d.sketches.size() << " sketches in " << d.categories.size() << " categories\n";
  out << json{{"sketches", d.sketches.size()}, {"categories", d.categories}}.dump() << "\n";
  return kOk;
}

struct AugmentArgs {
  std::string data, out;
  bool manifest_only = false;
  ConfigOverrides cfg;
};

int cmd_augment(const AugmentArgs& a, std::ostream& out, std::ostream& err) {
  const PipelineConfig cfg = a.cfg.resolve();
  const std::vector<Transform> battery = cfg.load_battery();
  const Dataset d = load_dataset(a.data);
  const fs::path root(a.out);
  fs::create_directories(root);
  write_text(root / "battery.json", battery_to_json(battery));

  json manifest = json::array();
  for (const Sketch& s : d.sketches) {
    json entry{{"id", s.id}, {"category", s.category}, {"transforms", json::array()}};
    const fs::path dir = root / s.category / s.id;
    std::vector<Canvas> variants;
    if (!a.manifest_only) {
      variants = augment(test_canvas(s, cfg.raster_side), battery);
      fs::create_directories(dir);
    }
    for (std::size_t k = 0; k < battery.size(); ++k) {
      char name[32];
      std::snprintf(name, sizeof name, "%02zu.pgm", k);
      entry["transforms"].push_back({{"index", k}, {"transform", battery[k].describe()}, {"file", name}});
      if (!a.manifest_only) write_pgm(variants[k], (dir / name).string());
    }
    manifest.push_back(std::move(entry));
  }
  write_text(root / "manifest.json", manifest.dump(2) + "\n");
  write_text(root / "config.json", cfg.to_json());
  err << (a.manifest_only ? "wrote manifest for " : "augmented ") << d.sketches.size() << " sketches x "
      << battery.size() << " transforms\n";
  out << json{{"sketches", d.sketches.size()}, {"transforms", battery.size()}, {"manifest_only", a.manifest_only}}.dump()
      << "\n";
  return kOk;
}

struct TrainArgs {
  std::string data, out;
  ConfigOverrides cfg;
};

int cmd_train(const TrainArgs& a, std::ostream& out, std::ostream& err) {
  const PipelineConfig cfg = a.cfg.resolve();
  const Dataset d = load_dataset(a.data);
  const DatasetSplit split = split_dataset(d, cfg.train_fraction, cfg.seed);
  err << "train " << split.train.sketches.size() << " sketches, test " << split.test.sketches.size() << "\n";

  const TrainingOutcome outcome = train_pipeline(split.train, cfg, [&](const std::string& msg) { err << msg << "\n"; });
  save_model(outcome.model, a.out);
  write_text(config_echo_path(a.out), outcome.model.config.to_json());

  out << "C\tgamma\tmean_accuracy\n";
  for (const CvEntry& e : outcome.cv.table) {
    out << format_double(e.params.C) << "\t" << format_double(e.params.gamma) << "\t" << format_double(e.mean_accuracy)
        << "\n";
  }
  out << "best C " << format_double(outcome.cv.best.C) << " gamma " << format_double(outcome.cv.best.gamma) << "\n";
  const EvalReport report = evaluate_model(outcome.model, split.test);
  out << "test accuracy " << format_double(report.accuracy) << " (" << split.test.sketches.size() << " sketches)\n";
  return kOk;
}

// Sketches scored by eval/epitome: the model's held-out split unless `all`.
Dataset held_out(const ClassifierModel& model, const Dataset& d, bool all) {
  if (all) return d;
  return split_dataset(d, model.config.train_fraction, model.config.seed).test;
}

struct EvalArgs {
  std::string model, data;
  bool all = false;
};

int cmd_eval(const EvalArgs& a, std::ostream& out, std::ostream& err) {
  const ClassifierModel model = load_model(a.model);
  const Dataset test = held_out(model, load_dataset(a.data), a.all);
  err << "evaluating " << test.sketches.size() << " sketches\n";
  out << evaluate_model(model, test).to_json() << "\n";
  return kOk;
}

struct EpitomeArgs {
  std::string model, data, out, stub_labels;
  bool dump_canvases = false;
  bool all = false;
  int raster_side = kDefaultRasterSide;
};

void dump_epitome_canvases(const std::vector<EpitomeResult>& results, const Dataset& d, int side,
                           const fs::path& dir) {
  std::map<std::string, const Sketch*> by_id;
  for (const Sketch& s : d.sketches) by_id[s.id] = &s;
  for (const EpitomeResult& r : results) {
    if (!r.epitomizable()) continue;
    const Sketch& s = *by_id.at(r.id);
    const fs::path cat_dir = dir / r.category;
    fs::create_directories(cat_dir);
    write_pgm(dilate(rasterize(s, *r.epitome_index, side)), (cat_dir / (r.id + "_epitome.pgm")).string());
    write_pgm(test_canvas(s, side), (cat_dir / (r.id + "_full.pgm")).string());
  }
}

int cmd_epitome(const EpitomeArgs& a, std::ostream& out, std::ostream& err) {
  const Dataset all = load_dataset(a.data);
  std::vector<EpitomeResult> results;
  Dataset scored;
  json echo;
  int side = a.raster_side;

  if (!a.stub_labels.empty()) {
    const StubLabelSource stub = StubLabelSource::from_json(read_text(a.stub_labels), a.raster_side);
    scored = all;
    results = extract_epitomes(stub, scored.sketches);
    echo = {{"label_source", "stub"}, {"stub_labels", a.stub_labels}, {"raster_side", a.raster_side}};
  } else {
    if (a.model.empty()) throw CLI::RequiredError("--model (or --stub-labels)");
    const ClassifierModel model = load_model(a.model);
    scored = held_out(model, all, a.all);
    const ModelCanvasClassifier classifier(model);
    results = extract_epitomes(ClassifierLabelSource(classifier), scored.sketches);
    side = model.features.raster_side;
    echo = json::parse(model.config.to_json());
  }
  for (const EpitomeResult& r : results) check_result(r);

  std::string ndjson;
  std::size_t epitomizable = 0;
  for (const EpitomeResult& r : results) {
    ndjson += to_ndjson(r) + "\n";
    epitomizable += r.epitomizable() ? 1 : 0;
  }
  write_text(a.out, ndjson);
  write_text(config_echo_path(a.out), echo.dump(2) + "\n");
  if (a.dump_canvases) dump_epitome_canvases(results, scored, side, fs::path(a.out + ".canvases"));

  err << "extracted " << results.size() << " sketches, " << epitomizable << " epitomizable\n";
  out << json{{"sketches", results.size()}, {"epitomizable", epitomizable}}.dump() << "\n";
  return kOk;
}

struct AnalyzeArgs {
  std::string results, out;
  std::string cutoffs = "0.5,0.75";
  std::string thresholds = "0:1:0.05";
};

int cmd_analyze(const AnalyzeArgs& a, std::ostream& out, std::ostream& err) {
  const std::vector<double> cutoffs = parse_number_list(a.cutoffs);
  const std::vector<double> thresholds = parse_number_list(a.thresholds);
  const std::vector<EpitomeResult> results = read_results(a.results);
  const std::vector<CategoryStats> stats = category_stats(results);
  const std::vector<ExceedanceCurve> curves = exceedance_curves(results, thresholds);
  const std::vector<HeadlineFraction> headline = headline_fractions(stats, cutoffs);

  const fs::path dir(a.out);
  emit_report(stats, curves, dir);
  json h = json::array();
  for (const HeadlineFraction& f : headline) {
    h.push_back({{"cutoff", f.cutoff}, {"below", f.below}, {"total", f.total}, {"fraction", f.fraction()}});
  }
  write_text(dir / "headline.json", h.dump(2) + "\n");
  write_text(dir / "config.json",
             json{{"results", a.results}, {"cutoffs", cutoffs}, {"thresholds", thresholds}}.dump(2) + "\n");
  err << "analyzed " << results.size() << " results over " << stats.size() << " categories\n";
  out << json{{"categories", stats.size()}, {"headline", h}}.dump() << "\n";
  return kOk;
}

int cmd_selftest(std::uint64_t seed, std::ostream& out) {
  bool ok = true;
  for (const SelftestCheck& c : run_selftest(seed)) {
    out << (c.passed ? "PASS " : "FAIL ") << c.name;
    if (!c.passed) out << ": " << c.detail;
    out << "\n";
    ok = ok && c.passed;
  }
  return ok ? kOk : kInternalError;
}

struct SynthArgs {
  std::string out;
  SyntheticOptions options;
};

int cmd_synth(const SynthArgs& a, std::ostream& out, std::ostream& err) {
  const Dataset d = generate_synthetic_dataset(a.options);
  save_dataset(d, a.out);
  write_text(fs::path(a.out) / "synth.config.json",
             json{{"per_category", a.options.per_category}, {"seed", a.options.seed}, {"jitter", a.options.jitter}}
                     .dump(2) +
                 "\n");
  err << "wrote " << d.sketches.size() << " synthetic sketches\n";
  out << json{{"sketches", d.sketches.size()}, {"categories", d.categories}}.dump() << "\n";
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Category epitomes of stroke sketches", "epitome"};
  app.require_subcommand(1);
  app.fallthrough(false);

  ConvertArgs convert;
  auto* c_convert = app.add_subcommand("convert", "Import SVG sketches into canonical JSON");
  c_convert->add_option("--in", convert.in, "Dataset root: <category>/<id>.svg|.json")->required();
  c_convert->add_option("--out", convert.out, "Output dataset root")->required();

  AugmentArgs aug;
  auto* c_aug = app.add_subcommand("augment", "Dilate and apply the 30-transform battery");
  c_aug->add_option("--data", aug.data, "Dataset root")->required();
  c_aug->add_option("--out", aug.out, "Output directory")->required();
  c_aug->add_flag("--manifest-only", aug.manifest_only, "Write the transform manifest without canvases");
  aug.cfg.attach(c_aug);

  TrainArgs train;
  auto* c_train = app.add_subcommand("train", "Fit features, cross-validate and train the classifier");
  c_train->add_option("--data", train.data, "Dataset root")->required();
  c_train->add_option("--out", train.out, "Model file")->required();
  train.cfg.attach(c_train);

  EvalArgs eval;
  auto* c_eval = app.add_subcommand("eval", "Evaluate a model; report JSON on stdout");
  c_eval->add_option("--model", eval.model, "Model file")->required();
  c_eval->add_option("--data", eval.data, "Dataset root")->required();
  c_eval->add_flag("--all", eval.all, "Use every sketch instead of the model's held-out split");

  EpitomeArgs ep;
  auto* c_ep = app.add_subcommand("epitome", "Extract category epitomes as NDJSON");
  c_ep->add_option("--model", ep.model, "Model file");
  c_ep->add_option("--data", ep.data, "Dataset root")->required();
  c_ep->add_option("--out", ep.out, "Results file (NDJSON)")->required();
  c_ep->add_flag("--dump-canvases", ep.dump_canvases, "Write epitome and full canvases as PGM");
  c_ep->add_flag("--all", ep.all, "Use every sketch instead of the model's held-out split");
  c_ep->add_option("--stub-labels", ep.stub_labels, "JSON {id: [labels]} used instead of a classifier")
      ->check(CLI::ExistingFile);
  c_ep->add_option("--raster-side", ep.raster_side, "Canvas side for stub runs")->check(CLI::PositiveNumber);

  AnalyzeArgs an;
  auto* c_an = app.add_subcommand("analyze", "Per-category statistics, curves and charts");
  c_an->add_option("--results", an.results, "Results file (NDJSON)")->required();
  c_an->add_option("--out", an.out, "Report directory")->required();
  c_an->add_option("--cutoffs", an.cutoffs, "Median cutoffs, list or lo:hi:step")->capture_default_str();
  c_an->add_option("--thresholds", an.thresholds, "Exceedance thresholds, list or lo:hi:step")->capture_default_str();

  std::uint64_t selftest_seed = 1;
  auto* c_self = app.add_subcommand("selftest", "Run the built-in oracle checks");
  c_self->add_option("--seed", selftest_seed, "Seed for randomized checks")->capture_default_str();

  SynthArgs synth;
  auto* c_synth = app.add_subcommand("synth", "Generate the procedural five-category dataset");
  c_synth->add_option("--out", synth.out, "Output dataset root")->required();
  c_synth->add_option("--per-category", synth.options.per_category, "Sketches per category")->capture_default_str();
  c_synth->add_option("--seed", synth.options.seed, "Generator seed")->capture_default_str();
  c_synth->add_option("--jitter", synth.options.jitter, "Per-point noise std-dev")->capture_default_str();

  std::vector<const char*> argv;
  argv.reserve(args.size());
  for (const std::string& a : args) argv.push_back(a.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n" << app.help();
    return kUsage;
  }

  try {
    apply_thread_cap();
    if (c_convert->parsed()) return cmd_convert(convert, out, err);
    if (c_aug->parsed()) return cmd_augment(aug, out, err);
    if (c_train->parsed()) return cmd_train(train, out, err);
    if (c_eval->parsed()) return cmd_eval(eval, out, err);
    if (c_ep->parsed()) return cmd_epitome(ep, out, err);
    if (c_an->parsed()) return cmd_analyze(an, out, err);
    if (c_self->parsed()) return cmd_selftest(selftest_seed, out);
    if (c_synth->parsed()) return cmd_synth(synth, out, err);
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const InvariantError& e) {
    err << "invariant failure: " << e.what() << "\n";
    return kInternalError;
  } catch (const DataError& e) {
    err << "error: " << e.what() << "\n";
    return kDataError;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return kDataError;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return kInternalError;
  }
  err << app.help();
  return kUsage;
}

}  // namespace epitome::cli
