#include "epitome/pipeline.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "epitome/error.hpp"
#include "epitome/random.hpp"
#include "json.hpp"

namespace epitome {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Config

void PipelineConfig::validate() const {
  auto positive = [](bool ok, const char* what) {
    if (!ok) throw DataError(std::string(what) + " must be positive");
  };
  positive(raster_side > 0, "raster_side");
  positive(descriptor.grid > 0, "descriptor.grid");
  positive(descriptor.patch > 0, "descriptor.patch");
  positive(descriptor.cells > 0, "descriptor.cells");
  positive(descriptor.bins > 0, "descriptor.bins");
  positive(pca_dim > 0, "pca_dim");
  positive(gmm_components > 0, "gmm_components");
  positive(fit_canvas_cap > 0, "fit_canvas_cap");
  positive(fit_sample_cap > 0, "fit_sample_cap");
  if (pca_dim > descriptor.dim()) throw DataError("pca_dim exceeds the descriptor dimension");
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) throw DataError("train_fraction must lie in (0, 1)");
  KeypointGrid::for_canvas(raster_side, descriptor);
  TrainConfig t = train;
  if (t.grid.empty()) t.grid = TrainConfig::default_grid(t.kernel, feature_dim());
  if (t.kernel == KernelKind::kRbf && !(t.gamma > 0.0)) t.gamma = 1.0;  // only the grid matters for training
  t.validate();
}

std::string PipelineConfig::to_json() const {
  json grid = json::array();
  for (const GridPoint& g : train.grid) grid.push_back({{"C", g.C}, {"gamma", g.gamma}});
  json j = {
      {"raster_side", raster_side},
      {"battery", battery},
      {"descriptor", {{"grid", descriptor.grid}, {"patch", descriptor.patch}, {"cells", descriptor.cells},
                      {"bins", descriptor.bins}}},
      {"pca_dim", pca_dim},
      {"gmm_components", gmm_components},
      {"fit_canvas_cap", fit_canvas_cap},
      {"fit_sample_cap", fit_sample_cap},
      {"train_fraction", train_fraction},
      {"seed", seed},
      {"train", {{"kernel", epitome::to_string(train.kernel)}, {"C", train.C}, {"gamma", train.gamma},
                 {"folds", train.folds}, {"epochs", train.epochs}, {"seed", train.seed},
                 {"rbf_tolerance", train.rbf_tolerance}, {"grid", grid}}},
  };
  return j.dump(2);
}

PipelineConfig PipelineConfig::from_json(std::string_view text) {
  PipelineConfig c;
  try {
    const json j = json::parse(text.begin(), text.end());
    if (!j.is_object()) throw DataError("config must be a JSON object");
    auto get = [&](const json& obj, const char* key, auto& field) {
      if (obj.contains(key)) field = obj.at(key).get<std::remove_reference_t<decltype(field)>>();
    };
    get(j, "raster_side", c.raster_side);
    get(j, "battery", c.battery);
    if (j.contains("descriptor")) {
      const json& d = j.at("descriptor");
      get(d, "grid", c.descriptor.grid);
      get(d, "patch", c.descriptor.patch);
      get(d, "cells", c.descriptor.cells);
      get(d, "bins", c.descriptor.bins);
    }
    get(j, "pca_dim", c.pca_dim);
    get(j, "gmm_components", c.gmm_components);
    get(j, "fit_canvas_cap", c.fit_canvas_cap);
    get(j, "fit_sample_cap", c.fit_sample_cap);
    get(j, "train_fraction", c.train_fraction);
    get(j, "seed", c.seed);
    if (j.contains("train")) {
      const json& t = j.at("train");
      if (t.contains("kernel")) c.train.kernel = kernel_from_string(t.at("kernel").get<std::string>());
      get(t, "C", c.train.C);
      get(t, "gamma", c.train.gamma);
      get(t, "folds", c.train.folds);
      get(t, "epochs", c.train.epochs);
      get(t, "seed", c.train.seed);
      get(t, "rbf_tolerance", c.train.rbf_tolerance);
      if (t.contains("grid")) {
        for (const json& g : t.at("grid")) c.train.grid.push_back({g.at("C").get<double>(), g.value("gamma", 0.0)});
      }
    }
  } catch (const json::exception& e) {
    throw DataError(std::string("config: ") + e.what());
  }
  return c;
}

PipelineConfig PipelineConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read config " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  return from_json(os.str());
}

std::vector<Transform> PipelineConfig::load_battery() const {
  if (battery == "default") return default_battery();
  std::ifstream in(battery);
  if (!in) throw DataError("cannot read augmentation manifest " + battery);
  std::ostringstream os;
  os << in.rdbuf();
  return battery_from_json(os.str());
}

// ---------------------------------------------------------------------------
// Features

FeatureVector FeaturePipeline::encode(const Canvas& canvas) const {
  return fisher_encode(extract_descriptors(canvas, descriptor), pca, gmm);
}

Canvas test_canvas(const Sketch& sketch, int side) { return dilate(rasterize(sketch, sketch.stroke_count(), side)); }

namespace {

std::vector<std::size_t> seeded_subset(std::size_t n, std::size_t cap, std::uint64_t seed) {
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  if (n <= cap) return idx;
  Rng rng(seed);
  rng.shuffle(std::span<std::size_t>(idx));
  idx.resize(cap);
  std::sort(idx.begin(), idx.end());
  return idx;
}

FeaturePipeline fit_from_source(std::size_t count, const std::function<Canvas(std::size_t)>& canvas_at,
                                const PipelineConfig& cfg) {
  if (count == 0) throw DataError("no canvases to fit features on");
  const auto chosen = seeded_subset(count, cfg.fit_canvas_cap, mix_seed(cfg.seed, fnv1a64("fit-canvases")));

  std::vector<Matrix> parts(chosen.size());
#pragma omp parallel for schedule(dynamic, 1)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(chosen.size()); ++i) {
    parts[i] = extract_descriptors(canvas_at(chosen[i]), cfg.descriptor).nonempty();
  }
  Eigen::Index rows = 0;
  for (const auto& p : parts) rows += p.rows();
  Matrix all(rows, cfg.descriptor.dim());
  Eigen::Index at = 0;
  for (const auto& p : parts) {
    all.middleRows(at, p.rows()) = p;
    at += p.rows();
  }

  const auto keep = seeded_subset(static_cast<std::size_t>(rows), cfg.fit_sample_cap,
                                  mix_seed(cfg.seed, fnv1a64("fit-descriptors")));
  Matrix sample(static_cast<Eigen::Index>(keep.size()), all.cols());
  for (std::size_t i = 0; i < keep.size(); ++i) sample.row(static_cast<Eigen::Index>(i)) = all.row(keep[i]);

  FeaturePipeline fp;
  fp.raster_side = cfg.raster_side;
  fp.descriptor = cfg.descriptor;
  fp.pca = fit_pca(sample, cfg.pca_dim);
  fp.gmm = fit_gmm(fp.pca.project(sample), cfg.gmm_components, mix_seed(cfg.seed, fnv1a64("gmm"))).model;
  return fp;
}

}  // namespace

FeaturePipeline fit_feature_pipeline(const std::vector<Canvas>& canvases, const PipelineConfig& cfg) {
  return fit_from_source(canvases.size(), [&](std::size_t i) { return canvases[i]; }, cfg);
}

TrainingSet build_training_set(const Dataset& train, const FeaturePipeline& fp, const std::vector<Transform>& battery) {
  const std::size_t per = battery.size();
  const std::size_t n = train.sketches.size() * per;
  TrainingSet ts;
  ts.features.resize(static_cast<Eigen::Index>(n), 2 * static_cast<Eigen::Index>(fp.gmm.components()) * fp.gmm.dim());
  ts.labels.resize(n);
  ts.groups.resize(n);
#pragma omp parallel for schedule(dynamic, 1)
  for (std::ptrdiff_t s = 0; s < static_cast<std::ptrdiff_t>(train.sketches.size()); ++s) {
    const Sketch& sketch = train.sketches[s];
    const auto variants = augment(test_canvas(sketch, fp.raster_side), battery);
    for (std::size_t t = 0; t < per; ++t) {
      const std::size_t row = static_cast<std::size_t>(s) * per + t;
      ts.features.row(static_cast<Eigen::Index>(row)) = fp.encode(variants[t]).values.transpose();
      ts.labels[row] = sketch.category;
      ts.groups[row] = static_cast<std::size_t>(s);
    }
  }
  return ts;
}

TrainingOutcome train_pipeline(const Dataset& train, const PipelineConfig& cfg, const ProgressFn& progress) {
  cfg.validate();
  auto note = [&](const std::string& msg) {
    if (progress) progress(msg);
  };
  const auto battery = cfg.load_battery();

  std::vector<Canvas> base(train.sketches.size());
#pragma omp parallel for schedule(dynamic, 4)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(base.size()); ++i) {
    base[i] = test_canvas(train.sketches[i], cfg.raster_side);
  }
  note("fitting PCA/GMM on descriptors from " + std::to_string(std::min(cfg.fit_canvas_cap, base.size() * battery.size())) +
       " augmented canvases");
  const FeaturePipeline fp = fit_from_source(
      base.size() * battery.size(),
      [&](std::size_t k) { return apply_transform(base[k / battery.size()], battery[k % battery.size()]); }, cfg);

  note("encoding " + std::to_string(base.size() * battery.size()) + " training canvases");
  const TrainingSet ts = build_training_set(train, fp, battery);

  TrainConfig tc = cfg.train;
  if (tc.grid.empty()) tc.grid = TrainConfig::default_grid(tc.kernel, static_cast<std::size_t>(ts.features.cols()));
  note("cross-validating " + std::to_string(tc.grid.size()) + " grid points x " + std::to_string(tc.folds) + " folds");

  TrainingOutcome out;
  out.cv = cross_validate(ts.features, ts.labels, tc, ts.groups);
  tc.C = out.cv.best.C;
  tc.gamma = out.cv.best.gamma;
  note("training final model");
  out.model.config = cfg;
  out.model.features = fp;
  out.model.svm = epitome::train(ts.features, ts.labels, tc);
  out.training_examples = static_cast<std::size_t>(ts.features.rows());
  return out;
}

EvalReport evaluate_model(const ClassifierModel& model, const Dataset& test) {
  std::vector<FeatureVector> features(test.sketches.size());
  std::vector<std::string> labels(test.sketches.size());
#pragma omp parallel for schedule(dynamic, 1)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(features.size()); ++i) {
    features[i] = model.features.encode(test_canvas(test.sketches[i], model.features.raster_side));
    labels[i] = test.sketches[i].category;
  }
  return evaluate(model.svm, features, labels);
}

}  // namespace epitome
