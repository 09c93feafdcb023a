#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "epitome/features.hpp"
#include "epitome/raster.hpp"
#include "epitome/sketch_io.hpp"
#include "epitome/svm.hpp"

namespace epitome {

/// Every tunable of the canvas -> label pipeline. Serialised as JSON; any
/// missing key falls back to its default.
struct PipelineConfig {
  int raster_side = kDefaultRasterSide;
  std::string battery = "default";  // "default" or a path to a 30-entry manifest
  DescriptorParams descriptor;
  int pca_dim = 64;
  int gmm_components = 32;
  std::size_t fit_canvas_cap = 400;     // canvases sampled for PCA/GMM fitting
  std::size_t fit_sample_cap = 20'000;  // descriptors used for PCA/GMM fitting
  double train_fraction = 0.8;
  std::uint64_t seed = 1;
  TrainConfig train;  // an empty grid means TrainConfig::default_grid

  void validate() const;
  std::string to_json() const;
  static PipelineConfig from_json(std::string_view text);
  static PipelineConfig load(const std::filesystem::path& path);

  std::vector<Transform> load_battery() const;
  std::size_t feature_dim() const { return 2 * static_cast<std::size_t>(gmm_components) * pca_dim; }
};

/// Canvas -> Fisher vector with fitted projection and mixture.
struct FeaturePipeline {
  int raster_side = kDefaultRasterSide;
  DescriptorParams descriptor;
  PcaModel pca;
  GmmModel gmm;

  FeatureVector encode(const Canvas& canvas) const;
};

/// The trained classifier together with everything needed to classify a
/// canvas, so the model file alone fixes the feature configuration.
struct ClassifierModel {
  PipelineConfig config;
  FeaturePipeline features;
  SvmModel svm;

  const std::vector<std::string>& categories() const { return svm.categories; }
  Prediction classify(const FeatureVector& f) const { return epitome::classify(svm, f); }
  Prediction classify_canvas(const Canvas& canvas) const { return classify(features.encode(canvas)); }
};

/// Test-time canvas: the full sketch, rendered then dilated.
Canvas test_canvas(const Sketch& sketch, int side);

/// Fits PCA and GMM on descriptors drawn from a seeded subset of canvases.
FeaturePipeline fit_feature_pipeline(const std::vector<Canvas>& canvases, const PipelineConfig& cfg);

struct TrainingSet {
  Matrix features;
  std::vector<std::string> labels;
  std::vector<std::size_t> groups;  // source sketch index, keeps augmented copies in one CV fold
};

/// Encodes the 30 augmented variants of each sketch's dilated canvas.
TrainingSet build_training_set(const Dataset& train, const FeaturePipeline& fp, const std::vector<Transform>& battery);

struct TrainingOutcome {
  ClassifierModel model;
  CvResult cv;
  std::size_t training_examples = 0;
};

using ProgressFn = std::function<void(const std::string&)>;

/// Augment, fit features, grid-search C (and gamma), train the final model.
TrainingOutcome train_pipeline(const Dataset& train, const PipelineConfig& cfg, const ProgressFn& progress = {});

EvalReport evaluate_model(const ClassifierModel& model, const Dataset& test);

// Model container: "EPIT", u32 version, u64 payload length, payload.
inline constexpr std::uint32_t kModelFormatVersion = 1;

std::string serialize_model(const ClassifierModel& model);
ClassifierModel deserialize_model(std::string_view bytes);
void save_model(const ClassifierModel& model, const std::filesystem::path& path);
ClassifierModel load_model(const std::filesystem::path& path);

}  // namespace epitome
