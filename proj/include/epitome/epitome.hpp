#pragma once

// Category epitomes: the shortest temporal stroke prefix S_e such that S_e
// and every later cumulative canvas S_e+1 .. S_N are classified correctly,
// and the sparseness score derived from its position.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "epitome/pipeline.hpp"
#include "epitome/raster.hpp"
#include "epitome/sketch_io.hpp"

namespace epitome {

/// l_i = 1 iff cumulative canvas i is assigned the sketch's true category.
struct LabelSequence {
  std::vector<std::uint8_t> bits;

  std::size_t size() const { return bits.size(); }
  friend bool operator==(const LabelSequence&, const LabelSequence&) = default;
};

/// P_i = l_i * l_i+1 * ... * l_N. Always a run of 0s followed by a run of 1s.
struct ProductSequence {
  std::vector<std::uint8_t> bits;

  std::size_t size() const { return bits.size(); }
  friend bool operator==(const ProductSequence&, const ProductSequence&) = default;
};

struct EpitomeResult {
  std::string id;
  std::string category;
  std::size_t stroke_count = 0;
  LabelSequence labels;
  ProductSequence products;
  std::optional<std::size_t> epitome_index;  // 1-based; empty when not epitomizable
  std::optional<double> score;

  bool epitomizable() const { return epitome_index.has_value(); }
};

/// Element i (0-based) is dilate(rasterize(sketch, i + 1, side)).
std::vector<Canvas> cumulative_canvases(const Sketch& sketch, int side = kDefaultRasterSide);

/// Produces the same canvases one at a time, drawing each new stroke onto
/// the running raster instead of re-rendering the prefix.
class CumulativeCanvases {
 public:
  CumulativeCanvases(const Sketch& sketch, int side);

  bool done() const { return next_ >= sketch_->stroke_count(); }
  /// Dilated canvas for the next prefix length.
  Canvas next();
  std::size_t produced() const { return next_; }

 private:
  const Sketch* sketch_;
  CanvasMapping mapping_;
  Canvas raw_;
  std::size_t next_ = 0;
};

/// Anything that can name the category of a canvas.
class CanvasClassifier {
 public:
  virtual ~CanvasClassifier() = default;
  virtual std::string classify(const Canvas& canvas) const = 0;
  virtual bool knows(const std::string& category) const = 0;
  virtual int raster_side() const = 0;
};

class ModelCanvasClassifier final : public CanvasClassifier {
 public:
  explicit ModelCanvasClassifier(const ClassifierModel& model) : model_(&model) {}

  std::string classify(const Canvas& canvas) const override { return model_->classify_canvas(canvas).category; }
  bool knows(const std::string& category) const override;
  int raster_side() const override { return model_->features.raster_side; }

 private:
  const ClassifierModel* model_;
};

/// Classifies each canvas against `true_category`. Throws DataError if the
/// classifier does not know the category. Canvases may be classified in
/// parallel; the bits stay in canvas order.
LabelSequence label_sequence(const CanvasClassifier& classifier, std::span<const Canvas> canvases,
                             const std::string& true_category);

ProductSequence product_sequence(const LabelSequence& labels);

/// Smallest 1-based i with P_i = 1, or nullopt when P_N = 0 (the full
/// sketch is misclassified and has no epitome).
std::optional<std::size_t> epitome_index(const ProductSequence& products);

/// e / N, except 0 when e = 1. Throws DataError unless 1 <= e <= N.
double epitome_score(std::size_t e, std::size_t n);

/// Source of per-prefix label sequences for a sketch.
class LabelSource {
 public:
  virtual ~LabelSource() = default;
  virtual LabelSequence labels(const Sketch& sketch) const = 0;
  /// Raster side used when dumping epitome canvases.
  virtual int raster_side() const = 0;
};

/// Renders prefixes lazily and asks a classifier about each.
class ClassifierLabelSource final : public LabelSource {
 public:
  explicit ClassifierLabelSource(const CanvasClassifier& classifier) : classifier_(&classifier) {}

  LabelSequence labels(const Sketch& sketch) const override;
  int raster_side() const override { return classifier_->raster_side(); }

 private:
  const CanvasClassifier* classifier_;
};

/// Fixed label sequences keyed by sketch id; a test hook that bypasses the
/// classifier entirely.
class StubLabelSource final : public LabelSource {
 public:
  explicit StubLabelSource(std::map<std::string, LabelSequence> by_id, int side = kDefaultRasterSide)
      : by_id_(std::move(by_id)), side_(side) {}

  /// JSON object {"<sketch id>": [0, 1, ...], ...}.
  static StubLabelSource from_json(std::string_view text, int side = kDefaultRasterSide);

  LabelSequence labels(const Sketch& sketch) const override;
  int raster_side() const override { return side_; }

 private:
  std::map<std::string, LabelSequence> by_id_;
  int side_;
};

/// labels -> products -> epitome index -> score. A misclassified full
/// sketch yields a result with no index and no score.
EpitomeResult extract_epitome(const LabelSource& source, const Sketch& sketch);
EpitomeResult extract_epitome(const ClassifierModel& model, const Sketch& sketch);

/// Parallel over sketches; output order matches input order.
std::vector<EpitomeResult> extract_epitomes(const LabelSource& source, std::span<const Sketch> sketches);

/// Throws InvariantError if the result is internally inconsistent.
void check_result(const EpitomeResult& result);

/// One NDJSON record:
/// {"id","category","N","labels":[...],"e","score","epitomizable":bool}
/// e and score are null for sketches that are not epitomizable.
std::string to_ndjson(const EpitomeResult& result);
EpitomeResult parse_ndjson_record(std::string_view line);
std::vector<EpitomeResult> read_results(const std::filesystem::path& path);

}  // namespace epitome
