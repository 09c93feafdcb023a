#include "epitome/epitome.hpp"

#include <algorithm>
#include <exception>
#include <fstream>

#include "epitome/error.hpp"
#include "json.hpp"

namespace epitome {

using nlohmann::json;

std::vector<Canvas> cumulative_canvases(const Sketch& sketch, int side) {
  std::vector<Canvas> out;
  out.reserve(sketch.stroke_count());
  CumulativeCanvases seq(sketch, side);
  while (!seq.done()) out.push_back(seq.next());
  return out;
}

CumulativeCanvases::CumulativeCanvases(const Sketch& sketch, int side)
    : sketch_(&sketch), mapping_(sketch.extent, side), raw_(side, side) {}

Canvas CumulativeCanvases::next() {
  if (done()) throw InvariantError("cumulative canvas sequence exhausted");
  draw_stroke(raw_, mapping_, sketch_->strokes[next_]);
  ++next_;
  return dilate(raw_);
}

bool ModelCanvasClassifier::knows(const std::string& category) const {
  const auto& cats = model_->categories();
  return std::find(cats.begin(), cats.end(), category) != cats.end();
}

LabelSequence label_sequence(const CanvasClassifier& classifier, std::span<const Canvas> canvases,
                             const std::string& true_category) {
  if (!classifier.knows(true_category)) throw DataError("classifier does not know category '" + true_category + "'");
  LabelSequence labels;
  labels.bits.assign(canvases.size(), 0);
#pragma omp parallel for schedule(dynamic, 1)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(canvases.size()); ++i) {
    labels.bits[i] = classifier.classify(canvases[i]) == true_category ? 1 : 0;
  }
  return labels;
}

ProductSequence product_sequence(const LabelSequence& labels) {
  ProductSequence p;
  p.bits.assign(labels.size(), 0);
  std::uint8_t running = 1;
  for (std::size_t i = labels.size(); i-- > 0;) {
    running = static_cast<std::uint8_t>(running * labels.bits[i]);
    p.bits[i] = running;
  }
  return p;
}

std::optional<std::size_t> epitome_index(const ProductSequence& products) {
  if (products.bits.empty() || products.bits.back() == 0) return std::nullopt;
  for (std::size_t i = 0; i < products.size(); ++i) {
    if (products.bits[i] == 1) return i + 1;
  }
  return std::nullopt;
}

double epitome_score(std::size_t e, std::size_t n) {
  if (e < 1 || e > n) {
    throw DataError("epitome index " + std::to_string(e) + " outside [1, " + std::to_string(n) + "]");
  }
  if (e == 1) return 0.0;
  return static_cast<double>(e) / static_cast<double>(n);
}

LabelSequence ClassifierLabelSource::labels(const Sketch& sketch) const {
  if (!classifier_->knows(sketch.category)) {
    throw DataError("classifier does not know category '" + sketch.category + "'");
  }
  LabelSequence labels;
  labels.bits.reserve(sketch.stroke_count());
  CumulativeCanvases seq(sketch, classifier_->raster_side());
  while (!seq.done()) labels.bits.push_back(classifier_->classify(seq.next()) == sketch.category ? 1 : 0);
  return labels;
}

StubLabelSource StubLabelSource::from_json(std::string_view text, int side) {
  std::map<std::string, LabelSequence> by_id;
  try {
    const json j = json::parse(text.begin(), text.end());
    if (!j.is_object()) throw DataError("stub labels must be a JSON object keyed by sketch id");
    for (const auto& [id, bits] : j.items()) {
      LabelSequence l;
      for (const json& b : bits) {
        const int v = b.get<int>();
        if (v != 0 && v != 1) throw DataError("stub label for '" + id + "' is not 0 or 1");
        l.bits.push_back(static_cast<std::uint8_t>(v));
      }
      by_id.emplace(id, std::move(l));
    }
  } catch (const json::exception& e) {
    throw DataError(std::string("stub labels: ") + e.what());
  }
  return StubLabelSource(std::move(by_id), side);
}

LabelSequence StubLabelSource::labels(const Sketch& sketch) const {
  auto it = by_id_.find(sketch.id);
  if (it == by_id_.end()) throw DataError("no stub labels for sketch '" + sketch.id + "'");
  if (it->second.size() != sketch.stroke_count()) {
    throw DataError("stub labels for '" + sketch.id + "' have length " + std::to_string(it->second.size()) +
                    ", sketch has " + std::to_string(sketch.stroke_count()) + " strokes");
  }
  return it->second;
}

namespace {

EpitomeResult assemble(const Sketch& sketch, LabelSequence labels) {
  EpitomeResult r;
  r.id = sketch.id;
  r.category = sketch.category;
  r.stroke_count = sketch.stroke_count();
  r.products = product_sequence(labels);
  r.labels = std::move(labels);
  r.epitome_index = epitome_index(r.products);
  if (r.epitome_index) r.score = epitome_score(*r.epitome_index, r.stroke_count);
  return r;
}

}  // namespace

EpitomeResult extract_epitome(const LabelSource& source, const Sketch& sketch) {
  EpitomeResult r = assemble(sketch, source.labels(sketch));
  check_result(r);
  return r;
}

EpitomeResult extract_epitome(const ClassifierModel& model, const Sketch& sketch) {
  const ModelCanvasClassifier classifier(model);
  return extract_epitome(ClassifierLabelSource(classifier), sketch);
}

std::vector<EpitomeResult> extract_epitomes(const LabelSource& source, std::span<const Sketch> sketches) {
  std::vector<EpitomeResult> out(sketches.size());
  std::vector<std::exception_ptr> errors(sketches.size());
#pragma omp parallel for schedule(dynamic, 1)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(sketches.size()); ++i) {
    try {
      out[i] = extract_epitome(source, sketches[i]);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

void check_result(const EpitomeResult& r) {
  auto fail = [&](const std::string& what) { throw InvariantError("epitome result '" + r.id + "': " + what); };
  const std::size_t n = r.stroke_count;
  if (n == 0) fail("zero strokes");
  if (r.labels.size() != n || r.products.size() != n) fail("sequence length differs from stroke count");
  if (r.products != product_sequence(r.labels)) fail("product sequence is not the suffix product of the labels");
  if (!r.epitome_index) {
    if (r.labels.bits.back() != 0) fail("final canvas correct but no epitome recorded");
    if (r.score) fail("score without an epitome");
    return;
  }
  const std::size_t e = *r.epitome_index;
  if (e < 1 || e > n) fail("epitome index out of range");
  for (std::size_t i = e - 1; i < n; ++i) {
    if (!r.labels.bits[i]) fail("a canvas at or after the epitome is misclassified");
  }
  if (e > 1 && r.labels.bits[e - 2]) fail("canvas before the epitome is correctly classified");
  if (!r.score || *r.score != epitome_score(e, n)) fail("score does not match e / N");
  if (*r.score < 0.0 || *r.score > 1.0) fail("score outside [0, 1]");
}

std::string to_ndjson(const EpitomeResult& r) {
  json j;
  j["id"] = r.id;
  j["category"] = r.category;
  j["N"] = r.stroke_count;
  j["labels"] = r.labels.bits;
  j["e"] = r.epitome_index ? json(*r.epitome_index) : json(nullptr);
  j["score"] = r.score ? json(*r.score) : json(nullptr);
  j["epitomizable"] = r.epitomizable();
  return j.dump();
}

EpitomeResult parse_ndjson_record(std::string_view line) {
  EpitomeResult r;
  try {
    const json j = json::parse(line.begin(), line.end());
    r.id = j.at("id").get<std::string>();
    r.category = j.at("category").get<std::string>();
    r.stroke_count = j.at("N").get<std::size_t>();
    for (const json& b : j.at("labels")) r.labels.bits.push_back(b.get<std::uint8_t>());
    r.products = product_sequence(r.labels);
    if (!j.at("e").is_null()) r.epitome_index = j.at("e").get<std::size_t>();
    if (!j.at("score").is_null()) r.score = j.at("score").get<double>();
    if (j.at("epitomizable").get<bool>() != r.epitomizable()) throw DataError("epitomizable flag disagrees with e");
  } catch (const json::exception& e) {
    throw DataError(std::string("results record: ") + e.what());
  }
  try {
    check_result(r);
  } catch (const InvariantError& e) {
    throw DataError(e.what());
  }
  return r;
}

std::vector<EpitomeResult> read_results(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read results " + path.string());
  std::vector<EpitomeResult> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(parse_ndjson_record(line));
    } catch (const DataError& e) {
      throw DataError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace epitome
