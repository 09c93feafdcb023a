#include <sstream>

#include "epitome/error.hpp"
#include "epitome/raster.hpp"
#include "json.hpp"

namespace epitome {

using nlohmann::json;

const std::vector<Transform>& default_battery() {
  static const std::vector<Transform> battery = [] {
    std::vector<Transform> b;
    b.push_back(Transform::identity());
    b.push_back(Transform::mirror());
    for (double deg : {-15.0, -5.0, 5.0, 15.0}) b.push_back(Transform::rotate(deg));
    for (int dx : {-15, -5, 5, 15}) {
      for (int dy : {-15, -5, 5, 15}) b.push_back(Transform::shift(dx, dy));
    }
    b.push_back(Transform::shift(5, 0));
    b.push_back(Transform::shift(-5, 0));
    b.push_back(Transform::shift(0, 5));
    b.push_back(Transform::shift(0, -5));
    for (double pct : {-7.0, -3.0, 3.0, 7.0}) b.push_back(Transform::zoom(pct));
    return b;
  }();
  return battery;
}

std::string Transform::describe() const {
  std::ostringstream os;
  switch (kind) {
    case TransformKind::kIdentity: os << "identity"; break;
    case TransformKind::kMirror: os << "mirror"; break;
    case TransformKind::kRotate: os << "rotate(" << rotate_degrees << "deg)"; break;
    case TransformKind::kShift: os << "shift(" << shift_x << "," << shift_y << ")"; break;
    case TransformKind::kZoom: os << "zoom(" << zoom_percent << "%)"; break;
  }
  return os.str();
}

namespace {

json to_json(const Transform& t) {
  switch (t.kind) {
    case TransformKind::kIdentity: return {{"kind", "identity"}};
    case TransformKind::kMirror: return {{"kind", "mirror"}};
    case TransformKind::kRotate: return {{"kind", "rotate"}, {"degrees", t.rotate_degrees}};
    case TransformKind::kShift: return {{"kind", "shift"}, {"dx", t.shift_x}, {"dy", t.shift_y}};
    case TransformKind::kZoom: return {{"kind", "zoom"}, {"percent", t.zoom_percent}};
  }
  return {};
}

Transform from_json(const json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "identity") return Transform::identity();
  if (kind == "mirror") return Transform::mirror();
  if (kind == "rotate") return Transform::rotate(j.at("degrees").get<double>());
  if (kind == "shift") return Transform::shift(j.at("dx").get<int>(), j.at("dy").get<int>());
  if (kind == "zoom") return Transform::zoom(j.at("percent").get<double>());
  throw DataError("unknown transform kind '" + kind + "'");
}

}  // namespace

std::string battery_to_json(const std::vector<Transform>& battery) {
  json list = json::array();
  for (const Transform& t : battery) list.push_back(to_json(t));
  return list.dump(2);
}

std::vector<Transform> battery_from_json(std::string_view text) {
  std::vector<Transform> battery;
  try {
    const json list = json::parse(text.begin(), text.end());
    if (!list.is_array()) throw DataError("augmentation manifest must be a JSON array");
    for (const json& j : list) battery.push_back(from_json(j));
  } catch (const json::exception& e) {
    throw DataError(std::string("augmentation manifest: ") + e.what());
  }
  if (battery.size() != kBatterySize) {
    throw DataError("augmentation manifest must list exactly 30 transforms, got " +
                    std::to_string(battery.size()));
  }
  return battery;
}

std::vector<Canvas> augment(const Canvas& dilated, const std::vector<Transform>& battery) {
  if (battery.size() != kBatterySize) throw DataError("augmentation battery must hold 30 transforms");
  std::vector<Canvas> out(battery.size());
#pragma omp parallel for schedule(dynamic, 1)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(battery.size()); ++i) {
    out[i] = apply_transform(dilated, battery[i]);
  }
  return out;
}

}  // namespace epitome
