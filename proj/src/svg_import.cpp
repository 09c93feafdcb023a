// SVG import for the restricted profile used by stroke databases: one
// <path> per stroke, `d` made of moveto / lineto / cubic curveto only.

#include <algorithm>
#include <cctype>
#include <charconv>
#include <optional>
#include <string>

#include "epitome/error.hpp"
#include "epitome/sketch_io.hpp"

namespace epitome {

namespace {

struct Tag {
  std::string name;
  std::string_view attrs;
};

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r'; }

// Yields start tags in document order; skips comments, declarations and end tags.
class TagScanner {
 public:
  explicit TagScanner(std::string_view text) : text_(text) {}

  std::optional<Tag> next() {
    while (true) {
      const std::size_t lt = text_.find('<', pos_);
      if (lt == std::string_view::npos) return std::nullopt;
      if (text_.substr(lt, 4) == "<!--") {
        const std::size_t end = text_.find("-->", lt + 4);
        if (end == std::string_view::npos) throw ParseError(ParseErrorKind::kMalformed, "unterminated comment");
        pos_ = end + 3;
        continue;
      }
      const std::size_t gt = find_tag_end(lt + 1);
      pos_ = gt + 1;
      if (lt + 1 < text_.size() && (text_[lt + 1] == '/' || text_[lt + 1] == '?' || text_[lt + 1] == '!')) {
        continue;
      }
      std::size_t name_end = lt + 1;
      while (name_end < gt && !is_space(text_[name_end]) && text_[name_end] != '/') ++name_end;
      Tag tag;
      tag.name = std::string(text_.substr(lt + 1, name_end - lt - 1));
      tag.attrs = text_.substr(name_end, gt - name_end);
      return tag;
    }
  }

 private:
  std::size_t find_tag_end(std::size_t from) const {
    char quote = 0;
    for (std::size_t i = from; i < text_.size(); ++i) {
      const char c = text_[i];
      if (quote) {
        if (c == quote) quote = 0;
      } else if (c == '"' || c == '\'') {
        quote = c;
      } else if (c == '>') {
        return i;
      }
    }
    throw ParseError(ParseErrorKind::kMalformed, "unterminated tag");
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

std::optional<std::string> attribute(std::string_view attrs, std::string_view name) {
  std::size_t i = 0;
  while (i < attrs.size()) {
    while (i < attrs.size() && (is_space(attrs[i]) || attrs[i] == '/')) ++i;
    const std::size_t key_begin = i;
    while (i < attrs.size() && attrs[i] != '=' && !is_space(attrs[i])) ++i;
    const std::string_view key = attrs.substr(key_begin, i - key_begin);
    while (i < attrs.size() && is_space(attrs[i])) ++i;
    if (i >= attrs.size() || attrs[i] != '=') continue;
    ++i;
    while (i < attrs.size() && is_space(attrs[i])) ++i;
    if (i >= attrs.size()) break;
    const char quote = attrs[i];
    if (quote != '"' && quote != '\'') throw ParseError(ParseErrorKind::kMalformed, "unquoted attribute");
    const std::size_t end = attrs.find(quote, i + 1);
    if (end == std::string_view::npos) throw ParseError(ParseErrorKind::kMalformed, "unterminated attribute");
    if (key == name) return std::string(attrs.substr(i + 1, end - i - 1));
    i = end + 1;
  }
  return std::nullopt;
}

std::optional<double> parse_length(const std::string& value) {
  std::size_t i = 0;
  while (i < value.size() && is_space(value[i])) ++i;
  if (i < value.size() && value[i] == '+') ++i;
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(value.data() + i, value.data() + value.size(), out);
  if (ec != std::errc() || ptr == value.data() + i) return std::nullopt;
  return out;
}

class PathReader {
 public:
  explicit PathReader(std::string_view d) : d_(d) {}

  void skip_separators() {
    while (pos_ < d_.size() && (is_space(d_[pos_]) || d_[pos_] == ',')) ++pos_;
  }

  bool at_end() {
    skip_separators();
    return pos_ >= d_.size();
  }

  bool at_number() {
    skip_separators();
    if (pos_ >= d_.size()) return false;
    const char c = d_[pos_];
    return std::isdigit(static_cast<unsigned char>(c)) || c == '-' || c == '+' || c == '.';
  }

  char command() {
    skip_separators();
    return d_[pos_++];
  }

  double number() {
    skip_separators();
    std::size_t start = pos_;
    if (start < d_.size() && d_[start] == '+') ++start;
    double out = 0.0;
    const auto [ptr, ec] = std::from_chars(d_.data() + start, d_.data() + d_.size(), out);
    if (ec != std::errc() || ptr == d_.data() + start) {
      throw ParseError(ParseErrorKind::kMalformed, "bad number in path data");
    }
    pos_ = static_cast<std::size_t>(ptr - d_.data());
    return out;
  }

  Point point(const Point& origin, bool relative) {
    const double x = number();
    const double y = number();
    return relative ? Point{origin.x + x, origin.y + y} : Point{x, y};
  }

 private:
  std::string_view d_;
  std::size_t pos_ = 0;
};

Point bezier(const Point& p0, const Point& p1, const Point& p2, const Point& p3, double t) {
  const double u = 1.0 - t;
  const double b0 = u * u * u, b1 = 3 * u * u * t, b2 = 3 * u * t * t, b3 = t * t * t;
  return {b0 * p0.x + b1 * p1.x + b2 * p2.x + b3 * p3.x, b0 * p0.y + b1 * p1.y + b2 * p2.y + b3 * p3.y};
}

Stroke parse_path_data(std::string_view d) {
  PathReader reader(d);
  Stroke stroke;
  Point current{0.0, 0.0};
  char active = 0;
  bool started = false;

  while (!reader.at_end()) {
    if (!reader.at_number()) {
      active = reader.command();
      if (active == 'M' || active == 'm') {
        if (started) throw ParseError(ParseErrorKind::kUnsupportedCommand, "multiple subpaths in one path");
        current = reader.point(current, active == 'm');
        stroke.points.push_back(current);
        started = true;
        // Coordinate pairs after a moveto are implicit linetos.
        active = active == 'm' ? 'l' : 'L';
        continue;
      }
      if (active != 'L' && active != 'l' && active != 'C' && active != 'c') {
        throw ParseError(ParseErrorKind::kUnsupportedCommand, std::string(1, active));
      }
    }
    if (!started) throw ParseError(ParseErrorKind::kMalformed, "path data must begin with a moveto");
    if (active == 'L' || active == 'l') {
      current = reader.point(current, active == 'l');
      stroke.points.push_back(current);
    } else if (active == 'C' || active == 'c') {
      const bool rel = active == 'c';
      const Point c1 = reader.point(current, rel);
      const Point c2 = reader.point(current, rel);
      const Point end = reader.point(current, rel);
      for (int k = 1; k <= kCubicSamples; ++k) {
        stroke.points.push_back(bezier(current, c1, c2, end, static_cast<double>(k) / kCubicSamples));
      }
      stroke.points.back() = end;
      current = end;
    } else {
      throw ParseError(ParseErrorKind::kMalformed, "coordinates without a command");
    }
  }
  return stroke;
}

}  // namespace

Sketch import_svg(std::string_view text, std::string category, std::string id) {
  Sketch sketch;
  sketch.id = id.empty() ? "sketch" : std::move(id);
  sketch.category = std::move(category);

  TagScanner scanner(text);
  bool have_svg = false;
  while (auto tag = scanner.next()) {
    if (tag->name == "svg" && !have_svg) {
      have_svg = true;
      const auto w = attribute(tag->attrs, "width");
      const auto h = attribute(tag->attrs, "height");
      const auto wv = w ? parse_length(*w) : std::nullopt;
      const auto hv = h ? parse_length(*h) : std::nullopt;
      if (!wv || !hv || *wv <= 0.0 || *hv <= 0.0) {
        throw ParseError(ParseErrorKind::kMissingDimensions, "svg width/height");
      }
      sketch.extent = {*wv, *hv};
    } else if (tag->name == "path") {
      if (!have_svg) throw ParseError(ParseErrorKind::kMissingDimensions, "path before <svg>");
      const auto d = attribute(tag->attrs, "d");
      if (!d) throw ParseError(ParseErrorKind::kMissingField, "path without d");
      sketch.strokes.push_back(parse_path_data(*d));
    }
  }
  if (!have_svg) throw ParseError(ParseErrorKind::kMissingDimensions, "no <svg> element");
  if (sketch.strokes.empty()) throw ParseError(ParseErrorKind::kNoPaths, sketch.id);

  for (Stroke& s : sketch.strokes) {
    for (Point& p : s.points) {
      p.x = std::clamp(p.x, 0.0, sketch.extent.width);
      p.y = std::clamp(p.y, 0.0, sketch.extent.height);
    }
  }
  validate_sketch(sketch);
  return sketch;
}

}  // namespace epitome
