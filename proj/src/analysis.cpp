#include "epitome/analysis.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "epitome/error.hpp"

namespace epitome {

namespace fs = std::filesystem;

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// Short form for SVG coordinates.
std::string coord(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::map<std::string, std::vector<double>> scores_by_category(std::span<const EpitomeResult> results) {
  std::map<std::string, std::vector<double>> by;
  for (const EpitomeResult& r : results) {
    if (r.epitomizable()) by[r.category].push_back(*r.score);
  }
  if (by.empty()) throw DataError("no epitomizable results");
  return by;
}

double parse_double(std::string_view s) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) throw DataError("bad number '" + std::string(s) + "'");
  return v;
}

const char* const kPalette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                                "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

}  // namespace

double median_of(std::vector<double> values) {
  if (values.empty()) throw DataError("median of an empty set");
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

std::vector<CategoryStats> category_stats(std::span<const EpitomeResult> results) {
  std::vector<CategoryStats> out;
  for (auto& [category, scores] : scores_by_category(results)) {
    CategoryStats s;
    s.category = category;
    s.n = scores.size();
    s.median = median_of(scores);
    if (s.n > 1) {
      double mean = 0.0;
      for (double v : scores) mean += v;
      mean /= static_cast<double>(s.n);
      double ss = 0.0;
      for (double v : scores) ss += (v - mean) * (v - mean);
      s.standard_error = std::sqrt(ss / static_cast<double>(s.n - 1)) / std::sqrt(static_cast<double>(s.n));
    }
    s.bar_low = std::clamp(s.median - s.standard_error, 0.0, 1.0);
    s.bar_high = std::clamp(s.median + s.standard_error, 0.0, 1.0);
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<ExceedanceCurve> exceedance_curves(std::span<const EpitomeResult> results,
                                               std::span<const double> thresholds) {
  for (std::size_t i = 0; i < thresholds.size(); ++i) {
    if (!(thresholds[i] >= 0.0 && thresholds[i] <= 1.0)) throw DataError("thresholds must lie in [0, 1]");
    if (i > 0 && thresholds[i] <= thresholds[i - 1]) throw DataError("thresholds must be ascending");
  }
  std::vector<ExceedanceCurve> out;
  for (auto& [category, scores] : scores_by_category(results)) {
    ExceedanceCurve c;
    c.category = category;
    c.thresholds.assign(thresholds.begin(), thresholds.end());
    for (double t : thresholds) {
      const auto above = std::count_if(scores.begin(), scores.end(), [t](double s) { return s > t; });
      c.fractions.push_back(static_cast<double>(above) / static_cast<double>(scores.size()));
    }
    out.push_back(std::move(c));
  }
  return out;
}

std::vector<HeadlineFraction> headline_fractions(std::span<const CategoryStats> stats, std::span<const double> cutoffs) {
  if (stats.empty()) throw DataError("no category statistics");
  std::vector<HeadlineFraction> out;
  for (double cut : cutoffs) {
    HeadlineFraction h;
    h.cutoff = cut;
    h.total = stats.size();
    h.below = static_cast<std::size_t>(
        std::count_if(stats.begin(), stats.end(), [cut](const CategoryStats& s) { return s.median < cut; }));
    out.push_back(h);
  }
  return out;
}

std::vector<double> parse_number_list(const std::string& text) {
  std::vector<double> out;
  if (text.find(':') != std::string::npos) {
    const auto a = text.find(':');
    const auto b = text.find(':', a + 1);
    if (b == std::string::npos) throw DataError("range must be lo:hi:step");
    const double lo = parse_double(std::string_view(text).substr(0, a));
    const double hi = parse_double(std::string_view(text).substr(a + 1, b - a - 1));
    const double step = parse_double(std::string_view(text).substr(b + 1));
    if (!(step > 0.0) || hi < lo) throw DataError("range needs lo <= hi and a positive step");
    for (long k = 0;; ++k) {
      double v = lo + static_cast<double>(k) * step;
      if (v > hi + 1e-9 * step) break;
      out.push_back(std::min(v, hi));
    }
    return out;
  }
  std::string_view rest = text;
  while (!rest.empty()) {
    const auto comma = rest.find(',');
    out.push_back(parse_double(rest.substr(0, comma)));
    if (comma == std::string_view::npos) break;
    rest.remove_prefix(comma + 1);
  }
  return out;
}

std::string category_stats_csv(std::span<const CategoryStats> stats) {
  std::string out = "category,n,median,stderr,bar_low,bar_high\n";
  for (const CategoryStats& s : stats) {
    out += csv_field(s.category) + "," + std::to_string(s.n) + "," + num(s.median) + "," + num(s.standard_error) +
           "," + num(s.bar_low) + "," + num(s.bar_high) + "\n";
  }
  return out;
}

std::string exceedance_csv(std::span<const ExceedanceCurve> curves) {
  std::string out = "category,threshold,fraction\n";
  for (const ExceedanceCurve& c : curves) {
    for (std::size_t i = 0; i < c.thresholds.size(); ++i) {
      out += csv_field(c.category) + "," + num(c.thresholds[i]) + "," + num(c.fractions[i]) + "\n";
    }
  }
  return out;
}

std::vector<CategoryStats> parse_category_stats_csv(std::string_view text) {
  std::vector<CategoryStats> out;
  std::istringstream in{std::string(text)};
  std::string line;
  if (!std::getline(in, line) || line != "category,n,median,stderr,bar_low,bar_high") {
    throw DataError("category_stats.csv: unexpected header");
  }
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
      const char c = line[i];
      if (quoted) {
        if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
          cur += '"';
          ++i;
        } else if (c == '"') {
          quoted = false;
        } else {
          cur += c;
        }
      } else if (c == '"') {
        quoted = true;
      } else if (c == ',') {
        fields.push_back(std::move(cur));
        cur.clear();
      } else {
        cur += c;
      }
    }
    fields.push_back(std::move(cur));
    if (fields.size() != 6) throw DataError("category_stats.csv: expected 6 fields");
    CategoryStats s;
    s.category = fields[0];
    s.n = static_cast<std::size_t>(parse_double(fields[1]));
    s.median = parse_double(fields[2]);
    s.standard_error = parse_double(fields[3]);
    s.bar_low = parse_double(fields[4]);
    s.bar_high = parse_double(fields[5]);
    out.push_back(std::move(s));
  }
  return out;
}

std::string median_chart_svg(std::span<const CategoryStats> stats) {
  const double left = 60, top = 30, plot_h = 300, bottom_pad = 140;
  const double step = 24;
  const double plot_w = std::max(1.0, static_cast<double>(stats.size())) * step;
  const double width = left + plot_w + 30, height = top + plot_h + bottom_pad;
  auto y_of = [&](double v) { return top + (1.0 - v) * plot_h; };

  std::ostringstream os;
  os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
     << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << coord(width) << "\" height=\""
     << coord(height) << "\">\n"
     << "<rect x=\"0\" y=\"0\" width=\"" << coord(width) << "\" height=\"" << coord(height) << "\" fill=\"white\"/>\n"
     << "<line class=\"axis\" x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\""
     << top + plot_h << "\" stroke=\"black\"/>\n"
     << "<line class=\"axis\" x1=\"" << left << "\" y1=\"" << top + plot_h << "\" x2=\"" << left + plot_w
     << "\" y2=\"" << top + plot_h << "\" stroke=\"black\"/>\n";
  for (double tick : {0.0, 0.25, 0.5, 0.75, 1.0}) {
    os << "<text x=\"" << left - 8 << "\" y=\"" << coord(y_of(tick) + 4) << "\" font-size=\"11\" text-anchor=\"end\">"
       << tick << "</text>\n";
  }
  os << "<text x=\"16\" y=\"" << coord(top + plot_h / 2) << "\" font-size=\"12\" transform=\"rotate(-90 16 "
     << coord(top + plot_h / 2) << ")\" text-anchor=\"middle\">median epitome-score</text>\n";
  for (std::size_t i = 0; i < stats.size(); ++i) {
    const CategoryStats& s = stats[i];
    const double x = left + step * (static_cast<double>(i) + 0.5);
    os << "<line class=\"errorbar\" x1=\"" << coord(x) << "\" y1=\"" << coord(y_of(s.bar_low)) << "\" x2=\""
       << coord(x) << "\" y2=\"" << coord(y_of(s.bar_high)) << "\" stroke=\"#555\" stroke-width=\"1.5\"/>\n";
    os << "<circle class=\"median\" cx=\"" << coord(x) << "\" cy=\"" << coord(y_of(s.median))
       << "\" r=\"4\" fill=\"#1f77b4\"><title>" << xml_escape(s.category) << ": " << num(s.median)
       << "</title></circle>\n";
    const double ly = top + plot_h + 10;
    os << "<text x=\"" << coord(x) << "\" y=\"" << coord(ly) << "\" font-size=\"10\" transform=\"rotate(60 "
       << coord(x) << " " << coord(ly) << ")\">" << xml_escape(s.category) << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

std::string exceedance_chart_svg(std::span<const ExceedanceCurve> curves) {
  const double left = 60, top = 30, plot_w = 420, plot_h = 300, legend_w = 180;
  const double width = left + plot_w + legend_w, height = top + plot_h + 50;
  auto x_of = [&](double t) { return left + t * plot_w; };
  auto y_of = [&](double f) { return top + (1.0 - f) * plot_h; };

  std::ostringstream os;
  os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
     << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << coord(width) << "\" height=\""
     << coord(height) << "\">\n"
     << "<rect x=\"0\" y=\"0\" width=\"" << coord(width) << "\" height=\"" << coord(height) << "\" fill=\"white\"/>\n"
     << "<line class=\"axis\" x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\""
     << top + plot_h << "\" stroke=\"black\"/>\n"
     << "<line class=\"axis\" x1=\"" << left << "\" y1=\"" << top + plot_h << "\" x2=\"" << left + plot_w
     << "\" y2=\"" << top + plot_h << "\" stroke=\"black\"/>\n";
  for (double tick : {0.0, 0.25, 0.5, 0.75, 1.0}) {
    os << "<text x=\"" << left - 8 << "\" y=\"" << coord(y_of(tick) + 4) << "\" font-size=\"11\" text-anchor=\"end\">"
       << tick * 100 << "%</text>\n";
    os << "<text x=\"" << coord(x_of(tick)) << "\" y=\"" << coord(top + plot_h + 16)
       << "\" font-size=\"11\" text-anchor=\"middle\">" << tick << "</text>\n";
  }
  os << "<text x=\"" << coord(left + plot_w / 2) << "\" y=\"" << coord(top + plot_h + 38)
     << "\" font-size=\"12\" text-anchor=\"middle\">epitome-score threshold</text>\n";
  for (std::size_t i = 0; i < curves.size(); ++i) {
    const ExceedanceCurve& c = curves[i];
    const char* color = kPalette[i % (sizeof kPalette / sizeof kPalette[0])];
    os << "<polyline class=\"curve\" fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t k = 0; k < c.thresholds.size(); ++k) {
      os << (k ? " " : "") << coord(x_of(c.thresholds[k])) << "," << coord(y_of(c.fractions[k]));
    }
    os << "\"><title>" << xml_escape(c.category) << "</title></polyline>\n";
    const double ly = top + 14.0 * static_cast<double>(i);
    os << "<text x=\"" << coord(left + plot_w + 12) << "\" y=\"" << coord(ly + 4) << "\" font-size=\"11\" fill=\""
       << color << "\">" << xml_escape(c.category) << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

void emit_report(std::span<const CategoryStats> stats, std::span<const ExceedanceCurve> curves,
                 const fs::path& out_dir) {
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw DataError("cannot create " + out_dir.string() + ": " + ec.message());
  auto write = [&](const char* name, const std::string& body) {
    const fs::path p = out_dir / name;
    std::ofstream out(p, std::ios::binary);
    if (!out) throw DataError("cannot write " + p.string());
    out << body;
    if (!out) throw DataError("cannot write " + p.string());
  };
  write("category_stats.csv", category_stats_csv(stats));
  write("exceedance.csv", exceedance_csv(curves));
  write("fig3.svg", median_chart_svg(stats));
  write("fig4.svg", exceedance_chart_svg(curves));
}

}  // namespace epitome
