#include "tvdw/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace tvdw {

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::pass: return "pass";
    case Verdict::fail: return "fail";
    case Verdict::info: return "info";
  }
  return "info";
}

Statistic& ExperimentReport::check(std::string stat_name, double value, std::optional<double> lower,
                                   std::optional<double> upper, std::string note) {
  Statistic s;
  s.name = std::move(stat_name);
  s.value = value;
  s.lower = lower;
  s.upper = upper;
  const bool ok = !std::isnan(value) && (!lower || value >= *lower) && (!upper || value <= *upper);
  s.verdict = ok ? Verdict::pass : Verdict::fail;
  s.note = std::move(note);
  statistics.push_back(std::move(s));
  return statistics.back();
}

Statistic& ExperimentReport::info(std::string stat_name, double value, std::string note) {
  Statistic s;
  s.name = std::move(stat_name);
  s.value = value;
  s.note = std::move(note);
  statistics.push_back(std::move(s));
  return statistics.back();
}

bool ExperimentReport::passed() const {
  return std::none_of(statistics.begin(), statistics.end(), [](const Statistic& s) { return s.verdict == Verdict::fail; });
}

const Statistic& ExperimentReport::stat(const std::string& stat_name) const {
  for (const auto& s : statistics) {
    if (s.name == stat_name) return s;
  }
  throw std::out_of_range("report " + name + " has no statistic " + stat_name);
}

const Table& ExperimentReport::table(const std::string& table_name) const {
  for (const auto& t : tables) {
    if (t.name == table_name) return t;
  }
  throw std::out_of_range("report " + name + " has no table " + table_name);
}

namespace {

nlohmann::json number(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return "nan";
  return v > 0 ? "inf" : "-inf";
}

nlohmann::json bound(const std::optional<double>& b) { return b ? number(*b) : nlohmann::json(nullptr); }

}  // namespace

nlohmann::json ExperimentReport::to_json() const {
  nlohmann::json j;
  j["schema"] = kReportSchema;
  j["experiment"] = name;
  j["parameters"] = parameters;
  j["manifest"] = {{"seed", manifest.seed},
                   {"stream_assignment", manifest.stream_assignment},
                   {"replicas", manifest.replicas},
                   {"version", manifest.version},
                   {"config_hash", manifest.config_hash}};
  auto stats = nlohmann::json::array();
  for (const auto& s : statistics) {
    stats.push_back({{"name", s.name},
                     {"value", number(s.value)},
                     {"lower", bound(s.lower)},
                     {"upper", bound(s.upper)},
                     {"verdict", to_string(s.verdict)},
                     {"note", s.note}});
  }
  j["statistics"] = stats;
  auto tabs = nlohmann::json::array();
  for (const auto& t : tables) tabs.push_back({{"name", t.name}, {"columns", t.columns}, {"rows", t.rows.size()}});
  j["tables"] = tabs;
  j["notes"] = notes;
  j["passed"] = passed();
  return j;
}

void write_table_csv(std::ostream& out, const Table& table) {
  for (std::size_t c = 0; c < table.columns.size(); ++c) out << (c ? "," : "") << table.columns[c];
  out << '\n';
  char buf[32];
  for (const auto& row : table.rows) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      std::snprintf(buf, sizeof buf, "%.17g", row[c]);
      out << (c ? "," : "") << buf;
    }
    out << '\n';
  }
}

std::string svg_line_chart(const std::string& title, const std::vector<SvgSeries>& series) {
  constexpr double kWidth = 640, kHeight = 400, kMargin = 48;
  double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin, ymin = xmin, ymax = -xmin;
  for (const auto& s : series) {
    for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      xmin = std::min(xmin, s.x[i]);
      xmax = std::max(xmax, s.x[i]);
      ymin = std::min(ymin, s.y[i]);
      ymax = std::max(ymax, s.y[i]);
    }
  }
  if (!(xmax > xmin)) xmax = xmin + 1;
  if (!(ymax > ymin)) ymax = ymin + 1;
  auto px = [&](double x) { return kMargin + (x - xmin) / (xmax - xmin) * (kWidth - 2 * kMargin); };
  auto py = [&](double y) { return kHeight - kMargin - (y - ymin) / (ymax - ymin) * (kHeight - 2 * kMargin); };
  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd"};
  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight << "\">\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  o << "<text x=\"" << kMargin << "\" y=\"24\" font-family=\"sans-serif\" font-size=\"14\">" << title << "</text>\n";
  o << "<rect x=\"" << kMargin << "\" y=\"" << kMargin << "\" width=\"" << kWidth - 2 * kMargin << "\" height=\""
    << kHeight - 2 * kMargin << "\" fill=\"none\" stroke=\"#888\"/>\n";
  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& s = series[k];
    o << "<polyline fill=\"none\" stroke=\"" << colors[k % 5] << "\" points=\"";
    for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
      if (std::isfinite(s.x[i]) && std::isfinite(s.y[i])) o << px(s.x[i]) << ',' << py(s.y[i]) << ' ';
    }
    o << "\"/>\n";
    o << "<text x=\"" << kWidth - kMargin - 150 << "\" y=\"" << kMargin + 16 * (k + 1) << "\" fill=\"" << colors[k % 5]
      << "\" font-family=\"sans-serif\" font-size=\"12\">" << s.label << "</text>\n";
  }
  o << "<text x=\"" << kMargin << "\" y=\"" << kHeight - 16 << "\" font-family=\"sans-serif\" font-size=\"11\">x: ["
    << xmin << ", " << xmax << "]  y: [" << ymin << ", " << ymax << "]</text>\n";
  o << "</svg>\n";
  return o.str();
}

}  // namespace tvdw
