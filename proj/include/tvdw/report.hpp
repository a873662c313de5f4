#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

namespace tvdw {

inline constexpr const char* kSoftwareVersion = "0.1.0";
inline constexpr const char* kReportSchema = "tvdw.report/1";

enum class Verdict { pass, fail, info };
std::string to_string(Verdict v);

/// A reported number with its acceptance interval. Info statistics carry no
/// interval and never affect the overall verdict.
struct Statistic {
  std::string name;
  double value = 0.0;
  std::optional<double> lower;
  std::optional<double> upper;
  Verdict verdict = Verdict::info;
  std::string note;
};

struct SeedManifest {
  std::uint64_t seed = 0;
  std::string stream_assignment;
  std::uint64_t replicas = 0;
  std::string version = kSoftwareVersion;
  std::string config_hash;
};

struct Table {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

struct ExperimentReport {
  std::string name;
  nlohmann::json parameters = nlohmann::json::object();
  SeedManifest manifest;
  std::vector<Statistic> statistics;
  std::vector<Table> tables;
  std::vector<std::string> notes;

  /// Adds a checked statistic; pass iff lower <= value <= upper (NaN fails).
  Statistic& check(std::string name, double value, std::optional<double> lower, std::optional<double> upper,
                   std::string note = {});
  Statistic& info(std::string name, double value, std::string note = {});

  bool passed() const;
  const Statistic& stat(const std::string& name) const;
  const Table& table(const std::string& name) const;

  nlohmann::json to_json() const;
};

void write_table_csv(std::ostream& out, const Table& table);

struct SvgSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

/// Minimal line chart; presentation only.
std::string svg_line_chart(const std::string& title, const std::vector<SvgSeries>& series);

}  // namespace tvdw
