#pragma once

#include <ostream>
#include <string>

#include "tvdw/cli/config.hpp"
#include "tvdw/report.hpp"

namespace tvdw {

inline constexpr int kExitPass = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitCheckFailed = 2;

/// Runs the experiment and returns its report with the manifest filled in.
/// Throws ConfigError for invalid parameters and PreconditionFailed when the
/// experiment's hypotheses do not hold.
ExperimentReport build_report(const RunConfig& config);

/// <out>/<experiment>/<manifest hash>
std::string output_directory(const RunConfig& config);

/// Writes report.json, one CSV per table and optional SVG plots.
void write_outputs(const RunConfig& config, const ExperimentReport& report);

/// One line per statistic.
void print_summary(std::ostream& out, const ExperimentReport& report);

/// Full run: build, persist, summarise. Returns the process exit status.
int run(const RunConfig& config, std::ostream& out, std::ostream& err);

}  // namespace tvdw
