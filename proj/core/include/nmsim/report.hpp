#pragma once

#include <string>
#include <vector>

#include "nmsim/benchmark.hpp"

namespace nmsim {

inline constexpr const char *kReportSchema = "nmsim.report/1";
inline constexpr const char *kSweepSchema = "nmsim.sweep/1";
inline constexpr const char *kCompareSchema = "nmsim.compare/1";

/// Hierarchical JSON document; keys sorted, so output is byte-stable.
std::string report_to_json(const SimReport &report);

/// Comma-separated, first line `# schema: ...`.
std::string comparison_to_csv(const std::vector<ComparisonRow> &rows);
std::string sweep_to_csv(const std::vector<SweepEntry> &entries);

/// Fixed-width console table.
std::string comparison_table(const std::vector<ComparisonRow> &rows);

std::string calibration_to_json(const CalibrationResult &result);

} // namespace nmsim
