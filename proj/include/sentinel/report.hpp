#pragma once

#include <cstddef>
#include <string>
#include <string_view>

#include "sentinel/metrics.hpp"

namespace sentinel {

/// Rounds the shortest round-trip decimal form of value to the given number
/// of places, breaking exact decimal ties toward the even digit.
/// round_half_even(0.9625, 3) == "0.962", round_half_even(0.9635, 3) == "0.964".
std::string round_half_even(double value, int decimals);

/// A ratio as a percentage with one decimal: 0.87 -> "87.0%".
std::string format_percent(double ratio);

/// "all 64 68 0.961 0.838 0.926 0.582"
std::string render_summary_row(const ClassRow& row);

inline constexpr std::string_view kSummaryHeader =
    "Class Images Instances Box(P R mAP50 mAP50-95)";

enum class ReportFormat { Text, Csv };

/// Summary table (header, "all" row, one row per class), then the confusion
/// matrix as a comma-delimited table, then accuracy as a percentage.
std::string render_report(const MetricsReport& report, ReportFormat format);

/// Confusion matrix as comma-delimited rows; first row and column carry the
/// class names plus "background".
std::string render_confusion_csv(const MetricsReport& report);

}  // namespace sentinel
