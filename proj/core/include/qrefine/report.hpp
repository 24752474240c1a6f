#pragma once

#include <string>
#include <string_view>

#include "qrefine/stages.hpp"

namespace qrefine {

inline constexpr std::string_view kStageCsvHeader =
    "image_id,stage,executed,skip_reason,mask_fraction,q_before,q_after,backend,millis";

struct ReportFormat {
  /// When false the millis column is written as 0 so artifacts stay
  /// byte-identical across runs.
  bool include_timing = false;
};

/// One CSV row per stage record, no header, each line '\n'-terminated.
std::string stage_csv_rows(std::string_view image_id, const StageReport& report, ReportFormat format = {});

/// Header plus the rows of stage_csv_rows.
std::string stage_csv(std::string_view image_id, const StageReport& report, ReportFormat format = {});

/// Line-oriented key=value record: one "stage ..." line per stage, then a
/// summary line.
std::string format_report_text(std::string_view image_id, const StageReport& report, ReportFormat format = {});

/// Escapes a CSV field (quotes when it contains ',', '"' or a newline).
std::string csv_field(std::string_view value);

/// Fixed "%.6f" formatting used across every emitted artifact.
std::string fixed6(double value);

}  // namespace qrefine
