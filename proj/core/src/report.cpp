#include "qrefine/report.hpp"

#include <cstdio>

namespace qrefine {

std::string fixed6(double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", value);
  return buf;
}

namespace {

std::string millis_text(double millis, ReportFormat format) {
  if (!format.include_timing) return "0";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3f", millis);
  return buf;
}

}  // namespace

std::string csv_field(std::string_view value) {
  if (value.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(value);
  std::string out = "\"";
  for (char c : value) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::string stage_csv_rows(std::string_view image_id, const StageReport& report, ReportFormat format) {
  std::string out;
  for (const auto& r : report.stages) {
    out += csv_field(image_id);
    out += ',' + std::to_string(r.stage);
    out += ',' + std::string(r.executed ? "1" : "0");
    out += ',' + csv_field(r.skip_reason);
    out += ',' + fixed6(r.mask_fraction);
    out += ',' + fixed6(r.q_before);
    out += ',' + fixed6(r.q_after);
    out += ',' + csv_field(r.backend);
    out += ',' + millis_text(r.millis, format);
    out += '\n';
  }
  return out;
}

std::string stage_csv(std::string_view image_id, const StageReport& report, ReportFormat format) {
  return std::string(kStageCsvHeader) + "\n" + stage_csv_rows(image_id, report, format);
}

std::string format_report_text(std::string_view image_id, const StageReport& report, ReportFormat format) {
  std::string out;
  for (const auto& r : report.stages) {
    out += "stage=" + std::to_string(r.stage);
    out += " executed=" + std::string(r.executed ? "1" : "0");
    out += " skip_reason=" + (r.skip_reason.empty() ? std::string("-") : r.skip_reason);
    out += " mask_fraction=" + fixed6(r.mask_fraction);
    out += " q_before=" + fixed6(r.q_before);
    out += " q_after=" + fixed6(r.q_after);
    out += " backend=" + r.backend;
    out += " millis=" + millis_text(r.millis, format);
    out += '\n';
  }
  out += "image_id=" + std::string(image_id);
  out += " q_initial=" + fixed6(report.q_initial);
  out += " q_final=" + fixed6(report.q_final);
  out += " complete=" + std::string(report.complete ? "1" : "0");
  out += '\n';
  return out;
}

}  // namespace qrefine
