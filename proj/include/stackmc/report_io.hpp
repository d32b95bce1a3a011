#pragma once

#include "stackmc/harness.hpp"

#include "json.hpp"

#include <string>
#include <vector>

namespace stackmc {

enum class ReportFormat { csv, json };
ReportFormat parse_format(const std::string& s);

inline constexpr const char* kCsvHeader =
    "method,price,ci,runtime_s,alpha,rho,abs_improvement,improvement_ratio,total_time,equivalent_time";

/// Header line plus one line per row, numbers with 17 significant digits.
std::string report_csv(const ExperimentReport& report);

/// Rows (with time_units and fallbacks), the resolved config, the seed list
/// and every per-run result. Non-finite numbers are written as the strings
/// "inf", "-inf" and "nan".
nlohmann::json report_to_json(const ExperimentReport& report);
ExperimentReport report_from_json(const nlohmann::json& j);

/// Long format: "axis,value," followed by the report columns.
std::string sweep_csv(const std::vector<SweepPoint>& points);
nlohmann::json sweep_to_json(const std::vector<SweepPoint>& points);

/// Writes the report; I/O failures throw std::runtime_error naming the path.
void emit_report(const ExperimentReport& report, ReportFormat format, const std::string& path);
void emit_sweep(const std::vector<SweepPoint>& points, ReportFormat format, const std::string& path);

}  // namespace stackmc
