#include "stackmc/report_io.hpp"

#include "stackmc/config_io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace stackmc {

namespace {

using nlohmann::json;

std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

json num(double v) {
  if (std::isfinite(v)) return v;
  return fmt(v);
}

double get_num(const json& j, const char* key) {
  const json& v = j.at(key);
  if (v.is_string()) {
    const std::string s = v.get<std::string>();
    if (s == "inf") return INFINITY;
    if (s == "-inf") return -INFINITY;
    if (s == "nan") return NAN;
    throw std::invalid_argument(std::string("report: bad number for ") + key);
  }
  return v.get<double>();
}

void csv_row(std::ostream& os, const ReportRow& r) {
  os << to_string(r.method) << ',' << fmt(r.price) << ',' << fmt(r.ci) << ',' << fmt(r.runtime_s) << ','
     << fmt(r.alpha) << ',' << fmt(r.rho) << ',' << fmt(r.abs_improvement) << ','
     << fmt(r.improvement_ratio) << ',' << fmt(r.total_time) << ',' << fmt(r.equivalent_time) << '\n';
}

json result_json(const MethodResult& m) {
  return {{"method", to_string(m.method)}, {"price", num(m.price)},   {"ci", num(m.ci)},
          {"runtime_s", num(m.runtime_s)}, {"alpha", num(m.alpha)},   {"rho", num(m.rho)},
          {"fell_back", m.fell_back}};
}

MethodResult result_from(const json& j) {
  MethodResult m;
  m.method = parse_method(j.at("method").get<std::string>());
  m.price = get_num(j, "price");
  m.ci = get_num(j, "ci");
  m.runtime_s = get_num(j, "runtime_s");
  m.alpha = get_num(j, "alpha");
  m.rho = get_num(j, "rho");
  m.fell_back = j.at("fell_back").get<bool>();
  return m;
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  out << content;
  out.flush();
  if (!out) throw std::runtime_error("failed writing '" + path + "'");
}

}  // namespace

ReportFormat parse_format(const std::string& s) {
  if (s == "csv") return ReportFormat::csv;
  if (s == "json") return ReportFormat::json;
  throw ConfigError("format", "expected 'csv' or 'json', got '" + s + "'");
}

std::string report_csv(const ExperimentReport& report) {
  std::ostringstream os;
  os << kCsvHeader << '\n';
  for (const auto& row : report.rows) csv_row(os, row);
  return os.str();
}

json report_to_json(const ExperimentReport& report) {
  json j;
  j["config"] = config_to_json(report.config);
  j["seeds"] = report.seeds;
  j["mc_ci"] = num(report.mc_ci);
  j["mc_runtime_s"] = num(report.mc_runtime_s);
  j["rows"] = json::array();
  for (const auto& r : report.rows)
    j["rows"].push_back({{"method", to_string(r.method)},
                         {"price", num(r.price)},
                         {"ci", num(r.ci)},
                         {"runtime_s", num(r.runtime_s)},
                         {"alpha", num(r.alpha)},
                         {"rho", num(r.rho)},
                         {"abs_improvement", num(r.abs_improvement)},
                         {"improvement_ratio", num(r.improvement_ratio)},
                         {"total_time", num(r.total_time)},
                         {"equivalent_time", num(r.equivalent_time)},
                         {"time_units", num(r.time_units)},
                         {"fallbacks", r.fallbacks}});
  j["runs"] = json::array();
  for (const auto& run : report.runs) {
    json rj{{"seed", run.seed}, {"baseline", result_json(run.baseline)},
            {"heston_clamp_rate", num(run.heston_clamp_rate)}, {"results", json::array()}};
    for (const auto& m : run.results) rj["results"].push_back(result_json(m));
    j["runs"].push_back(std::move(rj));
  }
  return j;
}

ExperimentReport report_from_json(const json& j) {
  ExperimentReport report;
  report.config = config_from_json(j.at("config"));
  report.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
  report.mc_ci = get_num(j, "mc_ci");
  report.mc_runtime_s = get_num(j, "mc_runtime_s");
  for (const auto& rj : j.at("rows")) {
    ReportRow r;
    r.method = parse_method(rj.at("method").get<std::string>());
    r.price = get_num(rj, "price");
    r.ci = get_num(rj, "ci");
    r.runtime_s = get_num(rj, "runtime_s");
    r.alpha = get_num(rj, "alpha");
    r.rho = get_num(rj, "rho");
    r.abs_improvement = get_num(rj, "abs_improvement");
    r.improvement_ratio = get_num(rj, "improvement_ratio");
    r.total_time = get_num(rj, "total_time");
    r.equivalent_time = get_num(rj, "equivalent_time");
    r.time_units = get_num(rj, "time_units");
    r.fallbacks = rj.at("fallbacks").get<unsigned>();
    report.rows.push_back(r);
  }
  for (const auto& rj : j.at("runs")) {
    RunResult run;
    run.seed = rj.at("seed").get<std::uint64_t>();
    run.baseline = result_from(rj.at("baseline"));
    run.heston_clamp_rate = get_num(rj, "heston_clamp_rate");
    for (const auto& m : rj.at("results")) run.results.push_back(result_from(m));
    report.runs.push_back(std::move(run));
  }
  return report;
}

std::string sweep_csv(const std::vector<SweepPoint>& points) {
  std::ostringstream os;
  os << "axis,value," << kCsvHeader << '\n';
  for (const auto& p : points)
    for (const auto& row : p.report.rows) {
      os << to_string(p.axis) << ',' << fmt(p.value) << ',';
      csv_row(os, row);
    }
  return os.str();
}

json sweep_to_json(const std::vector<SweepPoint>& points) {
  json j = json::array();
  for (const auto& p : points)
    j.push_back({{"axis", to_string(p.axis)}, {"value", num(p.value)}, {"report", report_to_json(p.report)}});
  return j;
}

void emit_report(const ExperimentReport& report, ReportFormat format, const std::string& path) {
  write_file(path, format == ReportFormat::csv ? report_csv(report) : report_to_json(report).dump(2) + "\n");
}

void emit_sweep(const std::vector<SweepPoint>& points, ReportFormat format, const std::string& path) {
  write_file(path, format == ReportFormat::csv ? sweep_csv(points) : sweep_to_json(points).dump(2) + "\n");
}

}  // namespace stackmc
