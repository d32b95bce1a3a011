#include "stackmc/config_io.hpp"

#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace stackmc {

namespace {

using nlohmann::json;

void reject_unknown(const json& j, const std::set<std::string>& allowed, const std::string& prefix) {
  for (const auto& [key, _] : j.items())
    if (!allowed.count(key)) throw ConfigError(prefix + key, "unknown key");
}

double get_number(const json& j, const std::string& key, double fallback, const std::string& field) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_number()) throw ConfigError(field, "expected a number");
  return j.at(key).get<double>();
}

std::uint64_t get_count(const json& j, const std::string& key, std::uint64_t fallback,
                        const std::string& field) {
  if (!j.contains(key)) return fallback;
  const json& v = j.at(key);
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (v.is_number_integer() && v.get<std::int64_t>() >= 0) return static_cast<std::uint64_t>(v.get<std::int64_t>());
  if (v.is_number_float()) {
    const double d = v.get<double>();
    if (d >= 0.0 && d == static_cast<double>(static_cast<std::uint64_t>(d)))
      return static_cast<std::uint64_t>(d);
  }
  throw ConfigError(field, "expected a non-negative integer");
}

std::string get_string(const json& j, const std::string& key, const std::string& fallback) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_string()) throw ConfigError(key, "expected a string");
  return j.at(key).get<std::string>();
}

template <class F>
auto wrap(const std::string& field, F&& f) {
  try {
    return f();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::invalid_argument& e) {
    throw ConfigError(field, e.what());
  }
}

}  // namespace

ExperimentConfig config_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("config", "expected a JSON object");
  reject_unknown(j, {"model", "bs", "heston", "payoff", "n_paths", "n_steps", "spacing", "cv", "fit",
                     "methods", "runs", "seed", "seeds", "parallel", "threads", "sweep"},
                 "");
  ExperimentConfig cfg;
  cfg.model = parse_model(get_string(j, "model", to_string(cfg.model)));
  if (j.contains("bs")) {
    const json& b = j.at("bs");
    if (!b.is_object()) throw ConfigError("bs", "expected an object");
    reject_unknown(b, {"s0", "strike", "r", "sigma", "maturity"}, "bs.");
    cfg.bs.s0 = get_number(b, "s0", cfg.bs.s0, "bs.s0");
    cfg.bs.strike = get_number(b, "strike", cfg.bs.strike, "bs.strike");
    cfg.bs.r = get_number(b, "r", cfg.bs.r, "bs.r");
    cfg.bs.sigma = get_number(b, "sigma", cfg.bs.sigma, "bs.sigma");
    cfg.bs.maturity = get_number(b, "maturity", cfg.bs.maturity, "bs.maturity");
  }
  if (j.contains("heston")) {
    const json& h = j.at("heston");
    if (!h.is_object()) throw ConfigError("heston", "expected an object");
    reject_unknown(h, {"s0", "strike", "r", "maturity", "v0", "kappa", "theta", "xi", "varrho"}, "heston.");
    cfg.heston.s0 = get_number(h, "s0", cfg.heston.s0, "heston.s0");
    cfg.heston.strike = get_number(h, "strike", cfg.heston.strike, "heston.strike");
    cfg.heston.r = get_number(h, "r", cfg.heston.r, "heston.r");
    cfg.heston.maturity = get_number(h, "maturity", cfg.heston.maturity, "heston.maturity");
    cfg.heston.v0 = get_number(h, "v0", cfg.heston.v0, "heston.v0");
    cfg.heston.kappa = get_number(h, "kappa", cfg.heston.kappa, "heston.kappa");
    cfg.heston.theta = get_number(h, "theta", cfg.heston.theta, "heston.theta");
    cfg.heston.xi = get_number(h, "xi", cfg.heston.xi, "heston.xi");
    cfg.heston.varrho = get_number(h, "varrho", cfg.heston.varrho, "heston.varrho");
  }
  cfg.payoff = parse_payoff(get_string(j, "payoff", to_string(cfg.payoff)));
  cfg.n_paths = get_count(j, "n_paths", cfg.n_paths, "n_paths");
  if (!j.contains("n_steps") && cfg.payoff != PayoffKind::european_call) cfg.n_steps = 365;
  if (!j.contains("n_steps") && cfg.model == ModelKind::heston) cfg.n_steps = 365;
  cfg.n_steps = get_count(j, "n_steps", cfg.n_steps, "n_steps");
  cfg.spacing = get_string(j, "spacing", cfg.spacing);
  if (j.contains("cv"))
    cfg.scheme = wrap("cv", [&] { return CrossValidationScheme::parse(get_string(j, "cv", "")); });
  if (j.contains("fit")) cfg.fit = wrap("fit", [&] { return FitSpec::parse(get_string(j, "fit", "")); });
  if (j.contains("methods")) {
    const json& ms = j.at("methods");
    if (!ms.is_array()) throw ConfigError("methods", "expected an array of method names");
    cfg.methods.clear();
    for (const auto& m : ms) {
      if (!m.is_string()) throw ConfigError("methods", "expected method names as strings");
      cfg.methods.push_back(parse_method(m.get<std::string>()));
    }
  }
  cfg.runs = static_cast<unsigned>(get_count(j, "runs", cfg.runs, "runs"));
  cfg.base_seed = get_count(j, "seed", cfg.base_seed, "seed");
  if (j.contains("seeds")) {
    const json& s = j.at("seeds");
    if (!s.is_array()) throw ConfigError("seeds", "expected an array of integers");
    for (std::size_t i = 0; i < s.size(); ++i) {
      const json wrapper = {{"v", s[i]}};
      cfg.seeds.push_back(get_count(wrapper, "v", 0, "seeds[" + std::to_string(i) + "]"));
    }
    if (!j.contains("runs")) cfg.runs = static_cast<unsigned>(cfg.seeds.size());
  }
  if (j.contains("parallel")) {
    if (!j.at("parallel").is_boolean()) throw ConfigError("parallel", "expected a boolean");
    cfg.parallel = j.at("parallel").get<bool>();
  }
  cfg.threads = static_cast<unsigned>(get_count(j, "threads", cfg.threads, "threads"));
  if (j.contains("sweep")) (void)sweep_from_json(j);
  return cfg;
}

json config_to_json(const ExperimentConfig& cfg) {
  json j;
  j["model"] = to_string(cfg.model);
  j["bs"] = {{"s0", cfg.bs.s0}, {"strike", cfg.bs.strike}, {"r", cfg.bs.r},
             {"sigma", cfg.bs.sigma}, {"maturity", cfg.bs.maturity}};
  j["heston"] = {{"s0", cfg.heston.s0},     {"strike", cfg.heston.strike}, {"r", cfg.heston.r},
                 {"maturity", cfg.heston.maturity}, {"v0", cfg.heston.v0},
                 {"kappa", cfg.heston.kappa}, {"theta", cfg.heston.theta}, {"xi", cfg.heston.xi},
                 {"varrho", cfg.heston.varrho}};
  j["payoff"] = to_string(cfg.payoff);
  j["n_paths"] = cfg.n_paths;
  j["n_steps"] = cfg.n_steps;
  j["spacing"] = cfg.spacing;
  j["cv"] = cfg.scheme.to_string();
  j["fit"] = cfg.fit.to_string();
  j["methods"] = json::array();
  for (Method m : cfg.methods) j["methods"].push_back(to_string(m));
  j["runs"] = cfg.runs;
  j["seed"] = cfg.base_seed;
  if (!cfg.seeds.empty()) j["seeds"] = cfg.seeds;
  j["parallel"] = cfg.parallel;
  j["threads"] = cfg.threads;
  return j;
}

std::optional<SweepSpec> sweep_from_json(const json& j) {
  if (!j.contains("sweep")) return std::nullopt;
  const json& s = j.at("sweep");
  if (!s.is_object()) throw ConfigError("sweep", "expected an object");
  reject_unknown(s, {"axis", "values"}, "sweep.");
  SweepSpec spec;
  if (!s.contains("axis") || !s.at("axis").is_string()) throw ConfigError("sweep.axis", "expected a string");
  spec.axis = parse_axis(s.at("axis").get<std::string>());
  if (!s.contains("values") || !s.at("values").is_array() || s.at("values").empty())
    throw ConfigError("sweep.values", "expected a nonempty array of numbers");
  for (const auto& v : s.at("values")) {
    if (!v.is_number()) throw ConfigError("sweep.values", "expected numbers");
    spec.values.push_back(v.get<double>());
  }
  return spec;
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config", "'" + path + "' is not valid JSON: " + e.what());
  }
}

}  // namespace stackmc
