#include "liqlab/lab/config.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace liqlab::lab {

namespace {

[[noreturn]] void fail(const std::string& msg) { throw std::invalid_argument("config: " + msg); }

const std::vector<std::pair<std::string, Model>> kModels{
    {"santafe", Model::santafe},
    {"spread_linear", Model::spread_linear},
    {"spread_stabilized", Model::spread_stabilized},
    {"spread_quadratic", Model::spread_quadratic},
    {"spread_price_feedback", Model::spread_price_feedback},
};

std::vector<double> parse_list(const std::string& key, const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    char* end = nullptr;
    const double v = std::strtod(item.c_str(), &end);
    if (item.empty() || *end != '\0') fail("'" + key + "': cannot parse '" + item + "' as a number");
    out.push_back(v);
  }
  return out;
}

std::uint64_t parse_u64(const std::string& key, const std::string& text) {
  char* end = nullptr;
  const unsigned long long v = std::strtoull(text.c_str(), &end, 10);
  if (text.empty() || *end != '\0' || text[0] == '-') fail("'" + key + "': expected a non-negative integer, got '" + text + "'");
  return v;
}

bool is_integer_param(const std::string& name) {
  return name == "grid_size" || name == "spread_cap" || name == "initial_spread";
}

}  // namespace

std::string to_string(Model m) {
  for (const auto& [name, model] : kModels) {
    if (model == m) return name;
  }
  return "unknown";
}

Model model_from_string(const std::string& name) {
  for (const auto& [n, model] : kModels) {
    if (n == name) return model;
  }
  fail("unknown model '" + name + "' (santafe, spread_linear, spread_stabilized, spread_quadratic, spread_price_feedback)");
}

const std::vector<std::pair<std::string, double>>& model_parameters(Model m) {
  static const std::vector<std::pair<std::string, double>> santafe{
      {"lambda", 10.0}, {"mu", 20.0},        {"nu0", 1.0},      {"alpha_k", 0.0},
      {"beta", 1.0},    {"grid_size", 280.0}, {"horizon", 200.0}, {"burn_in", 20.0},
  };
  static const std::vector<std::pair<std::string, double>> spread{
      {"lambda0_plus", 0.5}, {"lambda0_minus", 1.0}, {"alpha", 0.0},         {"beta", 1.0},
      {"horizon", 100.0},    {"spread_cap", 1e6},    {"initial_spread", 1.0}, {"measure_from", 0.0},
  };
  static const std::vector<std::pair<std::string, double>> quadratic{
      {"lambda0_plus", 1.0}, {"lambda0_minus", 1.0},  {"alpha", 0.0},          {"beta", 1.0},
      {"epsilon", 0.2},      {"horizon", 100.0},      {"spread_cap", 1e6},     {"escape_multiple", 5.0},
      {"initial_spread", 1.0}, {"measure_from", 0.0},
  };
  switch (m) {
    case Model::santafe: return santafe;
    case Model::spread_quadratic: return quadratic;
    default: return spread;
  }
}

void ExperimentConfig::validate() const {
  if (replicas < 1) fail("replicas must be >= 1");
  if (max_events == 0) fail("max_events must be >= 1");
  if (sample_points < 0) fail("sample_points must be >= 0");
  const auto& names = model_parameters(model);
  for (const auto& [key, values] : grid) {
    bool known = false;
    for (const auto& p : names) known = known || p.first == key;
    if (!known) fail("parameter '" + key + "' is not valid for model " + to_string(model));
    if (values.empty()) fail("grid for '" + key + "' is empty");
    for (double v : values) {
      if (!std::isfinite(v)) fail("grid for '" + key + "' has a non-finite value");
      if (is_integer_param(key) && v != std::floor(v)) fail("'" + key + "' must be an integer");
    }
  }
}

ExperimentConfig config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) fail("top level must be an object");
  const int version = j.value("schema_version", kSchemaVersion);
  if (version != kSchemaVersion) {
    fail("schema_version " + std::to_string(version) + " is not supported (expected " +
         std::to_string(kSchemaVersion) + ")");
  }
  static const std::vector<std::string> allowed{"schema_version", "model",        "grid",    "replicas",
                                                "seed",           "output_dir",   "max_events", "sample_points",
                                                "workers"};
  for (const auto& [key, _] : j.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) fail("unknown key '" + key + "'");
  }
  ExperimentConfig c;
  try {
    if (!j.contains("model")) fail("missing 'model'");
    c.model = model_from_string(j.at("model").get<std::string>());
    if (j.contains("grid")) {
      for (const auto& [key, v] : j.at("grid").items()) {
        if (v.is_array()) {
          c.grid[key] = v.get<std::vector<double>>();
        } else {
          c.grid[key] = {v.get<double>()};
        }
      }
    }
    c.replicas = j.value("replicas", c.replicas);
    c.seed = j.value("seed", c.seed);
    c.output_dir = j.value("output_dir", c.output_dir);
    c.max_events = j.value("max_events", c.max_events);
    c.sample_points = j.value("sample_points", c.sample_points);
    c.workers = j.value("workers", c.workers);
  } catch (const nlohmann::json::exception& e) {
    fail(std::string("type error: ") + e.what());
  }
  c.validate();
  return c;
}

nlohmann::json to_json(const ExperimentConfig& c) {
  nlohmann::json j;
  j["schema_version"] = kSchemaVersion;
  j["model"] = to_string(c.model);
  j["grid"] = nlohmann::json::object();
  for (const auto& [k, v] : c.grid) j["grid"][k] = v;
  j["replicas"] = c.replicas;
  j["seed"] = c.seed;
  j["output_dir"] = c.output_dir;
  j["max_events"] = c.max_events;
  j["sample_points"] = c.sample_points;
  j["workers"] = c.workers;
  return j;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail("cannot open '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    fail(path + ": " + e.what());
  }
  return config_from_json(j);
}

void apply_override(ExperimentConfig& c, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) fail("override '" + assignment + "' must look like key=value");
  const std::string key = assignment.substr(0, eq);
  const std::string value = assignment.substr(eq + 1);
  if (key == "model") {
    c.model = model_from_string(value);
  } else if (key == "replicas") {
    c.replicas = static_cast<int>(parse_u64(key, value));
  } else if (key == "seed") {
    c.seed = parse_u64(key, value);
  } else if (key == "output_dir") {
    c.output_dir = value;
  } else if (key == "max_events") {
    c.max_events = parse_u64(key, value);
  } else if (key == "sample_points") {
    c.sample_points = static_cast<int>(parse_u64(key, value));
  } else if (key == "workers") {
    c.workers = static_cast<unsigned>(parse_u64(key, value));
  } else {
    c.grid[key] = parse_list(key, value);
  }
}

std::uint64_t effective_max_events(const ExperimentConfig& c) {
  if (const char* env = std::getenv("LIQLAB_BUDGET"); env != nullptr && *env != '\0') {
    return parse_u64("LIQLAB_BUDGET", env);
  }
  return c.max_events;
}

std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : bytes) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string config_hash(const ExperimentConfig& c) {
  auto j = to_json(c);
  j.erase("output_dir");
  j.erase("workers");
  j["max_events"] = effective_max_events(c);
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(j.dump())));
  return buf;
}

double Cell::get(Model m, const std::string& name) const {
  const auto& names = model_parameters(m);
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (names[i].first == name) return values[i];
  }
  throw std::out_of_range("no parameter '" + name + "' for model " + to_string(m));
}

std::vector<Cell> expand_grid(const ExperimentConfig& c) {
  const auto& names = model_parameters(c.model);
  std::vector<std::vector<double>> axes;
  for (const auto& [name, def] : names) {
    const auto it = c.grid.find(name);
    axes.push_back(it == c.grid.end() ? std::vector<double>{def} : it->second);
  }
  std::size_t total = 1;
  for (const auto& a : axes) total *= a.size();
  std::vector<Cell> cells(total);
  for (std::size_t idx = 0; idx < total; ++idx) {
    cells[idx].index = idx;
    cells[idx].values.resize(axes.size());
    std::size_t rem = idx;
    for (std::size_t k = axes.size(); k-- > 0;) {
      cells[idx].values[k] = axes[k][rem % axes[k].size()];
      rem /= axes[k].size();
    }
  }
  return cells;
}

}  // namespace liqlab::lab
