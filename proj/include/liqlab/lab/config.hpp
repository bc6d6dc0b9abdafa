#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

namespace liqlab::lab {

inline constexpr int kSchemaVersion = 1;
inline constexpr const char* kToolkitVersion = "0.1.0";

enum class Model { santafe, spread_linear, spread_stabilized, spread_quadratic, spread_price_feedback };

std::string to_string(Model m);
Model model_from_string(const std::string& name);

/// Parameter names accepted by a model, in canonical (column) order, with defaults.
const std::vector<std::pair<std::string, double>>& model_parameters(Model m);

struct ExperimentConfig {
  Model model = Model::santafe;
  std::map<std::string, std::vector<double>> grid;  // parameters not listed take their defaults
  int replicas = 1;
  std::uint64_t seed = 0;
  std::string output_dir = "out";
  std::uint64_t max_events = 100'000'000;
  int sample_points = 0;
  unsigned workers = 0;  // 0: all cores; never affects results

  /// Throws std::invalid_argument with a message naming the offending key.
  void validate() const;
};

ExperimentConfig config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ExperimentConfig& c);
ExperimentConfig load_config(const std::string& path);

/// Applies "key=value". Keys are top-level config keys or parameter names; a
/// parameter value is a comma-separated list.
void apply_override(ExperimentConfig& c, const std::string& assignment);

/// Event cap after the LIQLAB_BUDGET environment override.
std::uint64_t effective_max_events(const ExperimentConfig& c);

std::uint64_t fnv1a64(const std::string& bytes);
/// Hash of the result-determining part of the config (not output_dir or workers).
std::string config_hash(const ExperimentConfig& c);

struct Cell {
  std::size_t index = 0;
  std::vector<double> values;  // aligned with model_parameters(model)
  double get(Model m, const std::string& name) const;
};

/// Cartesian product of the grid, last canonical parameter varying fastest.
std::vector<Cell> expand_grid(const ExperimentConfig& c);

}  // namespace liqlab::lab
