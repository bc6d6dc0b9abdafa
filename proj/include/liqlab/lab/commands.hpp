#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "liqlab/analysis/fss.hpp"
#include "liqlab/lab/config.hpp"
#include "liqlab/lab/io.hpp"

namespace liqlab::lab {

struct SimulationOutput {
  std::vector<ResultRow> rows;  // canonical order: cell, then replica
  std::vector<std::vector<double>> occupation;  // per row, time at spread s; only when requested
  std::uint64_t events = 0;
};

/// Runs every (cell, replica) of the grid. Replica r of cell c uses
/// stream_id_for(c, r) under config.seed, so rows do not depend on workers.
SimulationOutput simulate_rows(const ExperimentConfig& config, bool occupation = false);

struct SimulateReport {
  std::string results_path;
  std::string manifest_path;
  std::size_t rows = 0;
  std::size_t aborted = 0;
  std::uint64_t events = 0;
  double wall_seconds = 0.0;
};

/// Writes results.csv, cells.csv, manifest.json (and occupation.csv) into config.output_dir.
SimulateReport cmd_simulate(const ExperimentConfig& config, bool occupation = false);

/// Reads the config recorded in a manifest.
ExperimentConfig config_from_manifest(const std::string& path);

/// Per-cell crisis summary used by cells.csv.
struct CellSummary {
  std::vector<double> params;
  int replicas = 0;
  int crises = 0;
  int aborted = 0;
  std::optional<double> probability;  // missing when a replica aborted
  double ci_low = 0.0;
  double ci_high = 0.0;
  double chi = 0.0;  // Var[min(tau_c, horizon)]
};

std::vector<CellSummary> summarize_cells(Model model, const std::vector<ResultRow>& rows);

/// chi per (alpha, T, N) from result rows; alpha is alpha_k / alpha, N is
/// grid_size / spread_cap. Cells with aborted replicas are dropped and named in `dropped`.
std::vector<analysis::ChiPoint> chi_from_results(const ResultFile& results,
                                                 std::vector<std::string>* dropped = nullptr);

/// chi of the linear spread model over alpha_c +- width / sqrt(T) for each (T, N).
std::vector<analysis::ChiPoint> theory_chi_grid(double lambda0_plus, double lambda0_minus,
                                                const std::vector<double>& horizons,
                                                const std::vector<double>& sizes, int points = 41,
                                                double width = 8.0);

/// Runs the pipeline and writes fss.json plus CSV diagnostics into out_dir.
nlohmann::ordered_json cmd_fss(const std::vector<analysis::ChiPoint>& data, const std::string& out_dir,
                               const analysis::FssOptions& options = {});

/// Closed-form quantities as ordered key/value pairs. Unknown keys in `params`
/// are rejected; domain violations name the offending parameter.
nlohmann::ordered_json cmd_theory(Model model, const std::map<std::string, double>& params);

struct RegressOptions {
  std::vector<double> betas{0.0125, 0.025, 0.05, 0.1, 0.2};
  std::vector<double> beta_primes{0.125, 0.25, 0.5, 1.0, 2.0};
  std::optional<double> beta;        // regression point; default: surface argmax
  std::optional<double> beta_prime;
  bool normalize_trend = false;
  double tail_cut = 10.0;
  int bins = 100;
  int jackknife_blocks = 20;
};

/// Writes regression.json and surface.csv into out_dir.
nlohmann::ordered_json cmd_regress(const std::vector<analysis::StreamEvent>& events, const RegressOptions& options,
                                   const std::string& out_dir);

struct SfOptions {
  std::string column = "max_spread";  // results column, or "occupation"
  double min_support = 2.0;
  double tail_fraction = 0.1;
  std::uint64_t seed = 0;
};

/// Survival function from a results file column or an occupation.csv; writes
/// ccdf.csv and sf.json into out_dir.
nlohmann::ordered_json cmd_sf(const std::string& input, const SfOptions& options, const std::string& out_dir);

}  // namespace liqlab::lab
