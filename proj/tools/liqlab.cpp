#include <cstdio>
#include <exception>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "liqlab/analysis/flux.hpp"
#include "liqlab/analysis/fss.hpp"
#include "liqlab/lab/commands.hpp"
#include "liqlab/lab/config.hpp"
#include "liqlab/lab/io.hpp"

using namespace liqlab;

namespace {

std::map<std::string, double> parse_assignments(const std::vector<std::string>& items) {
  std::map<std::string, double> out;
  for (const auto& s : items) {
    const auto eq = s.find('=');
    if (eq == std::string::npos || eq == 0) throw std::invalid_argument("expected key=value, got '" + s + "'");
    std::size_t used = 0;
    const std::string v = s.substr(eq + 1);
    double x = 0.0;
    try {
      x = std::stod(v, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != v.size() || v.empty()) throw std::invalid_argument("'" + s.substr(0, eq) + "': '" + v + "' is not a number");
    out[s.substr(0, eq)] = x;
  }
  return out;
}

void print_kv(const nlohmann::ordered_json& j, const std::string& prefix = "") {
  for (const auto& [k, v] : j.items()) {
    if (v.is_object()) {
      print_kv(v, prefix + k + ".");
    } else if (v.is_string()) {
      std::cout << prefix << k << " = " << v.get<std::string>() << '\n';
    } else {
      std::cout << prefix << k << " = " << v.dump() << '\n';
    }
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"liqlab: liquidity crisis simulations and estimators"};
  app.set_version_flag("--version", std::string(lab::kToolkitVersion));
  app.require_subcommand(1);

  // simulate / sweep
  std::string config_path, manifest_path, model_name, out_dir;
  std::vector<std::string> overrides;
  int replicas = -1;
  long long seed = -1;
  int workers = -1;
  bool occupation = false;
  std::vector<CLI::App*> sims;
  for (const char* name : {"simulate", "sweep"}) {
    auto* s = app.add_subcommand(name, std::string(name) == "simulate" ? "Run replicas over a parameter grid"
                                                                          : "Alias of simulate");
    s->add_option("-c,--config", config_path, "JSON experiment config");
    s->add_option("--manifest", manifest_path, "Re-run the config recorded in a manifest");
    s->add_option("--model", model_name, "Model (when no config is given)");
    s->add_option("--set", overrides, "key=value override; parameter values are comma-separated lists");
    s->add_option("-r,--replicas", replicas, "Replicas per cell");
    s->add_option("--seed", seed, "Base seed");
    s->add_option("-o,--out", out_dir, "Output directory");
    s->add_option("-j,--workers", workers, "Worker threads (0: all cores)");
    s->add_flag("--occupation", occupation, "Also write per-replica spread occupation times");
    sims.push_back(s);
  }

  // fss
  auto* fss = app.add_subcommand("fss", "Finite-size-scaling fit of chi(alpha, T, N)");
  std::vector<std::string> fss_inputs;
  bool fss_theory = false, fss_planted = false;
  double fss_lp = 0.5, fss_lm = 1.0, fss_width = 8.0;
  std::vector<double> fss_T{400, 800, 1600, 3200}, fss_N{2, 4, 8};
  std::string fss_out = "fss_out";
  fss->add_option("--results", fss_inputs, "results.csv files from simulate");
  fss->add_flag("--theory", fss_theory, "Use closed-form chi of the linear spread model");
  fss->add_flag("--planted", fss_planted, "Use planted synthetic curves (gamma, zeta, eta, alpha*) = (2, 3, 3, 0.063)");
  fss->add_option("--lambda0-plus", fss_lp, "Theory input")->capture_default_str();
  fss->add_option("--lambda0-minus", fss_lm, "Theory input")->capture_default_str();
  fss->add_option("--horizons", fss_T, "Theory horizons")->capture_default_str();
  fss->add_option("--sizes", fss_N, "Theory barrier sizes")->capture_default_str();
  fss->add_option("--width", fss_width, "Theory alpha half-width in units of 1/sqrt(T)")->capture_default_str();
  fss->add_option("-o,--out", fss_out, "Output directory")->capture_default_str();

  // theory
  auto* th = app.add_subcommand("theory", "Closed-form predictions");
  std::string th_model;
  std::vector<std::string> th_params;
  bool th_json = false;
  th->add_option("model", th_model, "spread_linear, spread_quadratic or spread_price_feedback")->required();
  th->add_option("params", th_params, "key=value parameters");
  th->add_flag("--json", th_json, "Machine-readable output");

  // regress
  auto* rg = app.add_subcommand("regress", "Flux regression on an event stream");
  std::string rg_input, rg_out = "regress_out";
  lab::RegressOptions ro;
  double rg_beta = 0.0, rg_beta_prime = 0.0;
  rg->add_option("events", rg_input, "Event-stream CSV")->required();
  rg->add_option("--betas", ro.betas, "Grid of beta for the correlation surface")->capture_default_str();
  rg->add_option("--beta-primes", ro.beta_primes, "Grid of beta'")->capture_default_str();
  auto* rg_b = rg->add_option("--beta", rg_beta, "Regress at this beta (default: surface argmax)");
  auto* rg_bp = rg->add_option("--beta-prime", rg_beta_prime, "Regress at this beta' (default: surface argmax)");
  rg->add_flag("--normalize-trend", ro.normalize_trend, "Scale the trend by sqrt(2 beta)");
  rg->add_option("--bins", ro.bins, "Bins per axis")->capture_default_str();
  rg->add_option("-o,--out", rg_out, "Output directory")->capture_default_str();

  // sf
  auto* sf = app.add_subcommand("sf", "Survival function and tail fits");
  std::string sf_input, sf_out = "sf_out";
  lab::SfOptions so;
  sf->add_option("input", sf_input, "results.csv or occupation.csv")->required();
  sf->add_option("--column", so.column, "max_spread, tau_c, realized_var or occupation")->capture_default_str();
  sf->add_option("--min-support", so.min_support, "Geometric fit threshold")->capture_default_str();
  sf->add_option("--tail-fraction", so.tail_fraction, "Tail window")->capture_default_str();
  sf->add_option("-o,--out", sf_out, "Output directory")->capture_default_str();

  // synth-stream
  auto* sy = app.add_subcommand("synth-stream", "Write a synthetic event stream with planted flux coefficients");
  analysis::SyntheticFluxParams sp;
  std::string sy_out = "stream.csv";
  sy->add_option("--C0", sp.C0)->capture_default_str();
  sy->add_option("--C1", sp.C1)->capture_default_str();
  sy->add_option("--C2", sp.C2)->capture_default_str();
  sy->add_option("--C3", sp.C3)->capture_default_str();
  sy->add_option("--beta", sp.beta)->capture_default_str();
  sy->add_option("--beta-prime", sp.beta_prime)->capture_default_str();
  sy->add_option("--price-rate", sp.price_rate)->capture_default_str();
  sy->add_option("--base-rate", sp.base_rate)->capture_default_str();
  sy->add_option("--horizon", sp.horizon)->capture_default_str();
  sy->add_option("--seed", sp.seed)->capture_default_str();
  sy->add_option("-o,--out", sy_out, "Output CSV")->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    for (auto* s : sims) {
      if (!s->parsed()) continue;
      lab::ExperimentConfig c;
      if (!manifest_path.empty()) {
        c = lab::config_from_manifest(manifest_path);
      } else if (!config_path.empty()) {
        c = lab::load_config(config_path);
      } else if (!model_name.empty()) {
        c.model = lab::model_from_string(model_name);
      } else {
        throw std::invalid_argument("simulate: give --config, --manifest or --model");
      }
      if (!model_name.empty()) c.model = lab::model_from_string(model_name);
      for (const auto& o : overrides) lab::apply_override(c, o);
      if (replicas >= 0) c.replicas = replicas;
      if (seed >= 0) c.seed = static_cast<std::uint64_t>(seed);
      if (workers >= 0) c.workers = static_cast<unsigned>(workers);
      if (!out_dir.empty()) c.output_dir = out_dir;
      c.validate();
      const auto rep = lab::cmd_simulate(c, occupation);
      std::cout << "rows = " << rep.rows << "\naborted = " << rep.aborted << "\nevents = " << rep.events
                << "\nwall_seconds = " << rep.wall_seconds << "\nresults = " << rep.results_path
                << "\nmanifest = " << rep.manifest_path << '\n';
      return 0;
    }
    if (fss->parsed()) {
      std::vector<analysis::ChiPoint> data;
      const int sources = (fss_theory ? 1 : 0) + (fss_planted ? 1 : 0) + (fss_inputs.empty() ? 0 : 1);
      if (sources != 1) throw std::invalid_argument("fss: give exactly one of --results, --theory, --planted");
      if (fss_theory) {
        data = lab::theory_chi_grid(fss_lp, fss_lm, fss_T, fss_N, 41, fss_width);
      } else if (fss_planted) {
        data = analysis::planted_chi_grid();
      } else {
        lab::ResultFile merged;
        for (std::size_t i = 0; i < fss_inputs.size(); ++i) {
          auto f = lab::read_results(fss_inputs[i]);
          if (i > 0 && f.model != merged.model) throw std::invalid_argument("fss: inputs mix models");
          merged.model = f.model;
          merged.rows.insert(merged.rows.end(), f.rows.begin(), f.rows.end());
        }
        std::vector<std::string> dropped;
        data = lab::chi_from_results(merged, &dropped);
        for (const auto& d : dropped) std::cerr << "liqlab: warning: dropped cell " << d << '\n';
      }
      print_kv(lab::cmd_fss(data, fss_out));
      return 0;
    }
    if (th->parsed()) {
      const auto j = lab::cmd_theory(lab::model_from_string(th_model), parse_assignments(th_params));
      if (th_json) {
        std::cout << j.dump(2) << '\n';
      } else {
        print_kv(j);
      }
      return 0;
    }
    if (rg->parsed()) {
      if (*rg_b) ro.beta = rg_beta;
      if (*rg_bp) ro.beta_prime = rg_beta_prime;
      const auto events = lab::read_event_stream(rg_input);
      print_kv(lab::cmd_regress(events, ro, rg_out));
      return 0;
    }
    if (sf->parsed()) {
      print_kv(lab::cmd_sf(sf_input, so, sf_out));
      return 0;
    }
    if (sy->parsed()) {
      const auto events = analysis::synthetic_flux_stream(sp);
      lab::write_event_stream(sy_out, events);
      std::cout << "events = " << events.size() << "\nstream = " << sy_out << '\n';
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "liqlab: error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
