#include "liqlab/lab/commands.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "liqlab/analysis/flux.hpp"
#include "liqlab/analysis/stat_tests.hpp"
#include "liqlab/analysis/survival.hpp"
#include "liqlab/analysis/susceptibility.hpp"
#include "liqlab/core/parallel.hpp"
#include "liqlab/core/rng.hpp"
#include "liqlab/santafe.hpp"
#include "liqlab/spread_models.hpp"
#include "liqlab/theory.hpp"

namespace liqlab::lab {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

namespace {

santafe::Params santafe_params(const ExperimentConfig& c, const Cell& cell, int replica) {
  santafe::Params p;
  p.lambda = cell.get(c.model, "lambda");
  p.mu = cell.get(c.model, "mu");
  p.nu0 = cell.get(c.model, "nu0");
  p.alpha_k = cell.get(c.model, "alpha_k");
  p.beta = cell.get(c.model, "beta");
  p.grid_size = static_cast<int>(cell.get(c.model, "grid_size"));
  p.horizon = cell.get(c.model, "horizon");
  p.burn_in = cell.get(c.model, "burn_in");
  p.seed = c.seed;
  p.stream = stream_id_for(cell.index, static_cast<std::uint64_t>(replica));
  p.max_events = effective_max_events(c);
  p.sample_points = std::max(2, c.sample_points);
  return p;
}

spread::Variant variant_of(Model m) {
  switch (m) {
    case Model::spread_linear: return spread::Variant::linear;
    case Model::spread_stabilized: return spread::Variant::stabilized;
    case Model::spread_quadratic: return spread::Variant::quadratic;
    case Model::spread_price_feedback: return spread::Variant::price_feedback;
    default: throw std::invalid_argument("not a spread model: " + to_string(m));
  }
}

spread::Params spread_params(const ExperimentConfig& c, const Cell& cell, int replica) {
  spread::Params p;
  p.variant = variant_of(c.model);
  p.lambda0_plus = cell.get(c.model, "lambda0_plus");
  p.lambda0_minus = cell.get(c.model, "lambda0_minus");
  p.alpha = cell.get(c.model, "alpha");
  p.beta = cell.get(c.model, "beta");
  p.horizon = cell.get(c.model, "horizon");
  p.spread_cap = static_cast<int>(cell.get(c.model, "spread_cap"));
  p.initial_spread = static_cast<int>(cell.get(c.model, "initial_spread"));
  p.measure_from = cell.get(c.model, "measure_from");
  if (c.model == Model::spread_quadratic) {
    p.epsilon = cell.get(c.model, "epsilon");
    p.escape_multiple = cell.get(c.model, "escape_multiple");
  }
  p.sample_points = 0;
  p.seed = c.seed;
  p.stream = stream_id_for(cell.index, static_cast<std::uint64_t>(replica));
  p.max_events = effective_max_events(c);
  return p;
}

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string param_key(const std::vector<double>& v) {
  std::string k;
  for (double x : v) k += format_double(x) + ",";
  return k;
}

void write_curve(const std::string& path, const std::string& xname, const std::vector<std::pair<double, double>>& c) {
  std::ostringstream os;
  os << xname << ",distance\n";
  for (const auto& [x, d] : c) os << format_double(x) << ',' << format_double(d) << '\n';
  write_text(path, os.str());
}

}  // namespace

SimulationOutput simulate_rows(const ExperimentConfig& config, bool occupation) {
  config.validate();
  const auto cells = expand_grid(config);
  for (const auto& cell : cells) {
    try {
      if (config.model == Model::santafe) {
        santafe_params(config, cell, 0).validate();
      } else {
        spread_params(config, cell, 0).validate();
      }
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument("config: cell " + std::to_string(cell.index) + ": " + e.what());
    }
  }
  const auto R = static_cast<std::size_t>(config.replicas);
  SimulationOutput out;
  out.rows.resize(cells.size() * R);
  if (occupation) out.occupation.resize(out.rows.size());
  parallel_for(out.rows.size(), config.workers, [&](std::size_t i) {
    const auto& cell = cells[i / R];
    const int replica = static_cast<int>(i % R);
    ResultRow& row = out.rows[i];
    row.cell = cell.index;
    row.replica = replica;
    row.params = cell.values;
    row.seed = config.seed;
    row.stream_id = stream_id_for(cell.index, static_cast<std::uint64_t>(replica));
    if (config.model == Model::santafe) {
      const auto p = santafe_params(config, cell, replica);
      try {
        const auto o = santafe::run(p);
        row.tau_c = o.crisis_time;
        row.aborted = o.aborted;
        row.max_spread = o.max_spread;
        row.n_events = o.n_events;
        row.realized_var = o.realized_variance;
        if (occupation) out.occupation[i] = o.spread_occupation;
      } catch (const std::runtime_error&) {
        row.aborted = true;  // burn-in failed (crisis or budget)
      }
    } else {
      const auto p = spread_params(config, cell, replica);
      const auto o = spread::run_spread(p);
      row.tau_c = o.escape_time;
      row.aborted = o.aborted;
      row.max_spread = o.max_spread;
      row.n_events = o.n_plus + o.n_minus;
      row.realized_var = o.realized_price_variance;
      if (occupation) out.occupation[i] = o.spread_occupation;
    }
  });
  for (const auto& r : out.rows) out.events += r.n_events;
  return out;
}

std::vector<CellSummary> summarize_cells(Model model, const std::vector<ResultRow>& rows) {
  const auto& names = model_parameters(model);
  std::size_t horizon_idx = 0;
  for (std::size_t k = 0; k < names.size(); ++k) {
    if (names[k].first == "horizon") horizon_idx = k;
  }
  std::vector<CellSummary> out;
  std::map<std::string, std::size_t> index;
  std::vector<std::vector<std::optional<double>>> taus;
  for (const auto& r : rows) {
    const auto key = param_key(r.params);
    auto it = index.find(key);
    if (it == index.end()) {
      it = index.emplace(key, out.size()).first;
      out.emplace_back();
      out.back().params = r.params;
      taus.emplace_back();
    }
    auto& c = out[it->second];
    ++c.replicas;
    c.crises += r.tau_c ? 1 : 0;
    c.aborted += r.aborted ? 1 : 0;
    taus[it->second].push_back(r.tau_c);
  }
  for (std::size_t i = 0; i < out.size(); ++i) {
    auto& c = out[i];
    const auto [lo, hi] = analysis::wilson_interval(c.crises, c.replicas);
    c.ci_low = lo;
    c.ci_high = hi;
    if (c.aborted == 0) c.probability = static_cast<double>(c.crises) / c.replicas;
    if (c.replicas >= 2) c.chi = analysis::susceptibility(taus[i], c.params[horizon_idx]);
  }
  return out;
}

SimulateReport cmd_simulate(const ExperimentConfig& config, bool occupation) {
  const auto start = std::chrono::steady_clock::now();
  const auto sim = simulate_rows(config, occupation);
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  fs::create_directories(config.output_dir);
  SimulateReport rep;
  rep.results_path = (fs::path(config.output_dir) / "results.csv").string();
  rep.manifest_path = (fs::path(config.output_dir) / "manifest.json").string();
  write_results(rep.results_path, config.model, sim.rows);

  const auto& names = model_parameters(config.model);
  {
    std::ostringstream os;
    for (const auto& [n, _] : names) os << n << ',';
    os << "replicas,crises,aborted,p_hat,ci_low,ci_high,chi\n";
    for (const auto& c : summarize_cells(config.model, sim.rows)) {
      for (double v : c.params) os << format_double(v) << ',';
      os << c.replicas << ',' << c.crises << ',' << c.aborted << ','
         << (c.probability ? format_double(*c.probability) : std::string()) << ',' << format_double(c.ci_low) << ','
         << format_double(c.ci_high) << ',' << format_double(c.chi) << '\n';
    }
    write_text((fs::path(config.output_dir) / "cells.csv").string(), os.str());
  }
  if (occupation) {
    std::ostringstream os;
    os << "stream_id,spread,time\n";
    for (std::size_t i = 0; i < sim.rows.size(); ++i) {
      const auto& occ = sim.occupation[i];
      for (std::size_t s = 0; s < occ.size(); ++s) {
        if (occ[s] > 0) os << sim.rows[i].stream_id << ',' << s << ',' << format_double(occ[s]) << '\n';
      }
    }
    write_text((fs::path(config.output_dir) / "occupation.csv").string(), os.str());
  }

  ordered_json m;
  m["schema_version"] = kSchemaVersion;
  m["toolkit_version"] = kToolkitVersion;
  m["config_hash"] = config_hash(config);
  m["seed"] = config.seed;
  m["max_events"] = effective_max_events(config);
  m["workers"] = config.workers == 0 ? default_workers() : config.workers;
  m["config"] = to_json(config);
  auto cells = ordered_json::array();
  for (const auto& cell : expand_grid(config)) {
    ordered_json c;
    c["cell"] = cell.index;
    for (std::size_t k = 0; k < names.size(); ++k) c["params"][names[k].first] = cell.values[k];
    auto ids = ordered_json::array();
    for (int r = 0; r < config.replicas; ++r) ids.push_back(stream_id_for(cell.index, static_cast<std::uint64_t>(r)));
    c["stream_ids"] = ids;
    cells.push_back(c);
  }
  m["cells"] = cells;
  std::size_t aborted = 0, crises = 0;
  for (const auto& r : sim.rows) {
    aborted += r.aborted ? 1 : 0;
    crises += r.tau_c ? 1 : 0;
  }
  m["totals"] = {{"rows", sim.rows.size()},
                 {"crises", crises},
                 {"aborted", aborted},
                 {"events", sim.events},
                 {"wall_clock_seconds", wall}};
  m["timestamp"] = utc_timestamp();
  write_text(rep.manifest_path, m.dump(2) + "\n");

  rep.rows = sim.rows.size();
  rep.aborted = aborted;
  rep.events = sim.events;
  rep.wall_seconds = wall;
  return rep;
}

ExperimentConfig config_from_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("manifest: cannot open '" + path + "'");
  json m;
  try {
    in >> m;
  } catch (const json::parse_error& e) {
    throw std::invalid_argument("manifest: " + path + ": " + e.what());
  }
  if (!m.contains("config")) throw std::invalid_argument("manifest: " + path + ": no 'config' entry");
  auto c = config_from_json(m.at("config"));
  if (m.contains("config_hash") && m.at("config_hash").get<std::string>() != config_hash(c)) {
    throw std::invalid_argument("manifest: " + path + ": config_hash does not match the recorded config (is LIQLAB_BUDGET set differently?)");
  }
  return c;
}

std::vector<analysis::ChiPoint> chi_from_results(const ResultFile& results, std::vector<std::string>* dropped) {
  const auto& names = model_parameters(results.model);
  const bool sf = results.model == Model::santafe;
  const std::string a_name = sf ? "alpha_k" : "alpha";
  const std::string n_name = sf ? "grid_size" : "spread_cap";
  std::size_t ia = 0, it = 0, in = 0;
  for (std::size_t k = 0; k < names.size(); ++k) {
    if (names[k].first == a_name) ia = k;
    if (names[k].first == "horizon") it = k;
    if (names[k].first == n_name) in = k;
  }
  for (std::size_t k = 0; k < names.size(); ++k) {
    if (k == ia || k == it || k == in) continue;
    std::set<double> seen;
    for (const auto& r : results.rows) seen.insert(r.params[k]);
    if (seen.size() > 1) {
      throw std::invalid_argument("fss: results mix " + std::to_string(seen.size()) + " values of '" +
                                  names[k].first + "'; split the file so only " + a_name +
                                  ", horizon and " + n_name + " vary");
    }
  }
  std::vector<analysis::ChiPoint> out;
  for (const auto& c : summarize_cells(results.model, results.rows)) {
    if (c.aborted > 0) {
      if (dropped != nullptr) {
        dropped->push_back(a_name + "=" + format_double(c.params[ia]) + " horizon=" + format_double(c.params[it]) +
                           " " + n_name + "=" + format_double(c.params[in]) + " (" + std::to_string(c.aborted) +
                           " aborted)");
      }
      continue;
    }
    if (c.replicas < 2) throw std::invalid_argument("fss: susceptibility needs >= 2 replicas per cell");
    out.push_back({c.params[ia], c.params[it], c.params[in], c.chi});
  }
  return out;
}

std::vector<analysis::ChiPoint> theory_chi_grid(double lambda0_plus, double lambda0_minus,
                                                const std::vector<double>& horizons,
                                                const std::vector<double>& sizes, int points, double width) {
  const double ac = 1.0 - lambda0_plus / lambda0_minus;
  std::vector<analysis::ChiPoint> out;
  for (double T : horizons) {
    for (double N : sizes) {
      for (int k = 0; k < points; ++k) {
        const double a = ac + (2.0 * k / (points - 1) - 1.0) * width / std::sqrt(T);
        out.push_back({a, T, N, theory::chi_theory(a, T, N, lambda0_plus, lambda0_minus)});
      }
    }
  }
  return out;
}

ordered_json cmd_fss(const std::vector<analysis::ChiPoint>& data, const std::string& out_dir,
                     const analysis::FssOptions& options) {
  const auto fit = analysis::fss_pipeline(data, options);
  fs::create_directories(out_dir);
  const auto dir = fs::path(out_dir);
  write_curve((dir / "zeta_curve.csv").string(), "inv_zeta", fit.zeta_curve);
  write_curve((dir / "eta_curve.csv").string(), "inv_eta", fit.eta_curve);
  write_curve((dir / "alpha_star_curve.csv").string(), "alpha_star", fit.alpha_star_curve);

  std::ostringstream am;
  am << "T,N,alpha_m,chi_max,points,bracketed,used\n";
  auto put = [&](const analysis::PeakCell& p, bool used) {
    am << format_double(p.T) << ',' << format_double(p.N) << ',' << format_double(p.alpha_m) << ','
       << format_double(p.chi_max) << ',' << p.points << ',' << (p.bracketed ? "true" : "false") << ','
       << (used ? "true" : "false") << '\n';
  };
  for (const auto& p : fit.peaks) put(p, true);
  for (const auto& p : fit.excluded) put(p, false);
  write_text((dir / "alpha_m.csv").string(), am.str());

  std::ostringstream co;
  co << "T,N,alpha,chi,u,chi_scaled,x,y\n";
  for (const auto& d : data) {
    const analysis::PeakCell* peak = nullptr;
    for (const auto& p : fit.peaks) {
      if (p.T == d.T && p.N == d.N) peak = &p;
    }
    if (peak == nullptr) continue;
    const double tz = std::pow(d.T, 1.0 / fit.zeta);
    co << format_double(d.T) << ',' << format_double(d.N) << ',' << format_double(d.alpha) << ','
       << format_double(d.chi) << ',' << format_double(tz * (d.alpha - peak->alpha_m)) << ','
       << format_double(d.chi / std::pow(d.T, fit.gamma)) << ',' << format_double(d.N * std::pow(d.T, -1.0 / fit.eta))
       << ',' << format_double(tz * (peak->alpha_m - fit.alpha_star)) << '\n';
  }
  write_text((dir / "collapse.csv").string(), co.str());

  ordered_json j;
  j["gamma"] = fit.gamma;
  j["gamma_se"] = fit.gamma_se;
  j["zeta"] = fit.zeta;
  j["eta"] = fit.eta;
  j["alpha_star"] = fit.alpha_star;
  j["collapse_distance"] = fit.collapse_distance;
  j["peak_distance"] = fit.peak_distance;
  j["n_max"] = fit.n_max;
  j["cells_used"] = fit.peaks.size();
  j["cells_excluded"] = fit.excluded.size();
  write_text((dir / "fss.json").string(), j.dump(2) + "\n");
  return j;
}

ordered_json cmd_theory(Model model, const std::map<std::string, double>& params) {
  std::vector<std::string> allowed;
  std::map<std::string, double> p;
  switch (model) {
    case Model::spread_linear:
    case Model::spread_price_feedback:
      allowed = {"lambda0_plus", "lambda0_minus", "alpha", "horizon", "spread_cap"};
      p = {{"lambda0_plus", 0.5}, {"lambda0_minus", 1.0}, {"alpha", 0.0}};
      break;
    case Model::spread_quadratic:
      allowed = {"lambda0_plus", "alpha", "beta", "epsilon"};
      p = {{"lambda0_plus", 1.0}, {"alpha", 0.0}, {"beta", 1.0}, {"epsilon", 0.2}};
      break;
    default:
      throw std::invalid_argument("theory: no closed forms for model " + to_string(model) +
                                  " (use spread_linear, spread_quadratic or spread_price_feedback)");
  }
  if (model == Model::spread_price_feedback) {
    allowed = {"lambda0_plus", "lambda0_minus", "alpha", "qv_per_event"};
    p["qv_per_event"] = 0.5;
  }
  for (const auto& [k, v] : params) {
    if (std::find(allowed.begin(), allowed.end(), k) == allowed.end()) {
      throw std::invalid_argument("theory: parameter '" + k + "' is not used by " + to_string(model));
    }
    p[k] = v;
  }
  const double lp = p["lambda0_plus"];
  ordered_json j;
  j["model"] = to_string(model);
  for (const auto& [k, v] : p) j[k] = v;
  auto need = [](bool ok, const std::string& name, const std::string& what) {
    if (!ok) throw std::domain_error("theory: " + name + " " + what);
  };
  need(std::isfinite(lp) && lp > 0, "lambda0_plus", "must be > 0");
  if (model == Model::spread_quadratic) {
    const double a = p["alpha"], b = p["beta"], e = p["epsilon"];
    need(a >= 0 && a < 1, "alpha", "must be in [0, 1)");
    need(b > 0, "beta", "must be > 0");
    need(e > 0, "epsilon", "must be > 0");
    const auto h = theory::hawkes_cumulants(lp, a, b);
    j["hawkes_mean"] = h.mean;
    j["hawkes_variance"] = h.variance;
    j["log_time_asymptotic"] = theory::log_escape_time_asymptotic(lp, a, b, e);
    try {
      const auto m = theory::metastability_theory(lp, a, b, e);
      j["barrier_present"] = true;
      j["X_eq"] = m.X_eq;
      j["X_star"] = m.X_star;
      j["X_star_asymptotic"] = m.X_star_asymptotic;
      j["barrier"] = m.barrier;
      j["barrier_asymptotic"] = m.barrier_asymptotic;
      j["kramers_time"] = m.kramers_time;
      j["log_time_adjusted"] = m.log_time_adjusted;
    } catch (const std::domain_error&) {
      j["barrier_present"] = false;
    }
    return j;
  }
  const double lm = p["lambda0_minus"], a = p["alpha"];
  need(std::isfinite(lm) && lm > lp, "lambda0_minus", "must exceed lambda0_plus");
  need(std::isfinite(a) && a >= 0, "alpha", "must be >= 0");
  if (model == Model::spread_linear) {
    const auto t = theory::linear_spread_theory(lp, lm, a);
    j["alpha_c"] = t.alpha_c;
    j["alpha_star"] = 1.0;
    j["p_open"] = t.p_open;
    j["regime"] = theory::to_string(t.regime);
    if (t.V) j["V"] = *t.V;
    if (t.D) j["D"] = *t.D;
    if (a < 1.0) j["V_signed"] = theory::linear_drift_signed(lp, lm, a);
    if (p.count("horizon") && p.count("spread_cap")) {
      const double T = p["horizon"], N = p["spread_cap"];
      need(T > 0, "horizon", "must be > 0");
      need(N > 0, "spread_cap", "must be > 0");
      need(a < 1.0, "alpha", "must be < 1 for the first-passage quantities");
      const double V = theory::linear_drift_signed(lp, lm, a), D = theory::linear_diffusion(lp, lm, a);
      j["crisis_probability"] = theory::first_passage_prob(N, T, V, D);
      j["chi"] = theory::chi_from_drift(T, N, V, D);
    }
  } else {
    const double qv = p["qv_per_event"];
    need(std::isfinite(qv) && qv > 0, "qv_per_event", "must be > 0");
    const auto t = theory::price_feedback_theory(lp, lm, a, qv);
    j["alpha_c"] = t.alpha_c;
    j["alpha_star"] = t.alpha_star;
    j["p_open"] = t.p_open;
    j["regime"] = theory::to_string(t.regime);
    if (t.V) j["V"] = *t.V;
    if (t.D_P) j["D_P"] = *t.D_P;
  }
  return j;
}

ordered_json cmd_regress(const std::vector<analysis::StreamEvent>& events, const RegressOptions& o,
                         const std::string& out_dir) {
  const auto surface =
      analysis::correlation_surface(events, o.betas, o.beta_primes, o.normalize_trend, o.tail_cut);
  analysis::FluxOptions fo;
  fo.beta = o.beta.value_or(surface.betas[surface.argmax_beta]);
  fo.beta_prime = o.beta_prime.value_or(surface.beta_primes[surface.argmax_beta_prime]);
  fo.normalize_trend = o.normalize_trend;
  fo.tail_cut = o.tail_cut;
  const auto features = analysis::flux_features(events, fo);
  analysis::RegressionOptions ro;
  ro.bins = o.bins;
  ro.jackknife_blocks = o.jackknife_blocks;
  const auto r = analysis::flux_regression(features, ro);

  fs::create_directories(out_dir);
  std::ostringstream os;
  os << "beta,beta_prime,corr\n";
  for (std::size_t i = 0; i < surface.betas.size(); ++i) {
    for (std::size_t k = 0; k < surface.beta_primes.size(); ++k) {
      os << format_double(surface.betas[i]) << ',' << format_double(surface.beta_primes[k]) << ','
         << format_double(surface.at(i, k)) << '\n';
    }
  }
  write_text((fs::path(out_dir) / "surface.csv").string(), os.str());

  ordered_json j;
  j["events"] = events.size();
  j["records"] = r.records;
  j["has_hawkes"] = r.has_hawkes;
  j["beta"] = fo.beta;
  j["beta_prime"] = fo.beta_prime;
  j["normalize_trend"] = fo.normalize_trend;
  auto coef = [](const analysis::Coefficient& c) {
    return ordered_json{{"value", c.value}, {"se", c.se}, {"t", c.t_stat()}};
  };
  j["C0"] = coef(r.C0);
  j["C1"] = coef(r.C1);
  j["C2"] = coef(r.C2);
  j["C3"] = coef(r.C3);
  j["raw"] = {{"R2", r.raw_r2}, {"sigma2", r.raw_sigma2}, {"R", r.raw_r}};
  j["bins"] = {{"symmetric", r.bins_symmetric}, {"antisymmetric", r.bins_antisymmetric}, {"total_weight", r.total_weight}};
  j["surface_argmax"] = {{"beta", surface.betas[surface.argmax_beta]},
                         {"beta_prime", surface.beta_primes[surface.argmax_beta_prime]},
                         {"corr", surface.argmax_value}};
  write_text((fs::path(out_dir) / "regression.json").string(), j.dump(2) + "\n");
  return j;
}

ordered_json cmd_sf(const std::string& input, const SfOptions& o, const std::string& out_dir) {
  analysis::Ccdf ccdf;
  std::vector<double> samples;
  if (o.column == "occupation") {
    const auto t = read_csv(input);
    const int cs = t.column("spread"), ct = t.column("time");
    if (cs < 0 || ct < 0) throw std::runtime_error(input + ":1: occupation file needs 'spread' and 'time' columns");
    std::vector<double> occ;
    for (const auto& row : t.rows) {
      const auto s = static_cast<std::size_t>(std::stoul(row[static_cast<std::size_t>(cs)]));
      if (occ.size() <= s) occ.resize(s + 1, 0.0);
      occ[s] += std::stod(row[static_cast<std::size_t>(ct)]);
    }
    ccdf = analysis::sf_from_histogram(occ);
  } else {
    const auto res = read_results(input);
    for (const auto& r : res.rows) {
      if (o.column == "max_spread") {
        samples.push_back(r.max_spread);
      } else if (o.column == "tau_c") {
        if (r.tau_c) samples.push_back(*r.tau_c);
      } else if (o.column == "realized_var") {
        samples.push_back(r.realized_var);
      } else {
        throw std::invalid_argument("sf: column must be max_spread, tau_c, realized_var or occupation");
      }
    }
    if (samples.empty()) throw std::invalid_argument("sf: no values in column " + o.column);
    ccdf = analysis::empirical_sf(samples);
  }
  fs::create_directories(out_dir);
  std::ostringstream os;
  os << "value,survival,mass\n";
  for (std::size_t i = 0; i < ccdf.support.size(); ++i) {
    os << format_double(ccdf.support[i]) << ',' << format_double(ccdf.survival[i]) << ','
       << format_double(ccdf.mass[i]) << '\n';
  }
  write_text((fs::path(out_dir) / "ccdf.csv").string(), os.str());

  ordered_json j;
  j["input"] = input;
  j["column"] = o.column;
  j["support_points"] = ccdf.support.size();
  j["effective_n"] = ccdf.effective_n;
  try {
    const auto g = analysis::fit_geometric(ccdf, o.min_support);
    j["geometric"] = {{"r", g.r}, {"p_at_min", g.p_at_min}};
    if (g.n_tail > 0) {
      j["geometric"]["r_se"] = g.r_se;
      j["geometric"]["n_tail"] = g.n_tail;
    } else {
      j["geometric"]["r_se"] = nullptr;  // time-weighted input without an effective sample size
    }
  } catch (const std::invalid_argument& e) {
    j["geometric"] = {{"error", e.what()}};
  }
  if (!samples.empty()) {
    for (double tf : {0.05, o.tail_fraction, 0.2}) {
      const std::string key = "tail_" + format_double(tf);
      if (j.contains(key)) continue;
      try {
        const auto t = analysis::fit_tail_exponent(samples, tf, 200, o.seed);
        j[key] = {{"kappa", t.kappa}, {"ci_low", t.ci_low}, {"ci_high", t.ci_high}, {"hill", t.hill},
                  {"curvature", t.curvature}, {"power_law", t.power_law}, {"points", t.points}};
      } catch (const std::invalid_argument& e) {
        j[key] = {{"error", e.what()}};
      }
    }
  }
  write_text((fs::path(out_dir) / "sf.json").string(), j.dump(2) + "\n");
  return j;
}

}  // namespace liqlab::lab
