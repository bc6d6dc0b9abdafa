#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "liqlab/core/rng.hpp"

/// Spread-only Hawkes models. The spread S >= 1 moves by +1 on openings and -1
/// on closings; closings are only possible when S >= 2.
namespace liqlab::spread {

enum class Variant { linear, stabilized, quadratic, price_feedback };

std::string to_string(Variant v);
Variant variant_from_string(const std::string& name);

struct Params {
  Variant variant = Variant::linear;
  double lambda0_plus = 0.5;
  double lambda0_minus = 1.0;
  double alpha = 0.0;
  double beta = 1.0;
  double epsilon = 0.0;  // quadratic only
  double horizon = 100.0;
  int spread_cap = 1'000'000;
  double escape_multiple = 5.0;  // quadratic: escape once X >= escape_multiple * (1 - alpha) / epsilon; 0 disables
  int initial_spread = 1;
  double measure_from = 0.0;  // occupation histogram and realized variance start here
  int sample_points = 0;      // uniform grid on [0, horizon]; 0 disables
  bool record_events = false;
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
  std::uint64_t max_events = 100'000'000;

  void validate() const;
};

struct SpreadPath {
  std::vector<double> event_times;  // only with record_events
  std::vector<int> event_spreads;   // spread after each event
  std::vector<double> sample_times;
  std::vector<int> spread_samples;
  std::vector<double> x_samples;    // feedback EWMA (X, or the price trend for price_feedback)
  std::vector<double> mid_samples;  // price_feedback only, ticks
  std::optional<double> escape_time;
  bool aborted = false;
  std::uint64_t n_plus = 0;
  std::uint64_t n_minus = 0;
  double final_time = 0.0;
  int final_spread = 1;
  int max_spread = 1;
  double final_x = 0.0;
  double final_mid = 0.0;
  std::vector<double> spread_occupation;  // time at spread s over [measure_from, final_time], index s
  double realized_price_variance = 0.0;   // sum of squared mid changes after measure_from
};

/// Exact thinning simulation of one path.
SpreadPath run_spread(const Params& params);

struct EscapeCensus {
  std::vector<double> times;  // escape times of replicas that escaped before the cap
  int replicas = 0;
  int censored = 0;
  int aborted = 0;
  double cap = 0.0;
  double mean = 0.0;        // sample mean of escape times (uncensored replicas)
  double ci_low = 0.0;      // bootstrap 95% interval for the mean
  double ci_high = 0.0;
  double mean_mle = 0.0;    // exponential MLE with right censoring: total exposure / escapes
};

/// Default right-censoring cap for the quadratic census.
double default_census_cap(const Params& params);

/// Escape times of `replicas` independent quadratic paths started at S=1, X=0.
/// Replica r uses stream_id_for(params.stream, r). cap <= 0 selects default_census_cap.
EscapeCensus escape_time_census(const Params& params, int replicas, double cap = 0.0,
                                unsigned workers = 0, int bootstrap = 2000);

}  // namespace liqlab::spread
