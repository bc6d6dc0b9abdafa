#include "liqlab/spread_models.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "liqlab/core/ewma.hpp"
#include "liqlab/core/parallel.hpp"
#include "liqlab/core/thinning.hpp"
#include "liqlab/theory.hpp"

namespace liqlab::spread {

std::string to_string(Variant v) {
  switch (v) {
    case Variant::linear: return "linear";
    case Variant::stabilized: return "stabilized";
    case Variant::quadratic: return "quadratic";
    case Variant::price_feedback: return "price_feedback";
  }
  return "unknown";
}

Variant variant_from_string(const std::string& name) {
  if (name == "linear" || name == "spread_linear") return Variant::linear;
  if (name == "stabilized" || name == "spread_stabilized") return Variant::stabilized;
  if (name == "quadratic" || name == "spread_quadratic") return Variant::quadratic;
  if (name == "price_feedback" || name == "spread_price_feedback") return Variant::price_feedback;
  throw std::invalid_argument("unknown spread variant '" + name + "'");
}

void Params::validate() const {
  auto bad = [](const char* f, const char* what) {
    throw std::invalid_argument(std::string("spread: ") + f + " " + what);
  };
  if (!(lambda0_plus > 0) || !std::isfinite(lambda0_plus)) bad("lambda0_plus", "must be finite and > 0");
  if (!(lambda0_minus > 0) || !std::isfinite(lambda0_minus)) bad("lambda0_minus", "must be finite and > 0");
  if (!(alpha >= 0) || !std::isfinite(alpha)) bad("alpha", "must be finite and >= 0");
  if (!(beta > 0) || !std::isfinite(beta)) bad("beta", "must be finite and > 0");
  if (!(epsilon >= 0) || !std::isfinite(epsilon)) bad("epsilon", "must be finite and >= 0");
  if (epsilon != 0 && variant != Variant::quadratic) bad("epsilon", "is only used by the quadratic variant");
  if (!(horizon > 0) || !std::isfinite(horizon)) bad("horizon", "must be finite and > 0");
  if (spread_cap < 2) bad("spread_cap", "must be >= 2");
  if (initial_spread < 1 || initial_spread >= spread_cap) bad("initial_spread", "must be in [1, spread_cap)");
  if (!(escape_multiple >= 0)) bad("escape_multiple", "must be >= 0");
  if (!(measure_from >= 0)) bad("measure_from", "must be >= 0");
  if (sample_points == 1 || sample_points < 0) bad("sample_points", "must be 0 or >= 2");
  if (max_events == 0) bad("max_events", "must be > 0");
}

namespace {

class SpreadSim {
 public:
  explicit SpreadSim(const Params& p)
      : p_(p),
        rng_(p.seed, p.stream),
        feedback_{0.0, p.beta, 0.0},
        spread_(p.initial_spread) {
    if (p_.variant == Variant::price_feedback) {
      mark_ = std::sqrt(2.0 * p_.beta);
    } else {
      mark_ = p_.beta;
    }
    if (p_.variant == Variant::quadratic && p_.escape_multiple > 0 && p_.epsilon > 0) {
      x_escape_ = p_.escape_multiple * (1.0 - p_.alpha) / p_.epsilon;
      if (!(x_escape_ > 0)) x_escape_ = 0.0;
    }
    path_.max_spread = spread_;
    if (p_.sample_points > 0) {
      step_ = p_.horizon / (p_.sample_points - 1);
      const auto n = static_cast<std::size_t>(p_.sample_points);
      path_.sample_times.reserve(n);
      path_.spread_samples.reserve(n);
      path_.x_samples.reserve(n);
      if (p_.variant == Variant::price_feedback) path_.mid_samples.reserve(n);
    }
  }

  double opening_rate(double t) const {
    const double x = feedback_.value_at(t);
    switch (p_.variant) {
      case Variant::linear:
      case Variant::stabilized: return p_.lambda0_plus + p_.alpha * x;
      case Variant::quadratic: return p_.lambda0_plus + p_.alpha * x + p_.epsilon * x * x;
      case Variant::price_feedback: return p_.lambda0_plus + p_.alpha * x * x;
    }
    return 0.0;
  }

  double closing_rate() const {
    if (spread_ < 2) return 0.0;
    if (p_.variant == Variant::stabilized) return p_.lambda0_minus * (spread_ - 1);
    return p_.lambda0_minus;
  }

  void sample_until(double t) {
    if (p_.sample_points == 0) return;
    const auto n = static_cast<std::size_t>(p_.sample_points);
    while (next_sample_ < n) {
      const double ts = next_sample_ + 1 == n ? p_.horizon : step_ * static_cast<double>(next_sample_);
      if (ts >= t) break;
      path_.sample_times.push_back(ts);
      path_.spread_samples.push_back(spread_);
      path_.x_samples.push_back(feedback_.value_at(ts));
      if (p_.variant == Variant::price_feedback) path_.mid_samples.push_back(0.5 * mid2_);
      ++next_sample_;
    }
  }

  void occupy(double from, double to) {
    const double a = std::max(from, p_.measure_from);
    if (to <= a) return;
    const auto s = static_cast<std::size_t>(spread_);
    if (path_.spread_occupation.size() <= s) path_.spread_occupation.resize(s + 1, 0.0);
    path_.spread_occupation[s] += to - a;
  }

  SpreadPath run() {
    double t = 0.0;
    std::uint64_t events = 0;
    for (;;) {
      if (events >= p_.max_events) {
        path_.aborted = true;
        break;
      }
      const double closing = closing_rate();
      const auto proposal = sample_next_event(
          t, p_.horizon, opening_rate(t) + closing,
          [&](double s) { return opening_rate(s) + closing; }, rng_);
      if (!proposal) {
        sample_until(std::nextafter(p_.horizon, HUGE_VAL));
        occupy(t, p_.horizon);
        t = p_.horizon;
        break;
      }
      const double te = proposal->time;
      sample_until(te);
      occupy(t, te);
      t = te;
      ++events;
      const bool open = rng_.uniform() * proposal->intensity >= closing;
      const int ds = open ? 1 : -1;
      spread_ += ds;
      if (open) {
        ++path_.n_plus;
      } else {
        ++path_.n_minus;
      }
      if (p_.variant == Variant::price_feedback) {
        // Opening at the ask or closing at the bid moves the mid up half a tick.
        const bool at_ask = rng_.coin();
        const int dmid2 = (at_ask == open) ? 1 : -1;
        mid2_ += dmid2;
        feedback_.update(t, mark_ * 0.5 * dmid2);
        if (t >= p_.measure_from) path_.realized_price_variance += 0.25;
      } else if (open) {
        feedback_.update(t, mark_);
      }
      path_.max_spread = std::max(path_.max_spread, spread_);
      if (p_.record_events) {
        path_.event_times.push_back(t);
        path_.event_spreads.push_back(spread_);
      }
      if (spread_ >= p_.spread_cap || (x_escape_ > 0 && feedback_.value >= x_escape_)) {
        path_.escape_time = t;
        break;
      }
    }
    path_.final_time = t;
    path_.final_spread = spread_;
    path_.final_x = feedback_.value_at(t);
    path_.final_mid = 0.5 * mid2_;
    return std::move(path_);
  }

 private:
  Params p_;
  RngStream rng_;
  EwmaState feedback_;
  int spread_;
  long long mid2_ = 0;  // bid + ask relative to the start, half ticks
  double mark_ = 0.0;
  double x_escape_ = 0.0;
  double step_ = 0.0;
  std::size_t next_sample_ = 0;
  SpreadPath path_;
};

}  // namespace

SpreadPath run_spread(const Params& params) {
  params.validate();
  return SpreadSim(params).run();
}

double default_census_cap(const Params& params) {
  double scale = 10.0 / params.beta;
  if (params.variant == Variant::quadratic && params.epsilon > 0 && params.alpha < 1.0) {
    scale = std::max(scale, std::exp(theory::log_escape_time_asymptotic(params.lambda0_plus, params.alpha,
                                                                        params.beta, params.epsilon)));
    try {
      const auto m = theory::metastability_theory(params.lambda0_plus, params.alpha, params.beta,
                                                  params.epsilon);
      scale = std::max(scale, m.kramers_time);
    } catch (const std::domain_error&) {
    }
  }
  return 1000.0 * scale;
}

EscapeCensus escape_time_census(const Params& params, int replicas, double cap, unsigned workers,
                                int bootstrap) {
  if (params.variant != Variant::quadratic) {
    throw std::invalid_argument("escape_time_census: variant must be quadratic");
  }
  if (replicas < 1) throw std::invalid_argument("escape_time_census: replicas must be >= 1");
  params.validate();
  EscapeCensus c;
  c.replicas = replicas;
  c.cap = cap > 0 ? cap : default_census_cap(params);

  std::vector<SpreadPath> paths(static_cast<std::size_t>(replicas));
  parallel_for(paths.size(), workers, [&](std::size_t r) {
    Params p = params;
    p.horizon = c.cap;
    p.stream = stream_id_for(params.stream, r);
    p.sample_points = 0;
    p.record_events = false;
    paths[r] = run_spread(p);
  });

  double exposure = 0.0;
  for (const auto& path : paths) {
    exposure += path.final_time;
    if (path.aborted) {
      ++c.aborted;
    } else if (path.escape_time) {
      c.times.push_back(*path.escape_time);
    } else {
      ++c.censored;
    }
  }
  if (!c.times.empty()) {
    double sum = 0.0;
    for (double t : c.times) sum += t;
    c.mean = sum / static_cast<double>(c.times.size());
    c.mean_mle = exposure / static_cast<double>(c.times.size());
    // Percentile bootstrap of the mean.
    RngStream rng(params.seed ^ 0xB007B007ull, params.stream);
    std::vector<double> means;
    means.reserve(static_cast<std::size_t>(std::max(bootstrap, 1)));
    const auto n = static_cast<std::uint64_t>(c.times.size());
    for (int b = 0; b < bootstrap; ++b) {
      double s = 0.0;
      for (std::uint64_t i = 0; i < n; ++i) s += c.times[rng.uniform_index(n)];
      means.push_back(s / static_cast<double>(n));
    }
    if (!means.empty()) {
      std::sort(means.begin(), means.end());
      const auto lo = static_cast<std::size_t>(0.025 * static_cast<double>(means.size() - 1));
      const auto hi = static_cast<std::size_t>(0.975 * static_cast<double>(means.size() - 1));
      c.ci_low = means[lo];
      c.ci_high = means[hi];
    }
  }
  return c;
}

}  // namespace liqlab::spread
