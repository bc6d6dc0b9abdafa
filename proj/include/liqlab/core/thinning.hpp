#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>

#include "liqlab/core/rng.hpp"

namespace liqlab {

struct ThinnedEvent {
  double time = 0.0;
  double intensity = 0.0;  // intensity at the accepted time
  std::size_t proposals = 0;
};

/// Ogata thinning for an intensity that is non-increasing on [start, horizon)
/// in the absence of events.
///
/// `bound` must dominate the intensity at `start`. After each rejection the
/// bound is lowered to the intensity at the rejected point, which stays valid
/// because the intensity cannot increase until the next event. Returns the
/// first accepted time before `horizon`, or nullopt.
template <class IntensityFn>
std::optional<ThinnedEvent> sample_next_event(double start, double horizon, double bound,
                                              IntensityFn&& intensity_at, RngStream& rng) {
  if (!std::isfinite(bound)) throw std::invalid_argument("thinning: non-finite bound");
  if (bound <= 0.0) {
    const double at_start = intensity_at(start);
    if (at_start > 0.0) throw std::invalid_argument("thinning: bound <= 0 with positive intensity");
    return std::nullopt;
  }
  double t = start;
  std::size_t proposals = 0;
  for (;;) {
    double next = t + rng.exponential(bound);
    while (next == t) next = t + rng.exponential(bound);
    t = next;
    if (t >= horizon) return std::nullopt;
    ++proposals;
    const double lambda = intensity_at(t);
    if (!std::isfinite(lambda) || lambda < 0.0) {
      throw std::invalid_argument("thinning: intensity evaluation is negative or not finite");
    }
    if (lambda > bound * (1.0 + 1e-12)) {
      throw std::logic_error("thinning: intensity exceeds its declared bound");
    }
    if (rng.uniform() * bound <= lambda) return ThinnedEvent{t, lambda, proposals};
    if (lambda <= 0.0) return std::nullopt;  // intensity stays at zero until an event
    bound = lambda;
  }
}

/// Draws index i with probability weights[i] / sum(weights).
std::size_t sample_categorical(std::span<const double> weights, RngStream& rng);

/// Same draw with the total supplied by the caller (hot loops keep it around).
std::size_t sample_categorical(std::span<const double> weights, double total, RngStream& rng);

}  // namespace liqlab
