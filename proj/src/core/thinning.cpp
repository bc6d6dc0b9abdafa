#include "liqlab/core/thinning.hpp"

namespace liqlab {

std::size_t sample_categorical(std::span<const double> weights, RngStream& rng) {
  double total = 0.0;
  for (double w : weights) {
    if (!std::isfinite(w) || w < 0.0) {
      throw std::invalid_argument("categorical: weights must be finite and non-negative");
    }
    total += w;
  }
  if (total <= 0.0) throw std::invalid_argument("categorical: all weights are zero");
  return sample_categorical(weights, total, rng);
}

std::size_t sample_categorical(std::span<const double> weights, double total, RngStream& rng) {
  const double target = rng.uniform() * total;
  double acc = 0.0;
  std::size_t last_positive = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (weights[i] <= 0.0) continue;
    acc += weights[i];
    last_positive = i;
    if (target < acc) return i;
  }
  // Round-off can leave target just above the accumulated sum.
  return last_positive;
}

}  // namespace liqlab
