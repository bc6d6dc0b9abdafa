#include "liqlab/core/ewma.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace liqlab {

double EwmaState::value_at(double t) const {
  if (t < last_update) {
    throw std::invalid_argument("ewma: time " + std::to_string(t) + " precedes last update " +
                                std::to_string(last_update));
  }
  if (t == last_update || value == 0.0) return value;
  return value * std::exp(-rate * (t - last_update));
}

void EwmaState::update(double t_new, double mark) {
  if (!std::isfinite(mark)) throw std::invalid_argument("ewma: non-finite mark");
  value = value_at(t_new) + mark;
  last_update = t_new;
}

EwmaState EwmaState::updated(double t_new, double mark) const {
  EwmaState next = *this;
  next.update(t_new, mark);
  return next;
}

EwmaState ewma_update(const EwmaState& state, double t_new, double mark) {
  return state.updated(t_new, mark);
}

}  // namespace liqlab
