#pragma once

namespace liqlab {

/// Exponentially weighted moving average of a marked point process,
/// X(t) = sum_i mark_i * exp(-rate * (t - t_i)), stored lazily: only the value
/// at the last update time is kept and decay is applied on demand.
struct EwmaState {
  double value = 0.0;
  double rate = 1.0;
  double last_update = 0.0;

  /// Value at time t >= last_update without adding a mark.
  double value_at(double t) const;

  /// Decays to t_new and adds `mark`. Throws std::invalid_argument when time
  /// runs backwards or the mark is not finite.
  EwmaState updated(double t_new, double mark) const;

  /// In-place variant of updated().
  void update(double t_new, double mark);
};

/// Free-function form of EwmaState::updated.
EwmaState ewma_update(const EwmaState& state, double t_new, double mark);

}  // namespace liqlab
