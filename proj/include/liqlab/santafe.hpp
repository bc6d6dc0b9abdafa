#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "liqlab/core/ewma.hpp"
#include "liqlab/core/rng.hpp"

/// Santa Fe zero-intelligence order book with quadratic trend feedback on the
/// cancellation rate:
///   nu_t = nu0 + alpha_K * ( sum_i sqrt(2 beta) exp(-beta (t - t_i)) dP_i )^2
/// where dP_i are mid-price changes in ticks.
namespace liqlab::santafe {

struct Params {
  double lambda = 10.0;  // limit-order rate per tick
  double mu = 20.0;      // half of the total market-order rate
  double nu0 = 1.0;      // baseline cancellation rate per resting order
  double alpha_k = 0.0;  // feedback strength
  double beta = 1.0;     // trend memory rate
  int grid_size = 280;   // N, ticks
  double horizon = 200.0;
  double burn_in = 20.0;
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
  std::uint64_t max_events = 100'000'000;
  int sample_points = 1000;
  double max_grid_horizon = 1e9;  // guard on N * T

  /// Throws std::invalid_argument naming the offending field.
  void validate() const;
};

enum class Side : std::uint8_t { bid, ask };

enum class EventKind : std::uint8_t { limit_bid, limit_ask, market_bid, market_ask, cancel };
inline constexpr std::size_t kEventKinds = 5;

/// Fixed window of N ticks holding unit orders. Bid queues sit at or below the
/// best bid, ask queues at or above the best ask. An empty side has its best
/// quote parked outside the grid (-1 for bids, N for asks).
class OrderBook {
 public:
  explicit OrderBook(int grid_size);

  int size() const { return static_cast<int>(queues_.size()); }
  int queue(int price) const { return queues_[static_cast<std::size_t>(price)]; }
  std::span<const int> queues() const { return queues_; }
  int best_bid() const { return best_bid_; }
  int best_ask() const { return best_ask_; }
  int spread() const { return best_ask_ - best_bid_; }
  double mid() const { return 0.5 * (best_bid_ + best_ask_); }
  std::int64_t bid_volume() const { return bid_volume_; }
  std::int64_t ask_volume() const { return ask_volume_; }
  std::int64_t total_volume() const { return bid_volume_ + ask_volume_; }
  bool one_side_empty() const { return bid_volume_ == 0 || ask_volume_ == 0; }

  /// Adds one order. Bids must be strictly below the best ask, asks strictly
  /// above the best bid.
  void add(Side side, int price);
  /// Removes one order from the queue at `price` (which must be non-empty).
  void remove(int price);
  /// Removes one order at the best quote of `side`; false when that side is empty.
  bool remove_best(Side side);
  /// Tick holding the k-th resting order counted from tick 0, k in [0, total_volume).
  int locate_order(std::int64_t k) const;

  /// Mirror image p -> N-1-p with bids and asks exchanged.
  OrderBook mirrored() const;
  /// Checks best-quote and volume bookkeeping against the raw queues.
  bool check_invariants() const;

 private:
  void fenwick_add(int price, int delta);
  void rescan_bid(int from);
  void rescan_ask(int from);

  std::vector<int> queues_;
  std::vector<std::int64_t> fenwick_;
  int best_bid_;
  int best_ask_;
  std::int64_t bid_volume_ = 0;
  std::int64_t ask_volume_ = 0;
};

/// Alternate ticks on both sides of the grid center filled with ceil(lambda/nu0).
OrderBook seeded_book(const Params& params);

/// Runs the alpha_K = 0 dynamics for params.burn_in from the seeded book.
/// Throws std::runtime_error if a crisis occurs during burn-in.
OrderBook init_equilibrium(const Params& params, RngStream& rng);

struct Event {
  double time = 0.0;
  EventKind kind = EventKind::limit_bid;
  int price = 0;
  double mid_change = 0.0;
};

struct SimOutcome {
  std::optional<double> crisis_time;
  bool aborted = false;  // event budget exhausted before crisis or horizon
  int max_spread = 0;
  double final_time = 0.0;
  std::vector<double> sample_times;
  std::vector<int> spread_samples;
  std::vector<double> mid_samples;
  std::vector<double> record_times;  // times of running-max spread record highs
  std::vector<int> record_spreads;
  std::array<std::uint64_t, kEventKinds> event_counts{};
  std::uint64_t n_events = 0;
  std::uint64_t proposals = 0;
  double realized_variance = 0.0;  // sum of squared mid changes, ticks^2
  std::vector<double> spread_occupation;  // time spent at spread s, index s
};

class Simulator {
 public:
  enum class Status { running, crisis, horizon, budget };

  /// `mirror_sides` swaps which side consumes each random draw; a mirrored book
  /// simulated with mirror_sides reproduces the mirror image of the original path.
  Simulator(const Params& params, OrderBook book, RngStream rng, bool mirror_sides = false,
            bool record = true);

  /// Executes the next event if it occurs before `horizon`.
  std::optional<Event> step(double horizon);
  /// Simulates until time t (book state at t), a crisis, or the budget.
  Status advance_to(double t);
  /// advance_to(params.horizon) and closes the sampling grid.
  const SimOutcome& run_to_horizon();

  Status status() const { return status_; }
  double time() const { return time_; }
  const OrderBook& book() const { return book_; }
  const EwmaState& feedback() const { return feedback_; }
  double cancel_rate_at(double t) const;
  const SimOutcome& outcome() const { return outcome_; }
  RngStream& rng() { return rng_; }

 private:
  void record_until(double t);
  void finish(double t);

  Params params_;
  OrderBook book_;
  RngStream rng_;
  bool mirror_;
  bool record_;
  EwmaState feedback_;
  double mark_scale_;
  double time_ = 0.0;
  Status status_ = Status::running;
  SimOutcome outcome_;
  std::size_t next_sample_ = 0;
  double sample_step_ = 0.0;
};

/// One replica: burn-in from the seeded book, then feedback dynamics on [0, T].
SimOutcome run(const Params& params);

struct CrisisCell {
  double alpha_k = 0.0;
  double beta = 0.0;
  int replicas = 0;
  int crises = 0;
  int aborted = 0;
  std::optional<double> probability;  // missing when any replica aborted
  double ci_low = 0.0;
  double ci_high = 0.0;
};

struct CrisisMap {
  std::vector<double> alphas;
  std::vector<double> betas;
  std::vector<CrisisCell> cells;  // row-major: cells[i_beta * alphas.size() + i_alpha]
  const CrisisCell& at(std::size_t i_alpha, std::size_t i_beta) const {
    return cells[i_beta * alphas.size() + i_alpha];
  }
};

/// P[tau_c <= T] per (alpha_K, beta) cell with Wilson 95% intervals. Replica r
/// of cell c uses stream_id_for(c, r) under base.seed.
CrisisMap crisis_probability_map(const Params& base, std::span<const double> alphas,
                                 std::span<const double> betas, int replicas,
                                 unsigned workers = 0);

}  // namespace liqlab::santafe
