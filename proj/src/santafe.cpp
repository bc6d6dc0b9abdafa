#include "liqlab/santafe.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "liqlab/analysis/stat_tests.hpp"
#include "liqlab/core/parallel.hpp"
#include "liqlab/core/thinning.hpp"

namespace liqlab::santafe {

namespace {

void require(bool ok, const char* field, const std::string& what) {
  if (!ok) throw std::invalid_argument(std::string("santafe: ") + field + " " + what);
}

}  // namespace

void Params::validate() const {
  require(std::isfinite(lambda) && lambda > 0, "lambda", "must be finite and > 0");
  require(std::isfinite(mu) && mu > 0, "mu", "must be finite and > 0");
  require(std::isfinite(nu0) && nu0 > 0, "nu0", "must be finite and > 0");
  require(std::isfinite(alpha_k) && alpha_k >= 0, "alpha_k", "must be finite and >= 0");
  require(std::isfinite(beta) && beta > 0, "beta", "must be finite and > 0");
  require(grid_size >= 4, "grid_size", "must be >= 4");
  require(std::isfinite(horizon) && horizon > 0, "horizon", "must be finite and > 0");
  require(std::isfinite(burn_in) && burn_in >= 0, "burn_in", "must be finite and >= 0");
  require(max_events > 0, "max_events", "must be > 0");
  require(sample_points >= 2, "sample_points", "must be >= 2");
  require(grid_size * horizon <= max_grid_horizon, "grid_size*horizon",
          "exceeds the budget guard " + std::to_string(max_grid_horizon));
}

// ---------------------------------------------------------------------------
// OrderBook

OrderBook::OrderBook(int grid_size)
    : queues_(static_cast<std::size_t>(grid_size), 0),
      fenwick_(static_cast<std::size_t>(grid_size) + 1, 0),
      best_bid_(-1),
      best_ask_(grid_size) {
  if (grid_size < 2) throw std::invalid_argument("OrderBook: grid_size must be >= 2");
}

void OrderBook::fenwick_add(int price, int delta) {
  for (auto i = static_cast<std::size_t>(price) + 1; i < fenwick_.size(); i += i & (~i + 1)) {
    fenwick_[i] += delta;
  }
}

int OrderBook::locate_order(std::int64_t k) const {
  if (k < 0 || k >= total_volume()) throw std::out_of_range("OrderBook: order index out of range");
  std::size_t pos = 0;
  std::size_t step = 1;
  while (step * 2 < fenwick_.size()) step *= 2;
  for (; step > 0; step /= 2) {
    const std::size_t next = pos + step;
    if (next < fenwick_.size() && fenwick_[next] <= k) {
      pos = next;
      k -= fenwick_[next];
    }
  }
  return static_cast<int>(pos);  // zero-based tick
}

void OrderBook::add(Side side, int price) {
  if (price < 0 || price >= size()) throw std::out_of_range("OrderBook: price outside grid");
  if (side == Side::bid) {
    if (price >= best_ask_) throw std::invalid_argument("OrderBook: bid at or above best ask");
    best_bid_ = std::max(best_bid_, price);
    ++bid_volume_;
  } else {
    if (price <= best_bid_) throw std::invalid_argument("OrderBook: ask at or below best bid");
    best_ask_ = std::min(best_ask_, price);
    ++ask_volume_;
  }
  ++queues_[static_cast<std::size_t>(price)];
  fenwick_add(price, 1);
}

void OrderBook::rescan_bid(int from) {
  int p = from;
  while (p >= 0 && queues_[static_cast<std::size_t>(p)] == 0) --p;
  best_bid_ = p;
}

void OrderBook::rescan_ask(int from) {
  int p = from;
  while (p < size() && queues_[static_cast<std::size_t>(p)] == 0) ++p;
  best_ask_ = p;
}

void OrderBook::remove(int price) {
  if (price < 0 || price >= size() || queues_[static_cast<std::size_t>(price)] == 0) {
    throw std::invalid_argument("OrderBook: remove from empty queue");
  }
  --queues_[static_cast<std::size_t>(price)];
  fenwick_add(price, -1);
  if (price <= best_bid_) {
    --bid_volume_;
    if (price == best_bid_ && queues_[static_cast<std::size_t>(price)] == 0) rescan_bid(price - 1);
  } else {
    --ask_volume_;
    if (price == best_ask_ && queues_[static_cast<std::size_t>(price)] == 0) rescan_ask(price + 1);
  }
}

bool OrderBook::remove_best(Side side) {
  if (side == Side::bid) {
    if (bid_volume_ == 0) return false;
    remove(best_bid_);
  } else {
    if (ask_volume_ == 0) return false;
    remove(best_ask_);
  }
  return true;
}

OrderBook OrderBook::mirrored() const {
  OrderBook m(size());
  const int n = size();
  // Bids of the mirror are the original asks, inserted from the outside in.
  for (int p = n - 1; p >= best_ask_ && p >= 0; --p) {
    for (int k = 0; k < queues_[static_cast<std::size_t>(p)]; ++k) m.add(Side::bid, n - 1 - p);
  }
  for (int p = 0; p <= best_bid_; ++p) {
    for (int k = 0; k < queues_[static_cast<std::size_t>(p)]; ++k) m.add(Side::ask, n - 1 - p);
  }
  return m;
}

bool OrderBook::check_invariants() const {
  std::int64_t bids = 0, asks = 0;
  int top_bid = -1, low_ask = size();
  for (int p = 0; p < size(); ++p) {
    const int q = queues_[static_cast<std::size_t>(p)];
    if (q < 0) return false;
    if (q == 0) continue;
    if (p <= best_bid_) {
      bids += q;
      top_bid = p;
    } else if (p >= best_ask_) {
      asks += q;
      low_ask = std::min(low_ask, p);
    } else {
      return false;  // order inside the spread
    }
  }
  if (bids != bid_volume_ || asks != ask_volume_) return false;
  if (bids > 0 && top_bid != best_bid_) return false;
  if (asks > 0 && low_ask != best_ask_) return false;
  std::int64_t prefix = 0;
  for (int p = 0; p < size(); ++p) prefix += queues_[static_cast<std::size_t>(p)];
  if (prefix != total_volume()) return false;
  return best_bid_ < best_ask_;
}

OrderBook seeded_book(const Params& params) {
  params.validate();
  OrderBook book(params.grid_size);
  const int depth = static_cast<int>(std::ceil(params.lambda / params.nu0));
  const int center = params.grid_size / 2;
  for (int p = center - 1; p >= 0; p -= 2) {
    for (int k = 0; k < depth; ++k) book.add(Side::bid, p);
  }
  for (int p = center + 1; p < params.grid_size; p += 2) {
    for (int k = 0; k < depth; ++k) book.add(Side::ask, p);
  }
  return book;
}

OrderBook init_equilibrium(const Params& params, RngStream& rng) {
  OrderBook book = seeded_book(params);
  if (params.burn_in <= 0.0) return book;
  Params quiet = params;
  quiet.alpha_k = 0.0;
  quiet.horizon = params.burn_in;
  Simulator sim(quiet, std::move(book), rng, false, false);
  const auto status = sim.advance_to(params.burn_in);
  if (status == Simulator::Status::crisis) {
    throw std::runtime_error("santafe: burn-in ended in a liquidity crisis at t=" +
                             std::to_string(sim.time()));
  }
  if (status == Simulator::Status::budget) {
    throw std::runtime_error("santafe: burn-in exhausted the event budget");
  }
  rng = sim.rng();
  return sim.book();
}

// ---------------------------------------------------------------------------
// Simulator

Simulator::Simulator(const Params& params, OrderBook book, RngStream rng, bool mirror_sides,
                     bool record)
    : params_(params),
      book_(std::move(book)),
      rng_(std::move(rng)),
      mirror_(mirror_sides),
      record_(record),
      feedback_{0.0, params.beta, 0.0},
      mark_scale_(std::sqrt(2.0 * params.beta)) {
  params_.validate();
  if (book_.size() != params_.grid_size) {
    throw std::invalid_argument("santafe: book size does not match grid_size");
  }
  if (book_.one_side_empty()) throw std::invalid_argument("santafe: initial book has an empty side");
  outcome_.max_spread = book_.spread();
  if (record_) {
    const auto pts = static_cast<std::size_t>(params_.sample_points);
    outcome_.sample_times.reserve(pts);
    outcome_.spread_samples.reserve(pts);
    outcome_.mid_samples.reserve(pts);
    outcome_.spread_occupation.assign(static_cast<std::size_t>(params_.grid_size) + 1, 0.0);
    sample_step_ = params_.horizon / static_cast<double>(params_.sample_points - 1);
    outcome_.record_times.push_back(0.0);
    outcome_.record_spreads.push_back(book_.spread());
  }
}

double Simulator::cancel_rate_at(double t) const {
  if (params_.alpha_k == 0.0) return params_.nu0;
  const double trend = feedback_.value_at(t);
  return params_.nu0 + params_.alpha_k * trend * trend;
}

void Simulator::record_until(double t) {
  // Samples every grid time strictly before t with the current state.
  const auto pts = static_cast<std::size_t>(params_.sample_points);
  while (next_sample_ < pts) {
    const double ts = next_sample_ + 1 == pts ? params_.horizon
                                              : sample_step_ * static_cast<double>(next_sample_);
    if (ts >= t) break;
    outcome_.sample_times.push_back(ts);
    outcome_.spread_samples.push_back(book_.spread());
    outcome_.mid_samples.push_back(book_.mid());
    ++next_sample_;
  }
}

std::optional<Event> Simulator::step(double horizon) {
  if (status_ != Status::running) return std::nullopt;
  if (outcome_.n_events >= params_.max_events) {
    status_ = Status::budget;
    outcome_.aborted = true;
    return std::nullopt;
  }

  const int n = params_.grid_size;
  const int b = book_.best_bid();
  const int a = book_.best_ask();
  const int bid_ticks = std::min(b + 1, a - 1) + 1;
  const int ask_ticks = n - std::max(a - 1, b + 1);
  const double lo_bid = params_.lambda * bid_ticks;
  const double lo_ask = params_.lambda * ask_ticks;
  const double fixed = lo_bid + lo_ask + 2.0 * params_.mu;
  const auto volume = static_cast<double>(book_.total_volume());

  auto intensity = [&](double t) { return fixed + cancel_rate_at(t) * volume; };
  const auto proposal = sample_next_event(time_, horizon, intensity(time_), intensity, rng_);
  if (!proposal) {
    if (record_) {
      record_until(horizon);
      outcome_.spread_occupation[static_cast<std::size_t>(book_.spread())] += horizon - time_;
    }
    time_ = horizon;
    return std::nullopt;
  }
  outcome_.proposals += proposal->proposals;
  const double t = proposal->time;

  const double cancel = cancel_rate_at(t) * volume;
  const std::array<double, kEventKinds> weights = {mirror_ ? lo_ask : lo_bid,
                                                   mirror_ ? lo_bid : lo_ask, params_.mu,
                                                   params_.mu, cancel};
  const double total = weights[0] + weights[1] + weights[2] + weights[3] + weights[4];
  const std::size_t pick = sample_categorical(weights, total, rng_);

  if (record_) {
    record_until(t);
    outcome_.spread_occupation[static_cast<std::size_t>(book_.spread())] += t - time_;
  }

  const Side first = mirror_ ? Side::ask : Side::bid;
  const Side second = mirror_ ? Side::bid : Side::ask;
  const double mid_before = book_.mid();
  Event ev;
  ev.time = t;
  switch (pick) {
    case 0:
    case 1: {
      const Side side = pick == 0 ? first : second;
      const int ticks = side == Side::bid ? bid_ticks : ask_ticks;
      const auto offset = static_cast<int>(rng_.uniform_index(static_cast<std::uint64_t>(ticks)));
      ev.price = side == Side::bid ? offset : n - 1 - offset;
      ev.kind = side == Side::bid ? EventKind::limit_bid : EventKind::limit_ask;
      book_.add(side, ev.price);
      break;
    }
    case 2:
    case 3: {
      const Side side = pick == 2 ? first : second;
      ev.price = side == Side::bid ? book_.best_bid() : book_.best_ask();
      ev.kind = side == Side::bid ? EventKind::market_bid : EventKind::market_ask;
      book_.remove_best(side);
      break;
    }
    default: {
      auto k = static_cast<std::int64_t>(
          rng_.uniform_index(static_cast<std::uint64_t>(book_.total_volume())));
      if (mirror_) k = book_.total_volume() - 1 - k;
      ev.price = book_.locate_order(k);
      ev.kind = EventKind::cancel;
      book_.remove(ev.price);
      break;
    }
  }
  time_ = t;
  ++outcome_.n_events;
  ++outcome_.event_counts[static_cast<std::size_t>(ev.kind)];

  if (book_.one_side_empty()) {
    status_ = Status::crisis;
    outcome_.crisis_time = t;
    outcome_.final_time = t;
    outcome_.max_spread = std::max(outcome_.max_spread, std::min(book_.spread(), n));
    return ev;
  }

  ev.mid_change = book_.mid() - mid_before;
  if (ev.mid_change != 0.0) {
    feedback_.update(t, mark_scale_ * ev.mid_change);
    outcome_.realized_variance += ev.mid_change * ev.mid_change;
  }
  const int s = book_.spread();
  if (s > outcome_.max_spread) {
    outcome_.max_spread = s;
    if (record_) {
      outcome_.record_times.push_back(t);
      outcome_.record_spreads.push_back(s);
    }
  }
  return ev;
}

Simulator::Status Simulator::advance_to(double t) {
  while (status_ == Status::running && time_ < t) {
    if (!step(t)) break;
  }
  return status_;
}

void Simulator::finish(double t) {
  if (status_ == Status::running) {
    status_ = Status::horizon;
    if (record_) record_until(std::nextafter(t, HUGE_VAL));
  }
  outcome_.final_time = status_ == Status::crisis ? outcome_.final_time : time_;
}

const SimOutcome& Simulator::run_to_horizon() {
  advance_to(params_.horizon);
  finish(params_.horizon);
  return outcome_;
}

SimOutcome run(const Params& params) {
  params.validate();
  RngStream rng(params.seed, params.stream);
  OrderBook book = init_equilibrium(params, rng);
  Simulator sim(params, std::move(book), rng);
  sim.run_to_horizon();
  return sim.outcome();
}

CrisisMap crisis_probability_map(const Params& base, std::span<const double> alphas,
                                 std::span<const double> betas, int replicas, unsigned workers) {
  if (alphas.empty() || betas.empty()) throw std::invalid_argument("crisis map: empty grid");
  if (replicas < 1) throw std::invalid_argument("crisis map: replicas must be >= 1");
  base.validate();
  CrisisMap map;
  map.alphas.assign(alphas.begin(), alphas.end());
  map.betas.assign(betas.begin(), betas.end());
  const std::size_t n_cells = alphas.size() * betas.size();
  const auto reps = static_cast<std::size_t>(replicas);

  struct ReplicaResult {
    bool crisis = false;
    bool aborted = false;
  };
  std::vector<ReplicaResult> results(n_cells * reps);
  parallel_for(results.size(), workers, [&](std::size_t job) {
    const std::size_t cell = job / reps;
    const std::size_t replica = job % reps;
    Params p = base;
    p.alpha_k = alphas[cell % alphas.size()];
    p.beta = betas[cell / alphas.size()];
    p.stream = stream_id_for(cell, replica);
    p.sample_points = 2;
    const SimOutcome out = run(p);
    results[job] = {out.crisis_time.has_value(), out.aborted};
  });

  map.cells.resize(n_cells);
  for (std::size_t cell = 0; cell < n_cells; ++cell) {
    CrisisCell& c = map.cells[cell];
    c.alpha_k = alphas[cell % alphas.size()];
    c.beta = betas[cell / alphas.size()];
    c.replicas = replicas;
    for (std::size_t r = 0; r < reps; ++r) {
      const auto& res = results[cell * reps + r];
      c.crises += res.crisis ? 1 : 0;
      c.aborted += res.aborted ? 1 : 0;
    }
    if (c.aborted == 0) {
      c.probability = static_cast<double>(c.crises) / replicas;
      const auto ci = analysis::wilson_interval(c.crises, replicas);
      c.ci_low = ci.first;
      c.ci_high = ci.second;
    }
  }
  return map;
}

}  // namespace liqlab::santafe
