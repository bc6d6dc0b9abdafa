#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "liqlab/analysis/stat_tests.hpp"
#include "liqlab/santafe.hpp"

using namespace liqlab;
using namespace liqlab::santafe;

namespace {

Params small(double alpha_k = 0.0) {
  Params p;
  p.grid_size = 60;
  p.horizon = 50.0;
  p.burn_in = 5.0;
  p.alpha_k = alpha_k;
  return p;
}

std::vector<double> poisson_probs(double mean, int kmax) {
  std::vector<double> p;
  double term = std::exp(-mean);
  for (int k = 0; k <= kmax; ++k) {
    p.push_back(term);
    term *= mean / (k + 1);
  }
  return p;
}

}  // namespace

TEST_CASE("deep queues are Poisson(lambda / nu0) at alpha_K = 0") {
  Params p;
  p.seed = 17;
  RngStream rng(p.seed, 0);
  Simulator sim(p, init_equilibrium(p, rng), rng, false, false);
  std::vector<double> counts(40, 0.0);
  int obs = 0;
  for (int k = 1; obs < 10000; ++k) {
    REQUIRE(sim.advance_to(3.0 * k) == Simulator::Status::running);
    const auto& b = sim.book();
    for (int d : {12, 40, 80, 120}) {
      for (int price : {b.best_bid() - d, b.best_ask() + d}) {
        if (price < 0 || price >= b.size()) continue;
        counts[static_cast<std::size_t>(std::min(b.queue(price), 39))] += 1.0;
        ++obs;
      }
    }
  }
  auto probs = poisson_probs(p.lambda / p.nu0, 38);
  probs.push_back(0.0);
  double tail = 1.0;
  for (double q : probs) tail -= q;
  probs.back() = tail;
  const auto gof = analysis::chi_square_gof(counts, probs);
  INFO("chi2 = " << gof.statistic << " dof = " << gof.dof);
  CHECK(gof.p_value > 0.01);
}

TEST_CASE("init_equilibrium is deterministic and the identity at burn_in = 0") {
  Params p = small();
  RngStream a(5, 1), b(5, 1);
  const auto ba = init_equilibrium(p, a), bb = init_equilibrium(p, b);
  CHECK(std::equal(ba.queues().begin(), ba.queues().end(), bb.queues().begin()));
  p.burn_in = 0.0;
  RngStream c(5, 1);
  const auto seeded = seeded_book(p);
  const auto same = init_equilibrium(p, c);
  CHECK(std::equal(seeded.queues().begin(), seeded.queues().end(), same.queues().begin()));
}

TEST_CASE("limit orders respect the deposition regions and volume changes by one") {
  Params p;
  p.alpha_k = 0.1;
  p.grid_size = 280;
  RngStream rng(8, 8);
  Simulator sim(p, init_equilibrium(p, rng), rng);
  int checked = 0;
  while (checked < 1000000) {
    const int b = sim.book().best_bid(), a = sim.book().best_ask();
    const auto vol = sim.book().total_volume();
    const auto ev = sim.step(1e18);
    REQUIRE(ev.has_value());
    const auto dv = sim.book().total_volume() - vol;
    REQUIRE(std::abs(dv) == 1);
    if (ev->kind == EventKind::limit_bid) REQUIRE(ev->price <= std::min(b + 1, a - 1));
    if (ev->kind == EventKind::limit_ask) REQUIRE(ev->price >= std::max(a - 1, b + 1));
    REQUIRE(sim.book().best_bid() < sim.book().best_ask());
    ++checked;
    if (sim.status() != Simulator::Status::running) break;
  }
  CHECK(sim.book().check_invariants());
  CHECK(checked == 1000000);
}

TEST_CASE("cancellation hazard of a queue is q * nu0") {
  Params p;
  p.grid_size = 120;
  p.nu0 = 0.7;
  RngStream rng(21, 0);
  Simulator sim(p, init_equilibrium(p, rng), rng, false, false);
  const int tick = 10;  // deep on the bid side
  double exposure = 0.0;
  int cancels = 0;
  double t = sim.time();
  while (t < 400.0) {
    const int q = sim.book().queue(tick);
    const auto ev = sim.step(400.0);
    if (!ev) break;
    REQUIRE(sim.book().best_bid() > tick);
    exposure += q * p.nu0 * (ev->time - t);
    t = ev->time;
    if (ev->kind == EventKind::cancel && ev->price == tick) ++cancels;
  }
  CHECK(std::abs(cancels - exposure) < 3.0 * std::sqrt(exposure));
}

TEST_CASE("feedback cancel rate is >= nu0 and decays without mid changes") {
  Params p = small(1.0);
  RngStream rng(4, 4);
  Simulator sim(p, init_equilibrium(p, rng), rng);
  int decays = 0;
  while (decays < 200) {
    const auto ev = sim.step(1e18);
    REQUIRE(ev.has_value());
    if (sim.status() != Simulator::Status::running) break;
    const double t = ev->time;
    const double r0 = sim.cancel_rate_at(t), r1 = sim.cancel_rate_at(t + 0.5), r2 = sim.cancel_rate_at(t + 2.0);
    REQUIRE(r0 >= p.nu0);
    REQUIRE(r1 <= r0);
    REQUIRE(r2 <= r1);
    if (r0 > p.nu0) {
      REQUIRE(r2 < r0);
      ++decays;
    }
  }
  CHECK(decays > 0);
}

TEST_CASE("mirrored book with mirrored draws gives the mirrored path") {
  Params p = small(0.5);
  RngStream rng(13, 2);
  const auto book = init_equilibrium(p, rng);
  Simulator a(p, book, rng, false);
  Simulator b(p, book.mirrored(), rng, true);
  const int n = p.grid_size;
  for (int i = 0; i < 20000; ++i) {
    const auto ea = a.step(1e18);
    const auto eb = b.step(1e18);
    REQUIRE(ea.has_value() == eb.has_value());
    if (!ea) break;
    REQUIRE(ea->time == eb->time);
    REQUIRE(eb->price == n - 1 - ea->price);
    REQUIRE(eb->mid_change == -ea->mid_change);
    for (int x = 0; x < n; ++x) REQUIRE(a.book().queue(x) == b.book().queue(n - 1 - x));
    if (a.status() != Simulator::Status::running) break;
  }
}

TEST_CASE("crisis time is a stopping time") {
  Params p = small(2.0);
  p.horizon = 400.0;
  p.seed = 3;
  const auto full = run(p);
  REQUIRE(full.crisis_time.has_value());
  const double tau = *full.crisis_time;
  CHECK(tau <= p.horizon);
  CHECK(full.max_spread <= p.grid_size);
  p.horizon = tau + 50.0;
  CHECK(run(p).crisis_time == full.crisis_time);
  p.horizon = tau * (1.0 - 1e-9);
  CHECK_FALSE(run(p).crisis_time.has_value());
}

TEST_CASE("budget abort is reported separately from crisis") {
  Params p = small(0.0);
  p.max_events = 1000;
  p.burn_in = 0.0;
  const auto o = run(p);
  CHECK(o.aborted);
  CHECK_FALSE(o.crisis_time.has_value());
}

TEST_CASE("alpha_K = 0 is stable at T = 200, N = 280 (smoke)") {
  Params p;
  int crises = 0;
  for (int r = 0; r < 10; ++r) {
    p.stream = stream_id_for(0, static_cast<std::uint64_t>(r));
    crises += run(p).crisis_time ? 1 : 0;
  }
  CHECK(crises == 0);
}

TEST_CASE("crisis map is deterministic and has a zero alpha_K column") {
  Params p = small();
  p.horizon = 30.0;
  const std::vector<double> alphas{0.0, 3.0}, betas{1.0};
  const auto m1 = crisis_probability_map(p, alphas, betas, 6, 1);
  const auto m2 = crisis_probability_map(p, alphas, betas, 6, 3);
  for (std::size_t i = 0; i < m1.cells.size(); ++i) {
    CHECK(m1.cells[i].crises == m2.cells[i].crises);
    CHECK(m1.cells[i].ci_low <= m1.cells[i].ci_high);
  }
  CHECK(m1.at(0, 0).crises == 0);
  CHECK(m1.at(1, 0).crises >= m1.at(0, 0).crises);
}

TEST_CASE("parameter validation names the field") {
  Params p;
  p.grid_size = 3;
  CHECK_THROWS_WITH_AS(p.validate(), doctest::Contains("grid_size"), std::invalid_argument);
  p = Params{};
  p.beta = 0.0;
  CHECK_THROWS_WITH_AS(p.validate(), doctest::Contains("beta"), std::invalid_argument);
}
