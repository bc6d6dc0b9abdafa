#include <doctest.h>

#include <cmath>
#include <thread>
#include <vector>

#include "liqlab/analysis/stat_tests.hpp"
#include "liqlab/core/ewma.hpp"
#include "liqlab/core/parallel.hpp"
#include "liqlab/core/rng.hpp"
#include "liqlab/core/thinning.hpp"

using namespace liqlab;

TEST_CASE("philox known-answer vectors") {
  using B = std::array<std::uint32_t, 4>;
  CHECK(RngStream::philox_block({0, 0, 0, 0}, {0, 0}) == B{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
  CHECK(RngStream::philox_block({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, {0xffffffff, 0xffffffff}) ==
        B{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
  CHECK(RngStream::philox_block({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, {0xa4093822, 0x299f31d0}) ==
        B{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
}

TEST_CASE("same seed and stream replay bit for bit, across threads") {
  auto draw = [](std::uint64_t seed, std::uint64_t stream) {
    RngStream r(seed, stream);
    std::vector<std::uint64_t> v;
    for (int i = 0; i < 1000; ++i) v.push_back(r());
    return v;
  };
  const auto a = draw(42, 7);
  CHECK(a == draw(42, 7));
  std::vector<std::vector<std::uint64_t>> slots(8);
  parallel_for(slots.size(), 4, [&](std::size_t i) { slots[i] = draw(42, 7); });
  for (const auto& s : slots) CHECK(s == a);
  CHECK(a != draw(42, 8));
  CHECK(a != draw(43, 7));
}

TEST_CASE("distinct streams are equidistributed and uncorrelated") {
  constexpr int n = 100000, bins = 10;
  std::vector<double> obs(bins, 0.0), p(bins, 1.0 / bins);
  RngStream a(1, stream_id_for(0, 0)), b(1, stream_id_for(0, 1));
  double sab = 0.0;
  for (int i = 0; i < n; ++i) {
    const double u = a.uniform(), v = b.uniform();
    obs[static_cast<std::size_t>(u * bins)] += 1.0;
    sab += (u - 0.5) * (v - 0.5);
  }
  CHECK(analysis::chi_square_gof(obs, p).p_value > 0.001);
  const double corr = sab / n * 12.0;
  CHECK(std::abs(corr) < 4.0 / std::sqrt(n));
}

TEST_CASE("uniform stays in the open interval") {
  RngStream r(0, 0);
  for (int i = 0; i < 100000; ++i) {
    const double u = r.uniform();
    REQUIRE(u > 0.0);
    REQUIRE(u < 1.0);
  }
}

TEST_CASE("ewma update examples") {
  EwmaState s{1.0, 1.0, 0.0};
  CHECK(ewma_update(s, 0.0, 0.0).value == 1.0);
  CHECK(ewma_update(s, std::log(2.0), 0.0).value == doctest::Approx(0.5).epsilon(1e-15));
  EwmaState z{0.0, 1.0, 0.0};
  z.update(0.0, 1.0);
  z.update(1.0, 1.0);
  z.update(2.0, 1.0);
  CHECK(z.value == doctest::Approx(std::exp(-2.0) + std::exp(-1.0) + 1.0).epsilon(1e-15));
  CHECK_THROWS_AS(ewma_update(z, 1.5, 0.0), std::invalid_argument);
}

TEST_CASE("lazy ewma equals eager summation over 1000 events") {
  RngStream r(3, 3);
  EwmaState s{0.0, 0.7, 0.0};
  std::vector<double> times, marks;
  double t = 0.0;
  for (int i = 0; i < 1000; ++i) {
    t += r.exponential(2.0);
    const double m = r.normal();
    times.push_back(t);
    marks.push_back(m);
    s.update(t, m);
  }
  const double t_end = t + 0.3;
  double eager = 0.0;
  for (std::size_t i = 0; i < times.size(); ++i) eager += marks[i] * std::exp(-0.7 * (t_end - times[i]));
  CHECK(s.value_at(t_end) == doctest::Approx(eager).epsilon(1e-12));
}

TEST_CASE("thinning with constant intensity gives Exponential(2) gaps") {
  RngStream r(11, 0);
  std::vector<double> gaps;
  double t = 0.0;
  for (int i = 0; i < 100000; ++i) {
    const auto ev = sample_next_event(t, 1e300, 2.0, [](double) { return 2.0; }, r);
    REQUIRE(ev.has_value());
    gaps.push_back(ev->time - t);
    t = ev->time;
  }
  const auto ks = analysis::ks_test(gaps, [](double x) { return 1.0 - std::exp(-2.0 * x); });
  CHECK(ks.p_value > 0.01);
}

TEST_CASE("thinning edge cases") {
  RngStream r(1, 1);
  CHECK_FALSE(sample_next_event(0.0, 1e6, 0.0, [](double) { return 0.0; }, r).has_value());
  CHECK_FALSE(sample_next_event(0.0, 1e6, 1.0, [](double) { return 0.0; }, r).has_value());
  CHECK_THROWS_AS(sample_next_event(0.0, 1e6, 0.0, [](double) { return 1.0; }, r), std::invalid_argument);
  CHECK_THROWS_AS(sample_next_event(0.0, 1e6, 1.0, [](double) { return std::nan(""); }, r), std::invalid_argument);
}

TEST_CASE("thinning a decaying intensity matches the rate integral") {
  const double nu0 = 0.5, c = 3.0, beta = 0.4, T = 5.0;
  auto lam = [&](double t) { return nu0 + c * std::exp(-2.0 * beta * t); };
  const double expected = nu0 * T + c * (1.0 - std::exp(-2.0 * beta * T)) / (2.0 * beta);
  RngStream r(5, 5);
  constexpr int reps = 20000;
  double sum = 0.0, sum2 = 0.0;
  for (int k = 0; k < reps; ++k) {
    double t = 0.0;
    int n = 0;
    while (auto ev = sample_next_event(t, T, lam(t), lam, r)) {
      t = ev->time;
      ++n;
    }
    sum += n;
    sum2 += static_cast<double>(n) * n;
  }
  const double mean = sum / reps;
  const double se = std::sqrt((sum2 / reps - mean * mean) / reps);
  CHECK(std::abs(mean - expected) < 3.0 * se);
}

TEST_CASE("categorical sampling") {
  RngStream r(9, 9);
  const std::vector<double> degenerate{1, 0, 0};
  for (int i = 0; i < 1000; ++i) REQUIRE(sample_categorical(degenerate, r) == 0);

  constexpr int n = 100000;
  const std::vector<double> coin{1, 1};
  int zeros = 0;
  for (int i = 0; i < n; ++i) zeros += sample_categorical(coin, r) == 0 ? 1 : 0;
  CHECK(std::abs(zeros / double(n) - 0.5) < 0.01);

  const std::vector<double> w{1, 2, 3};
  std::vector<int> count(3, 0);
  for (int i = 0; i < n; ++i) ++count[sample_categorical(w, r)];
  for (int i = 0; i < 3; ++i) {
    const double p = (i + 1) / 6.0;
    CHECK(std::abs(count[static_cast<std::size_t>(i)] - n * p) < 3.0 * std::sqrt(n * p * (1 - p)));
  }
  const std::vector<double> zero{0, 0}, neg{1, -1};
  CHECK_THROWS_AS(sample_categorical(zero, r), std::invalid_argument);
  CHECK_THROWS_AS(sample_categorical(neg, r), std::invalid_argument);
}
