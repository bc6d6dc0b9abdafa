#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "liqlab/analysis/flux.hpp"
#include "liqlab/analysis/fss.hpp"
#include "liqlab/analysis/stat_tests.hpp"
#include "liqlab/analysis/survival.hpp"
#include "liqlab/analysis/susceptibility.hpp"
#include "liqlab/core/rng.hpp"
#include "liqlab/theory.hpp"

using namespace liqlab;
using namespace liqlab::analysis;

namespace {

// P[X >= n] = r^(n-1), n >= 1
std::vector<double> geometric_sample(double r, int n, RngStream& rng) {
  std::vector<double> xs(static_cast<std::size_t>(n));
  for (auto& x : xs) x = 1.0 + std::floor(std::log(rng.uniform()) / std::log(r));
  return xs;
}

StreamEvent ev(double t, OrderType ty, BookSide sd, double dp = 0.0) {
  StreamEvent e;
  e.time = t;
  e.type = ty;
  e.side = sd;
  e.mid_change = dp;
  return e;
}

std::vector<StreamEvent> random_stream(int n, RngStream& rng, bool unit_spacing) {
  std::vector<StreamEvent> s;
  double t = 0.0;
  for (int i = 0; i < n; ++i) {
    t += unit_spacing ? 1.0 : rng.exponential(1.0);
    const auto ty = rng.coin() ? OrderType::limit : (rng.coin() ? OrderType::cancel : OrderType::market);
    const double dp = rng.uniform() < 0.3 ? (rng.coin() ? 1.0 : -1.0) : 0.0;
    s.push_back(ev(t, ty, rng.coin() ? BookSide::bid : BookSide::ask, dp));
  }
  return s;
}

}  // namespace

TEST_CASE("empirical sf basics") {
  const std::vector<double> xs{2, 2, 3};
  const auto c = empirical_sf(xs);
  CHECK(c.at(2.0) == 1.0);
  CHECK(c.at(3.0) == doctest::Approx(1.0 / 3.0));
  CHECK(c.at(3.5) == 0.0);
  CHECK(c.at(0.0) == 1.0);

  RngStream rng(1, 0);
  std::vector<double> base, w, dup;
  for (int i = 0; i < 200; ++i) {
    const double x = std::floor(rng.uniform() * 30.0);
    base.push_back(x);
    w.push_back(i % 2 == 0 ? 2.0 : 1.0);
    dup.push_back(x);
    if (i % 2 == 0) dup.push_back(x);
  }
  const auto a = empirical_sf(base, w), b = empirical_sf(dup);
  CHECK(a.support == b.support);
  CHECK(a.survival == b.survival);
  CHECK(a.mass == b.mass);

  const std::vector<double> zeros(3, 0.0);
  CHECK_THROWS_AS(empirical_sf(xs, zeros), std::invalid_argument);
  CHECK_THROWS_AS(empirical_sf(std::vector<double>{}), std::invalid_argument);
}

TEST_CASE("geometric sample: log-sf slope and ML ratio") {
  RngStream rng(2, 0);
  const auto half = geometric_sample(0.5, 100000, rng);
  const auto c = empirical_sf(half);
  std::vector<double> x, y;
  for (std::size_t i = 0; i < c.support.size(); ++i) {
    if (c.survival[i] * 100000 < 100) break;
    x.push_back(c.support[i]);
    y.push_back(std::log(c.survival[i]));
  }
  CHECK(std::abs(fit_line(x, y).slope - std::log(0.5)) < 0.02);

  const auto g = fit_geometric(empirical_sf(geometric_sample(0.3, 100000, rng)));
  CHECK(std::abs(g.r - 0.3) < 0.01);
  CHECK(g.r_se > 0.0);

  const std::vector<double> flat{2, 2, 2, 2};
  CHECK_THROWS_AS(fit_geometric(empirical_sf(flat)), std::invalid_argument);
}

TEST_CASE("geometric ML error shrinks as sqrt(n)") {
  RngStream rng(3, 0);
  double se_small = 0, se_large = 0, rms_small = 0, rms_large = 0;
  const int reps = 60;
  for (int k = 0; k < reps; ++k) {
    const auto a = fit_geometric(empirical_sf(geometric_sample(0.5, 2000, rng)));
    const auto b = fit_geometric(empirical_sf(geometric_sample(0.5, 8000, rng)));
    se_small += a.r_se / reps;
    se_large += b.r_se / reps;
    rms_small += (a.r - 0.5) * (a.r - 0.5) / reps;
    rms_large += (b.r - 0.5) * (b.r - 0.5) / reps;
  }
  CHECK(se_large / se_small == doctest::Approx(0.5).epsilon(0.05));
  CHECK(std::sqrt(rms_large / rms_small) == doctest::Approx(0.5).epsilon(0.3));
}

TEST_CASE("tail exponent") {
  RngStream rng(4, 0);
  std::vector<double> pareto(100000), expo(100000);
  for (auto& v : pareto) v = std::pow(rng.uniform(), -1.0 / 1.5);
  for (auto& v : expo) v = rng.exponential(1.0);
  const auto p = fit_tail_exponent(pareto, 0.1, 100, 5);
  CHECK(std::abs(p.kappa - 1.5) < 0.1);
  CHECK(p.ci_low <= p.kappa);
  CHECK(p.ci_high >= p.kappa);
  CHECK(std::abs(p.hill - 1.5) < 0.1);
  CHECK(p.power_law);
  CHECK_FALSE(fit_tail_exponent(expo, 0.1, 100, 5).power_law);
  CHECK_THROWS_AS(fit_tail_exponent(std::vector<double>(100, 1.0), 0.1), std::invalid_argument);
}

TEST_CASE("susceptibility") {
  const std::vector<std::optional<double>> censored(5, std::nullopt);
  CHECK(susceptibility(censored, 10.0) == 0.0);

  RngStream rng(5, 0);
  std::vector<double> xs(10000);
  for (auto& x : xs) x = rng.exponential(1.0);
  CHECK(std::abs(susceptibility(xs, 1e9) - 1.0) < 0.05);

  const double e1 = std::exp(-1.0);
  const double exact = (2.0 - 4.0 * e1) - (1.0 - e1) * (1.0 - e1);
  std::vector<double> m(xs.size());
  std::transform(xs.begin(), xs.end(), m.begin(), [](double x) { return std::min(x, 1.0); });
  const double mu = mean(m);
  double m4 = 0;
  for (double v : m) m4 += std::pow(v - mu, 4) / m.size();
  const double s2 = sample_variance(m);
  const double sd = std::sqrt((m4 - s2 * s2) / m.size());
  CHECK(susceptibility(xs, 1.0) == doctest::Approx(s2));
  CHECK(std::abs(susceptibility(xs, 1.0) - exact) < 3 * sd);
  CHECK_THROWS_AS(susceptibility(std::vector<double>{1.0}, 1.0), std::invalid_argument);
}

TEST_CASE("peak location and collapse distance") {
  std::vector<ChiPoint> cell;
  for (int i = 0; i < 11; ++i) {
    const double a = 0.1 * i;
    cell.push_back({a, 100, 10, 5.0 - 3.0 * (a - 0.437) * (a - 0.437)});
  }
  const auto p = locate_peak(cell);
  CHECK(p.alpha_m == doctest::Approx(0.437));
  CHECK(p.chi_max == doctest::Approx(5.0));
  CHECK(p.bracketed);

  const Curve c1{{0, 1}, {1, 2}, {2, 3}}, c2{{0.5, 1.5}, {3, 4}};
  const std::vector<Curve> same{c1, c2};
  CHECK(collapse_distance(same) == doctest::Approx(0.0).epsilon(1e-12));
  const Curve c3{{0, 2}, {2, 6}};
  const std::vector<Curve> diff{c1, c3};
  CHECK(collapse_distance(diff) > 0.1);
  const std::vector<Curve> disjoint{Curve{{0, 1}, {1, 1}}, Curve{{2, 1}, {3, 1}}};
  CHECK(std::isinf(collapse_distance(disjoint)));
}

TEST_CASE("fss recovers planted exponents") {
  const PlantedScaling ps;
  const auto data = planted_chi_grid(ps);
  const auto fit = fss_pipeline(data);
  CHECK(std::abs(fit.gamma / ps.gamma - 1) < 0.1);
  CHECK(std::abs(fit.zeta / ps.zeta - 1) < 0.1);
  CHECK(std::abs(fit.eta / ps.eta - 1) < 0.1);
  CHECK(std::abs(fit.alpha_star / ps.alpha_star - 1) < 0.1);
  CHECK(fit.collapse_distance >= 0.0);
  const auto best = std::min_element(fit.zeta_curve.begin(), fit.zeta_curve.end(),
                                     [](auto& a, auto& b) { return a.second < b.second; });
  CHECK(1.0 / best->first == doctest::Approx(fit.zeta));

  auto scaled = data;
  for (auto& d : scaled) d.chi *= 7.5;
  const auto fs = fss_pipeline(scaled);
  CHECK(fs.zeta == fit.zeta);
  CHECK(fs.eta == fit.eta);
  CHECK(fs.alpha_star == doctest::Approx(fit.alpha_star).epsilon(1e-12));
  CHECK(fs.gamma == doctest::Approx(fit.gamma).epsilon(1e-12));
}

TEST_CASE("fss preconditions") {
  auto data = planted_chi_grid();
  std::vector<ChiPoint> one_t;
  for (const auto& d : data) {
    if (d.T == 100) one_t.push_back(d);
  }
  try {
    fss_pipeline(one_t);
    FAIL("expected an error");
  } catch (const std::invalid_argument& e) {
    CHECK(std::string(e.what()).find("gamma requires >= 4 horizons") != std::string::npos);
  }
  std::vector<ChiPoint> holed;
  for (const auto& d : data) {
    if (!(d.T == 200 && d.N == 120 && d.alpha > 0.2)) holed.push_back(d);
  }
  CHECK_THROWS_AS(fss_pipeline(holed), std::invalid_argument);
}

TEST_CASE("closed-form chi peaks grow as T^2 along N ~ sqrt(T)") {
  // chi = T^2 G(N / sqrt(T), .) so the peak height over alpha scales exactly as T^2 at fixed N / sqrt(T)
  std::vector<double> lx, ly;
  for (double T : {400.0, 800.0, 1600.0, 3200.0}) {
    const double N = 2.0 * std::sqrt(T);
    std::vector<ChiPoint> cell;
    for (int i = -40; i <= 40; ++i) {
      const double a = 0.5 + i * 0.2 / std::sqrt(T);
      cell.push_back({a, T, N, theory::chi_theory(a, T, N, 0.5, 1.0)});
    }
    lx.push_back(std::log(T));
    ly.push_back(std::log(locate_peak(cell).chi_max));
  }
  CHECK(fit_line(lx, ly).slope == doctest::Approx(2.0).epsilon(1e-3));
}

TEST_CASE("fss on closed-form chi" * doctest::may_fail()) {
  std::vector<ChiPoint> data;
  for (double T : {400.0, 800.0, 1600.0, 3200.0}) {
    for (double N : {2.0, 4.0, 8.0}) {
      for (int i = -20; i <= 20; ++i) {
        const double a = 0.5 + i * 8.0 / 20.0 / std::sqrt(T);
        data.push_back({a, T, N, theory::chi_theory(a, T, N, 0.5, 1.0)});
      }
    }
  }
  const auto fit = fss_pipeline(data);
  CHECK(std::abs(fit.alpha_star - 0.5) < 0.01);
  CHECK(std::abs(fit.gamma / 2 - 1) < 0.1);
  CHECK(std::abs(fit.zeta / 2 - 1) < 0.1);
  CHECK(std::abs(fit.eta / 2 - 1) < 0.1);
}

TEST_CASE("flux features: trend and volatility kernels") {
  FluxOptions o;
  o.beta = 0.1;
  o.tail_cut = 0.0;
  std::vector<StreamEvent> quiet;
  for (int i = 0; i < 50; ++i) quiet.push_back(ev(i * 0.7, i % 3 == 0 ? OrderType::market : OrderType::limit, BookSide::bid));
  for (const auto& r : flux_features(quiet, o).records) {
    CHECK(r.R == 0.0);
    CHECK(r.sigma2 == 0.0);
  }

  std::vector<StreamEvent> s{ev(0, OrderType::limit, BookSide::bid), ev(1, OrderType::market, BookSide::ask, 1.0)};
  for (int i = 2; i <= 30; ++i) s.push_back(ev(i * 1.3, OrderType::limit, BookSide::ask));
  o.normalize_trend = true;
  const auto f = flux_features(s, o);
  for (const auto& r : f.records) {
    if (r.time < 1) continue;
    CHECK(r.R == doctest::Approx(std::sqrt(2 * o.beta) * std::exp(-o.beta * (r.time - 1))));
    CHECK(r.sigma2 == doctest::Approx(std::exp(-2 * o.beta * (r.time - 1))));
  }
  o.normalize_trend = false;
  CHECK(flux_features(s, o).records.back().R == doctest::Approx(std::exp(-o.beta * (s.back().time - 1))));
}

TEST_CASE("flux features: forward flux of a single limit order") {
  // A limit and a cancel at t0 + delta cancel out, so the record at t0 averages
  // the forward flux over a vanishing interval.
  FluxOptions o;
  o.beta_prime = 0.7;
  o.tail_cut = 0.0;
  const double t0 = 2.0, d = 1e-9;
  const std::vector<StreamEvent> s{ev(t0, OrderType::market, BookSide::ask), ev(t0 + d, OrderType::limit, BookSide::bid),
                                   ev(t0 + d, OrderType::cancel, BookSide::bid), ev(t0 + 1, OrderType::limit, BookSide::bid)};
  const auto f = flux_features(s, o);
  REQUIRE(f.records.size() == 4);
  CHECK(f.records[0].f_sum == doctest::Approx(o.beta_prime * std::exp(-o.beta_prime)).epsilon(1e-8));
  CHECK(f.records[0].f_diff == doctest::Approx(o.beta_prime * std::exp(-o.beta_prime)).epsilon(1e-8));
  // the record at t0 + delta carries the average over [t0 + delta, t0 + 1)
  const double span = 1 - d;
  CHECK(f.records[1].f_sum == doctest::Approx((1 - std::exp(-o.beta_prime * span)) / span));
  CHECK(f.records[3].f_sum == 0.0);
  CHECK(f.records[0].weight + f.records[1].weight + f.records[2].weight == doctest::Approx(1.0));

  std::vector<StreamEvent> bad = s;
  std::swap(bad[0], bad[3]);
  CHECK_THROWS_AS(flux_features(bad, o), std::invalid_argument);
}

TEST_CASE("flux features: forward and backward passes are adjoint under reversal") {
  // On a stream with marks m_i = +-1 and flux signs s_i, reversing time and
  // swapping the roles of m and s maps the backward EWMA onto the forward flux.
  RngStream rng(6, 0);
  const int n = 300;
  std::vector<StreamEvent> fwd;
  double t = 0;
  for (int i = 0; i < n; ++i) {
    t += rng.exponential(1.0);
    fwd.push_back(ev(t, rng.coin() ? OrderType::limit : OrderType::cancel, BookSide::bid, rng.coin() ? 1.0 : -1.0));
  }
  const double T = fwd.back().time + fwd.front().time;
  std::vector<StreamEvent> rev;
  for (int i = n - 1; i >= 0; --i) {
    const auto& e = fwd[static_cast<std::size_t>(i)];
    rev.push_back(ev(T - e.time, e.mid_change > 0 ? OrderType::limit : OrderType::cancel, BookSide::bid,
                     static_cast<double>(flux_sign(e.type))));
  }
  FluxOptions o;
  o.beta = 0.3;
  o.beta_prime = 0.3;
  o.tail_cut = 0.0;
  const auto a = flux_features(fwd, o), b = flux_features(rev, o);
  // forward sum just after record i, undoing the interval average: sum_{j > i} e^{-beta' (t_j - t_{i+1})} s_j
  auto next_sum = [&](const FluxFeatures& f, std::size_t i) {
    const double span = f.records[i + 1].time - f.records[i].time;
    const double avg = -std::expm1(-o.beta_prime * span) / (o.beta_prime * span);
    return f.records[i].f_sum / (o.beta_prime * avg);
  };
  for (std::size_t i = 0; i + 1 < static_cast<std::size_t>(n); ++i) {
    const std::size_t k = n - 1 - i;  // index of event i in the reversed stream
    CHECK(next_sum(a, i) == doctest::Approx(b.records[k - 1].R).epsilon(1e-9));
    CHECK(next_sum(b, k - 1) == doctest::Approx(a.records[i].R).epsilon(1e-9));
  }
}

TEST_CASE("binned regression equals unbinned with one record per bin") {
  RngStream rng(7, 0);
  const auto s = random_stream(60, rng, true);
  FluxOptions o;
  o.beta = 0.2;
  o.beta_prime = 0.5;
  o.tail_cut = 0.0;
  const auto f = flux_features(s, o);
  RegressionOptions ro;
  ro.min_records = 1;
  ro.bins = 1000;
  ro.jackknife_blocks = 0;
  const auto res = flux_regression(f, ro);
  std::vector<std::vector<double>> rs, ra;
  std::vector<double> ys, yd, w;
  for (const auto& r : f.records) {
    if (r.weight <= 0) continue;
    rs.push_back({1.0, 2 * o.beta * r.R * r.R, 2 * o.beta * r.sigma2});
    ra.push_back({std::sqrt(o.beta) * r.R});
    ys.push_back(r.f_sum);
    yd.push_back(r.f_diff);
    w.push_back(r.weight);
  }
  REQUIRE(res.bins_symmetric == static_cast<int>(w.size()));
  const auto cs = weighted_least_squares(rs, ys, w);
  const auto ca = weighted_least_squares(ra, yd, w);
  CHECK(res.C0.value == doctest::Approx(cs[0]).epsilon(1e-10));
  CHECK(res.C1.value == doctest::Approx(cs[1]).epsilon(1e-10));
  CHECK(res.C2.value == doctest::Approx(cs[2]).epsilon(1e-10));
  CHECK(res.C3.value == doctest::Approx(ca[0]).epsilon(1e-10));
  CHECK(res.total_weight == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("regression rejects a rank-deficient design") {
  std::vector<StreamEvent> s;
  for (int i = 0; i < 20000; ++i) s.push_back(ev(i, i % 2 ? OrderType::limit : OrderType::cancel, BookSide::bid));
  try {
    flux_regression(flux_features(s, FluxOptions{}));
    FAIL("expected an error");
  } catch (const std::invalid_argument& e) {
    CHECK(std::string(e.what()).find("rank-deficient") != std::string::npos);
  }
}

TEST_CASE("flux regression: null model") {
  SyntheticFluxParams p;
  p.C1 = p.C2 = p.C3 = 0.0;
  p.horizon = 2e5;
  const auto s = synthetic_flux_stream(p);
  FluxOptions o;
  o.beta = p.beta;
  o.beta_prime = p.beta_prime;
  const auto r = flux_regression(flux_features(s, o));
  CHECK(std::abs(r.C1.t_stat()) < 3);
  CHECK(std::abs(r.C2.t_stat()) < 3);
  CHECK(std::abs(r.C3.t_stat()) < 3);
  CHECK(std::abs(r.C0.value / p.C0 - 1) < 0.1);
}

TEST_CASE("flux regression: planted coefficients and correlation surface") {
  SyntheticFluxParams p;
  p.horizon = 7e5;
  p.seed = 7;
  const auto s = synthetic_flux_stream(p);
  FluxOptions o;
  o.beta = p.beta;
  o.beta_prime = p.beta_prime;
  const auto r = flux_regression(flux_features(s, o));
  CHECK(std::abs(r.C0.value / p.C0 - 1) < 0.1);
  CHECK(std::abs(r.C1.value / p.C1 - 1) < 0.1);
  CHECK(std::abs(r.C2.value / p.C2 - 1) < 0.1);
  CHECK(std::abs(r.C3.value / p.C3 - 1) < 0.1);
  CHECK(r.bins_symmetric > 1000);

  const std::vector<double> betas{0.0125, 0.025, 0.05, 0.1, 0.2}, bps{0.125, 0.25, 0.5, 1.0, 2.0};
  const auto surf = correlation_surface(s, betas, bps);
  CHECK(std::abs(static_cast<int>(surf.argmax_beta) - 2) <= 1);
  CHECK(std::abs(static_cast<int>(surf.argmax_beta_prime) - 2) <= 1);
  for (double c : surf.corr) CHECK(std::isfinite(c));
}

TEST_CASE("statistical helpers") {
  CHECK(chi_square_sf(3.841458820694124, 1) == doctest::Approx(0.05).epsilon(1e-6));
  CHECK(kolmogorov_sf(1.358) == doctest::Approx(0.05).epsilon(1e-2));
  const auto [lo, hi] = wilson_interval(0, 10);
  CHECK(lo == 0.0);
  CHECK(hi == doctest::Approx(0.2775).epsilon(1e-3));
  CHECK(normal_cdf(0.0) == 0.5);
}
