#include "liqlab/analysis/survival.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "liqlab/analysis/stat_tests.hpp"
#include "liqlab/core/rng.hpp"

namespace liqlab::analysis {

double Ccdf::at(double x) const {
  const auto it = std::lower_bound(support.begin(), support.end(), x);
  if (it == support.end()) return 0.0;
  return survival[static_cast<std::size_t>(it - support.begin())];
}

namespace {

Ccdf finish(std::vector<std::pair<double, double>>& vw, double eff_n) {
  std::sort(vw.begin(), vw.end());
  Ccdf c;
  double total = 0.0;
  for (const auto& [v, w] : vw) total += w;
  if (!(total > 0.0)) throw std::invalid_argument("empirical_sf: all weights are zero");
  for (const auto& [v, w] : vw) {
    if (w == 0.0) continue;
    if (!c.support.empty() && c.support.back() == v) {
      c.mass.back() += w;
    } else {
      c.support.push_back(v);
      c.mass.push_back(w);
    }
  }
  c.survival.resize(c.mass.size());
  double acc = 0.0;
  for (std::size_t i = c.mass.size(); i-- > 0;) {
    acc += c.mass[i];
    c.survival[i] = std::min(1.0, acc / total);
    c.mass[i] /= total;
  }
  c.total_weight = total;
  c.effective_n = eff_n;
  return c;
}

}  // namespace

Ccdf empirical_sf(std::span<const double> samples, std::span<const double> weights) {
  if (samples.empty()) throw std::invalid_argument("empirical_sf: empty sample");
  if (!weights.empty() && weights.size() != samples.size()) {
    throw std::invalid_argument("empirical_sf: weights and samples differ in length");
  }
  std::vector<std::pair<double, double>> vw;
  vw.reserve(samples.size());
  double sw = 0.0, sw2 = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double w = weights.empty() ? 1.0 : weights[i];
    if (!(w >= 0.0) || !std::isfinite(w)) throw std::invalid_argument("empirical_sf: negative weight");
    if (!std::isfinite(samples[i])) throw std::invalid_argument("empirical_sf: non-finite sample");
    vw.emplace_back(samples[i], w);
    sw += w;
    sw2 += w * w;
  }
  return finish(vw, sw2 > 0 ? sw * sw / sw2 : 0.0);
}

Ccdf sf_from_histogram(std::span<const double> occupation, double effective_n) {
  std::vector<std::pair<double, double>> vw;
  for (std::size_t s = 0; s < occupation.size(); ++s) {
    if (occupation[s] < 0) throw std::invalid_argument("sf_from_histogram: negative occupation");
    if (occupation[s] > 0) vw.emplace_back(static_cast<double>(s), occupation[s]);
  }
  if (vw.empty()) throw std::invalid_argument("sf_from_histogram: empty histogram");
  return finish(vw, effective_n);
}

GeometricFit fit_geometric(const Ccdf& ccdf, double min_support) {
  std::size_t first = 0;
  while (first < ccdf.support.size() && ccdf.support[first] < min_support) ++first;
  if (ccdf.support.size() - first < 3) {
    throw std::invalid_argument("fit_geometric: need at least 3 support points >= min_support");
  }
  const double tail = ccdf.survival[first];
  double mean_excess = 0.0;
  for (std::size_t i = first; i < ccdf.support.size(); ++i) {
    mean_excess += ccdf.mass[i] * (ccdf.support[i] - min_support);
  }
  mean_excess /= tail;
  GeometricFit g;
  g.r = mean_excess / (1.0 + mean_excess);
  g.p_at_min = tail;
  g.n_tail = ccdf.effective_n * tail;
  if (g.n_tail > 0) g.r_se = std::sqrt(g.r * (1.0 - g.r) * (1.0 - g.r) / g.n_tail);
  return g;
}

namespace {

struct LsTail {
  double kappa = 0, intercept = 0, r2 = 0, curvature = 0;
  std::size_t points = 0;
  double x_min = 0;
  bool ok = false;
};

LsTail ls_tail(std::vector<double> xs, double tail_fraction, double min_count) {
  LsTail out;
  const Ccdf c = empirical_sf(xs);
  const double n = static_cast<double>(xs.size());
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < c.support.size(); ++i) {
    if (c.support[i] <= 0) continue;
    if (c.survival[i] > tail_fraction) continue;
    if (c.survival[i] * n < min_count) continue;
    lx.push_back(std::log(c.support[i]));
    ly.push_back(std::log(c.survival[i]));
  }
  if (lx.size() < 4) return out;
  const auto f = fit_line(lx, ly);
  out.kappa = -f.slope;
  out.intercept = f.intercept;
  out.r2 = f.r_squared;
  out.points = lx.size();
  out.x_min = std::exp(lx.front());
  const double mid = 0.5 * (lx.front() + lx.back());
  std::vector<double> ax, ay, bx, by;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    (lx[i] < mid ? ax : bx).push_back(lx[i]);
    (lx[i] < mid ? ay : by).push_back(ly[i]);
  }
  if (ax.size() >= 2 && bx.size() >= 2) {
    out.curvature = -fit_line(bx, by).slope + fit_line(ax, ay).slope;
  }
  out.ok = true;
  return out;
}

}  // namespace

TailFit fit_tail_exponent(std::span<const double> samples, double tail_fraction, int bootstrap,
                          std::uint64_t seed, double min_count) {
  if (!(tail_fraction > 0 && tail_fraction <= 1)) {
    throw std::invalid_argument("fit_tail_exponent: tail_fraction must be in (0, 1]");
  }
  std::vector<double> xs(samples.begin(), samples.end());
  const double n = static_cast<double>(xs.size());
  if (n * tail_fraction < 50) throw std::invalid_argument("fit_tail_exponent: fewer than 50 tail points");
  const LsTail base = ls_tail(xs, tail_fraction, min_count);
  if (!base.ok) throw std::invalid_argument("fit_tail_exponent: insufficient distinct tail values");
  TailFit t;
  t.kappa = base.kappa;
  t.intercept = base.intercept;
  t.r_squared = base.r2;
  t.points = base.points;
  t.x_min = base.x_min;
  t.curvature = base.curvature;
  t.power_law = std::abs(base.curvature) < 0.3 * std::abs(base.kappa);

  // Hill estimator on the same tail.
  double sum = 0.0;
  std::size_t k = 0;
  for (double x : xs) {
    if (x > t.x_min) {
      sum += std::log(x / t.x_min);
      ++k;
    }
  }
  if (k > 0 && sum > 0) t.hill = static_cast<double>(k) / sum;

  if (bootstrap > 0) {
    RngStream rng(seed, 0x7A11ull);
    std::vector<double> ks, re(xs.size());
    for (int b = 0; b < bootstrap; ++b) {
      for (auto& v : re) v = xs[rng.uniform_index(xs.size())];
      const LsTail bt = ls_tail(re, tail_fraction, min_count);
      if (bt.ok) ks.push_back(bt.kappa);
    }
    if (ks.size() >= 10) {
      std::sort(ks.begin(), ks.end());
      t.ci_low = ks[static_cast<std::size_t>(0.025 * static_cast<double>(ks.size() - 1))];
      t.ci_high = ks[static_cast<std::size_t>(0.975 * static_cast<double>(ks.size() - 1))];
    }
  }
  return t;
}

}  // namespace liqlab::analysis
