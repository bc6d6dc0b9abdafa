#include "liqlab/analysis/stat_tests.hpp"

#include <algorithm>
#include <boost/math/distributions/chi_squared.hpp>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace liqlab::analysis {

std::pair<double, double> wilson_interval(std::int64_t k, std::int64_t n, double z) {
  if (n <= 0 || k < 0 || k > n) throw std::invalid_argument("wilson_interval: need 0 <= k <= n, n > 0");
  const double nn = static_cast<double>(n);
  const double p = static_cast<double>(k) / nn;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / nn;
  const double center = (p + z2 / (2.0 * nn)) / denom;
  const double half = z * std::sqrt(p * (1.0 - p) / nn + z2 / (4.0 * nn * nn)) / denom;
  return {std::max(0.0, center - half), std::min(1.0, center + half)};
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double chi_square_sf(double stat, double dof) {
  if (!(dof > 0)) throw std::invalid_argument("chi_square_sf: dof must be > 0");
  if (stat <= 0) return 1.0;
  boost::math::chi_squared dist(dof);
  return boost::math::cdf(boost::math::complement(dist, stat));
}

GofResult chi_square_gof(std::span<const double> observed, std::span<const double> probabilities,
                         int estimated_params, double min_expected) {
  if (observed.size() != probabilities.size() || observed.empty()) {
    throw std::invalid_argument("chi_square_gof: observed and probabilities must match and be non-empty");
  }
  const double total = std::accumulate(observed.begin(), observed.end(), 0.0);
  if (total <= 0) throw std::invalid_argument("chi_square_gof: no observations");
  std::vector<double> obs(observed.begin(), observed.end());
  std::vector<double> expd;
  double psum = 0.0;
  for (double p : probabilities) {
    if (!(p >= 0)) throw std::invalid_argument("chi_square_gof: negative probability");
    expd.push_back(p * total);
    psum += p;
  }
  if (1.0 - psum > 1e-12) {
    obs.push_back(0.0);
    expd.push_back((1.0 - psum) * total);
  }
  // Pool from the right into the left neighbour until all expected counts are large enough.
  std::vector<double> po, pe;
  double acc_o = 0.0, acc_e = 0.0;
  for (std::size_t i = obs.size(); i-- > 0;) {
    acc_o += obs[i];
    acc_e += expd[i];
    if (acc_e >= min_expected) {
      po.push_back(acc_o);
      pe.push_back(acc_e);
      acc_o = acc_e = 0.0;
    }
  }
  if (acc_e > 0 || acc_o > 0) {
    if (pe.empty()) {
      po.push_back(acc_o);
      pe.push_back(acc_e);
    } else {
      po.back() += acc_o;
      pe.back() += acc_e;
    }
  }
  GofResult r;
  r.bins = static_cast<int>(pe.size());
  for (std::size_t i = 0; i < pe.size(); ++i) {
    const double d = po[i] - pe[i];
    r.statistic += d * d / pe[i];
  }
  r.dof = static_cast<double>(r.bins - 1 - estimated_params);
  if (r.dof < 1) throw std::invalid_argument("chi_square_gof: too few bins after pooling");
  r.p_value = chi_square_sf(r.statistic, r.dof);
  return r;
}

double kolmogorov_sf(double lambda) {
  if (lambda <= 0) return 1.0;
  if (lambda < 0.2) return 1.0;
  double sum = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    sum += (k % 2 == 1 ? term : -term);
    if (term < 1e-16) break;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

KsResult ks_test(std::vector<double> samples, const std::function<double(double)>& cdf) {
  if (samples.empty()) throw std::invalid_argument("ks_test: empty sample");
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double d = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double f = cdf(samples[i]);
    d = std::max({d, (static_cast<double>(i) + 1.0) / n - f, f - static_cast<double>(i) / n});
  }
  const double sn = std::sqrt(n);
  return {d, kolmogorov_sf((sn + 0.12 + 0.11 / sn) * d), samples.size()};
}

LinearFit fit_line(std::span<const double> x, std::span<const double> y,
                   std::span<const double> weights) {
  if (x.size() != y.size()) throw std::invalid_argument("fit_line: size mismatch");
  if (!weights.empty() && weights.size() != x.size()) throw std::invalid_argument("fit_line: weight size mismatch");
  if (x.size() < 2) throw std::invalid_argument("fit_line: need at least 2 points");
  auto w = [&](std::size_t i) { return weights.empty() ? 1.0 : weights[i]; };
  double sw = 0, sx = 0, sy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sw += w(i);
    sx += w(i) * x[i];
    sy += w(i) * y[i];
  }
  const double mx = sx / sw, my = sy / sw;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += w(i) * (x[i] - mx) * (x[i] - mx);
    sxy += w(i) * (x[i] - mx) * (y[i] - my);
    syy += w(i) * (y[i] - my) * (y[i] - my);
  }
  if (sxx <= 0) throw std::invalid_argument("fit_line: degenerate abscissa");
  LinearFit f;
  f.n = x.size();
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double rss = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - f.intercept - f.slope * x[i];
    rss += w(i) * r * r;
  }
  f.r_squared = syy > 0 ? 1.0 - rss / syy : 1.0;
  if (x.size() > 2) {
    const double s2 = rss / static_cast<double>(x.size() - 2);
    f.slope_se = std::sqrt(s2 / sxx);
    f.intercept_se = std::sqrt(s2 * (1.0 / sw + mx * mx / sxx));
  }
  return f;
}

double mean(std::span<const double> xs) {
  if (xs.empty()) throw std::invalid_argument("mean: empty sample");
  return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

double sample_variance(std::span<const double> xs) {
  if (xs.size() < 2) throw std::invalid_argument("sample_variance: need at least 2 values");
  const double m = mean(xs);
  double s = 0.0;
  for (double x : xs) s += (x - m) * (x - m);
  return s / static_cast<double>(xs.size() - 1);
}

}  // namespace liqlab::analysis
