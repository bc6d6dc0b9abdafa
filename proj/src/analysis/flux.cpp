#include "liqlab/analysis/flux.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>
#include <string>
#include <unordered_map>

#include "liqlab/core/rng.hpp"
#include "liqlab/core/thinning.hpp"

namespace liqlab::analysis {

int flux_sign(OrderType t) { return t == OrderType::limit ? 1 : -1; }

FluxFeatures flux_features(std::span<const StreamEvent> events, const FluxOptions& o) {
  if (events.empty()) throw std::invalid_argument("flux_features: empty stream");
  if (!(o.beta > 0) || !(o.beta_prime > 0)) throw std::invalid_argument("flux_features: beta and beta' must be > 0");
  const std::size_t n = events.size();
  int with_hawkes = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(events[i].time)) throw std::invalid_argument("flux_features: non-finite time");
    if (i > 0 && events[i].time < events[i - 1].time) {
      throw std::invalid_argument("flux_features: stream not time-ordered at event " + std::to_string(i));
    }
    if (events[i].hawkes_sum.has_value() != events[i].hawkes_diff.has_value()) {
      throw std::invalid_argument("flux_features: hawkes_sum and hawkes_diff must be given together");
    }
    with_hawkes += events[i].hawkes_sum ? 1 : 0;
  }
  if (with_hawkes != 0 && with_hawkes != static_cast<int>(n)) {
    throw std::invalid_argument("flux_features: Hawkes intensities present on some events only");
  }
  FluxFeatures out;
  out.options = o;
  out.has_hawkes = with_hawkes > 0;
  const double t0 = events.front().time, t_end = events.back().time;
  out.duration = t_end - t0;
  if (!(out.duration > 0)) throw std::invalid_argument("flux_features: stream has zero duration");

  std::vector<FluxRecord> rec(n);
  const double scale = o.normalize_trend ? std::sqrt(2.0 * o.beta) : 1.0;
  double R = 0.0, S2 = 0.0, last = t0;
  for (std::size_t i = 0; i < n; ++i) {
    const double t = events[i].time;
    const double dt = t - last;
    R *= std::exp(-o.beta * dt);
    S2 *= std::exp(-2.0 * o.beta * dt);
    const double dp = events[i].mid_change;
    R += scale * dp;
    S2 += dp * dp;
    last = t;
    rec[i].time = t;
    rec[i].R = R;
    rec[i].sigma2 = S2;
    rec[i].weight = i + 1 < n ? (events[i + 1].time - t) / out.duration : 0.0;
  }

  // Reverse pass over groups of equal time: forward quantities only see later events.
  const double bp = o.beta_prime;
  double acc_sum = 0.0, acc_diff = 0.0, hk_sum = 0.0, hk_diff = 0.0;
  double next_time = t_end;
  std::size_t hi = n;
  while (hi > 0) {
    std::size_t lo = hi - 1;
    while (lo > 0 && events[lo - 1].time == events[hi - 1].time) --lo;
    const double tg = events[lo].time;
    const double decay = std::exp(-bp * (next_time - tg));
    const double f_sum = decay * acc_sum;
    const double f_diff = decay * acc_diff;
    double h_sum = 0.0, h_diff = 0.0;
    const double hk_prev_sum = hk_sum, hk_prev_diff = hk_diff;
    const double next_sum = acc_sum, next_diff = acc_diff;
    if (out.has_hawkes) {
      const auto& ev = events[hi - 1];
      h_sum = *ev.hawkes_sum * (1.0 - decay) + decay * hk_sum;
      h_diff = *ev.hawkes_diff * (1.0 - decay) + decay * hk_diff;
      hk_sum = h_sum;
      hk_diff = h_diff;
    }
    acc_sum = f_sum;
    acc_diff = f_diff;
    // Records carry the time average of F and H over the interval they weight.
    const double span = next_time - tg;
    const double avg = span > 0 ? -std::expm1(-bp * span) / (bp * span) : 1.0;
    const double f_sum_avg = bp * next_sum * avg;
    const double f_diff_avg = bp * next_diff * avg;
    double h_sum_avg = 0.0, h_diff_avg = 0.0;
    if (out.has_hawkes) {
      const auto& ev = events[hi - 1];
      h_sum_avg = *ev.hawkes_sum + (hk_prev_sum - *ev.hawkes_sum) * avg;
      h_diff_avg = *ev.hawkes_diff + (hk_prev_diff - *ev.hawkes_diff) * avg;
    }
    for (std::size_t j = lo; j < hi; ++j) {
      rec[j].f_sum = f_sum_avg;
      rec[j].f_diff = f_diff_avg;
      rec[j].h_sum = h_sum_avg;
      rec[j].h_diff = h_diff_avg;
      const int s = flux_sign(events[j].type);
      acc_sum += s;
      acc_diff += events[j].side == BookSide::bid ? s : -s;
    }
    next_time = tg;
    hi = lo;
  }

  const double cut = t_end - o.tail_cut / bp;
  out.records.reserve(n);
  for (const auto& r : rec) {
    if (r.time <= cut) out.records.push_back(r);
  }
  return out;
}

std::vector<double> weighted_least_squares(const std::vector<std::vector<double>>& rows,
                                           std::span<const double> y, std::span<const double> w) {
  if (rows.empty() || rows.size() != y.size() || y.size() != w.size()) {
    throw std::invalid_argument("weighted_least_squares: inconsistent sizes");
  }
  const std::size_t p = rows.front().size();
  std::vector<std::vector<double>> a(p, std::vector<double>(p + 1, 0.0));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t r = 0; r < p; ++r) {
      for (std::size_t c = 0; c < p; ++c) a[r][c] += w[i] * rows[i][r] * rows[i][c];
      a[r][p] += w[i] * rows[i][r] * y[i];
    }
  }
  double diag = 0.0;
  for (std::size_t r = 0; r < p; ++r) diag = std::max(diag, std::abs(a[r][r]));
  for (std::size_t c = 0; c < p; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < p; ++r) {
      if (std::abs(a[r][c]) > std::abs(a[piv][c])) piv = r;
    }
    if (!(std::abs(a[piv][c]) > 1e-12 * diag)) {
      throw std::invalid_argument("regression: rank-deficient design (column " + std::to_string(c) +
                                  " is collinear with the others or constant)");
    }
    std::swap(a[c], a[piv]);
    for (std::size_t r = 0; r < p; ++r) {
      if (r == c) continue;
      const double f = a[r][c] / a[c][c];
      for (std::size_t k = c; k <= p; ++k) a[r][k] -= f * a[c][k];
    }
  }
  std::vector<double> beta(p);
  for (std::size_t r = 0; r < p; ++r) beta[r] = a[r][p] / a[r][r];
  return beta;
}

namespace {

std::vector<double> quantile_edges(const std::vector<FluxRecord>& rec, double FluxRecord::*field, int bins) {
  std::vector<std::pair<double, double>> vw;
  vw.reserve(rec.size());
  double total = 0.0;
  for (const auto& r : rec) {
    vw.emplace_back(r.*field, r.weight);
    total += r.weight;
  }
  std::sort(vw.begin(), vw.end());
  std::vector<double> edges;
  double acc = 0.0;
  int next = 1;
  for (const auto& [v, w] : vw) {
    acc += w;
    while (next < bins && acc >= total * next / bins) {
      if (edges.empty() || v > edges.back()) edges.push_back(v);
      ++next;
    }
  }
  return edges;  // interior edges; bin = number of edges strictly below the value
}

int bin_of(const std::vector<double>& edges, double v) {
  return static_cast<int>(std::lower_bound(edges.begin(), edges.end(), v) - edges.begin());
}

struct BinAcc {
  double w = 0, r = 0, r2 = 0, s2 = 0, ys = 0, yd = 0;
};

struct Fit {
  double c0 = 0, c1 = 0, c2 = 0, c3 = 0;
  int bins_sym = 0, bins_anti = 0;
};

Fit fit_bins(const std::vector<FluxRecord>& rec, const std::vector<int>& sym_key, const std::vector<int>& anti_key,
             double beta, std::size_t skip_lo, std::size_t skip_hi) {
  std::unordered_map<int, BinAcc> sym, anti;
  for (std::size_t i = 0; i < rec.size(); ++i) {
    if (i >= skip_lo && i < skip_hi) continue;
    const auto& r = rec[i];
    if (r.weight <= 0) continue;
    auto& s = sym[sym_key[i]];
    s.w += r.weight;
    s.r2 += r.weight * r.R * r.R;
    s.s2 += r.weight * r.sigma2;
    s.ys += r.weight * (r.f_sum - r.h_sum);
    auto& a = anti[anti_key[i]];
    a.w += r.weight;
    a.r += r.weight * r.R;
    a.yd += r.weight * (r.f_diff - r.h_diff);
  }
  Fit f;
  std::vector<std::vector<double>> rows;
  std::vector<double> y, w;
  for (const auto& [k, b] : sym) {
    rows.push_back({1.0, 2.0 * beta * b.r2 / b.w, 2.0 * beta * b.s2 / b.w});
    y.push_back(b.ys / b.w);
    w.push_back(b.w);
  }
  const auto cs = weighted_least_squares(rows, y, w);
  f.c0 = cs[0];
  f.c1 = cs[1];
  f.c2 = cs[2];
  f.bins_sym = static_cast<int>(rows.size());
  rows.clear();
  y.clear();
  w.clear();
  for (const auto& [k, b] : anti) {
    rows.push_back({std::sqrt(beta) * b.r / b.w});
    y.push_back(b.yd / b.w);
    w.push_back(b.w);
  }
  f.c3 = weighted_least_squares(rows, y, w)[0];
  f.bins_anti = static_cast<int>(rows.size());
  return f;
}

}  // namespace

FluxRegressionResult flux_regression(const FluxFeatures& features, const RegressionOptions& o) {
  const auto& rec = features.records;
  if (rec.size() < o.min_records) {
    throw std::invalid_argument("flux_regression: need >= " + std::to_string(o.min_records) + " records, got " +
                                std::to_string(rec.size()));
  }
  if (o.bins < 1) throw std::invalid_argument("flux_regression: bins must be >= 1");
  const auto eR = quantile_edges(rec, &FluxRecord::R, o.bins);
  const auto eS = quantile_edges(rec, &FluxRecord::sigma2, o.bins);
  std::vector<double> eHs, eHd;
  if (features.has_hawkes) {
    eHs = quantile_edges(rec, &FluxRecord::h_sum, o.bins);
    eHd = quantile_edges(rec, &FluxRecord::h_diff, o.bins);
  }
  const int nb = o.bins + 1;
  std::vector<int> sym_key(rec.size()), anti_key(rec.size());
  for (std::size_t i = 0; i < rec.size(); ++i) {
    const int br = bin_of(eR, rec[i].R), bs = bin_of(eS, rec[i].sigma2);
    const int hs = features.has_hawkes ? bin_of(eHs, rec[i].h_sum) : 0;
    const int hd = features.has_hawkes ? bin_of(eHd, rec[i].h_diff) : 0;
    sym_key[i] = (hs * nb + br) * nb + bs;
    anti_key[i] = (hd * nb + br) * nb + bs;
  }
  const double beta = features.options.beta;
  const Fit full = fit_bins(rec, sym_key, anti_key, beta, 0, 0);

  FluxRegressionResult res;
  res.C0.value = full.c0;
  res.C1.value = full.c1;
  res.C2.value = full.c2;
  res.C3.value = full.c3;
  res.raw_r2 = 2.0 * beta * full.c1;
  res.raw_sigma2 = 2.0 * beta * full.c2;
  res.raw_r = std::sqrt(beta) * full.c3;
  res.bins_symmetric = full.bins_sym;
  res.bins_antisymmetric = full.bins_anti;
  res.records = rec.size();
  res.has_hawkes = features.has_hawkes;
  for (const auto& r : rec) res.total_weight += r.weight;

  const int K = o.jackknife_blocks;
  if (K >= 2) {
    std::vector<Fit> loo;
    for (int k = 0; k < K; ++k) {
      const std::size_t lo = rec.size() * static_cast<std::size_t>(k) / static_cast<std::size_t>(K);
      const std::size_t hi = rec.size() * static_cast<std::size_t>(k + 1) / static_cast<std::size_t>(K);
      loo.push_back(fit_bins(rec, sym_key, anti_key, beta, lo, hi));
    }
    auto se = [&](double Fit::*m) {
      double mean = 0.0;
      for (const auto& f : loo) mean += f.*m;
      mean /= K;
      double ss = 0.0;
      for (const auto& f : loo) ss += (f.*m - mean) * (f.*m - mean);
      return std::sqrt(ss * (K - 1) / K);
    };
    res.C0.se = se(&Fit::c0);
    res.C1.se = se(&Fit::c1);
    res.C2.se = se(&Fit::c2);
    res.C3.se = se(&Fit::c3);
  }
  return res;
}

CorrelationSurface correlation_surface(std::span<const StreamEvent> events, std::span<const double> betas,
                                       std::span<const double> beta_primes, bool normalize_trend,
                                       double tail_cut) {
  if (betas.empty() || beta_primes.empty()) throw std::invalid_argument("correlation_surface: empty grid");
  CorrelationSurface s;
  s.betas.assign(betas.begin(), betas.end());
  s.beta_primes.assign(beta_primes.begin(), beta_primes.end());
  double best = -1.0;
  for (std::size_t i = 0; i < betas.size(); ++i) {
    for (std::size_t j = 0; j < beta_primes.size(); ++j) {
      FluxOptions o;
      o.beta = betas[i];
      o.beta_prime = beta_primes[j];
      o.normalize_trend = normalize_trend;
      o.tail_cut = tail_cut;
      const auto f = flux_features(events, o);
      double sw = 0, mx = 0, my = 0;
      for (const auto& r : f.records) {
        sw += r.weight;
        mx += r.weight * r.f_sum;
        my += r.weight * r.R * r.R;
      }
      double c = 0.0;
      if (sw > 0) {
        mx /= sw;
        my /= sw;
        double sxx = 0, syy = 0, sxy = 0;
        for (const auto& r : f.records) {
          const double dx = r.f_sum - mx, dy = r.R * r.R - my;
          sxx += r.weight * dx * dx;
          syy += r.weight * dy * dy;
          sxy += r.weight * dx * dy;
        }
        if (sxx > 0 && syy > 0) c = sxy / std::sqrt(sxx * syy);
      }
      s.corr.push_back(c);
      if (std::abs(c) > best) {
        best = std::abs(c);
        s.argmax_beta = i;
        s.argmax_beta_prime = j;
        s.argmax_value = c;
      }
    }
  }
  return s;
}

std::vector<StreamEvent> synthetic_flux_stream(const SyntheticFluxParams& p) {
  if (!(p.beta > 0) || !(p.beta_prime > 0) || !(p.price_rate > 0) || !(p.base_rate >= 0) || !(p.horizon > 0)) {
    throw std::invalid_argument("synthetic_flux_stream: invalid parameters");
  }
  const double k2 = 1.0 + 2.0 * p.beta / p.beta_prime;
  const double A = p.C0 + p.price_rate - 2.0 * p.beta * p.price_rate * (p.C1 + p.C2) / p.beta_prime;
  const double B = 2.0 * p.beta * p.C1 * k2;
  const double C = 2.0 * p.beta * p.C2 * k2;
  const double D = std::sqrt(p.beta) * p.C3 * (1.0 + p.beta / p.beta_prime);

  RngStream rng(p.seed, p.stream);
  std::vector<StreamEvent> out;
  double t = 0.0, tl = 0.0, R = 0.0, S2 = 0.0;
  long long mid = 0;
  std::array<double, 6> w{};  // up, down, LO bid, C bid, LO ask, C ask
  auto rates = [&](double s) {
    const double r = R * std::exp(-p.beta * (s - tl));
    const double v = S2 * std::exp(-2.0 * p.beta * (s - tl));
    const double fs = A + B * r * r + C * v;
    const double fd = D * r;
    const double nb = 0.5 * (fs + fd), na = 0.5 * (fs - fd);
    w = {0.5 * p.price_rate, 0.5 * p.price_rate, p.base_rate + std::max(nb, 0.0), p.base_rate + std::max(-nb, 0.0),
         p.base_rate + std::max(na, 0.0), p.base_rate + std::max(-na, 0.0)};
    return w[0] + w[1] + w[2] + w[3] + w[4] + w[5];
  };
  for (;;) {
    // Every flux term decays in magnitude between events, so this bound holds until the next one.
    const double bound = p.price_rate + 4.0 * p.base_rate + std::abs(A) + std::abs(B) * R * R + std::abs(C) * S2 +
                         std::abs(D) * std::abs(R);
    double total = 0.0;
    do {
      t += rng.exponential(bound);
      if (t >= p.horizon) return out;
      total = rates(t);
    } while (rng.uniform() * bound > total);
    const std::size_t k = sample_categorical(w, total, rng);
    R *= std::exp(-p.beta * (t - tl));
    S2 *= std::exp(-2.0 * p.beta * (t - tl));
    tl = t;
    StreamEvent e;
    e.time = t;
    switch (k) {
      case 0:
        e.type = OrderType::market;
        e.side = BookSide::ask;
        e.price_ticks = mid + 1;
        e.mid_change = 1.0;
        break;
      case 1:
        e.type = OrderType::market;
        e.side = BookSide::bid;
        e.price_ticks = mid - 1;
        e.mid_change = -1.0;
        break;
      default:
        e.type = (k == 2 || k == 4) ? OrderType::limit : OrderType::cancel;
        e.side = k < 4 ? BookSide::bid : BookSide::ask;
        e.price_ticks = k < 4 ? mid - 1 : mid + 1;
        break;
    }
    mid += static_cast<long long>(e.mid_change);
    R += e.mid_change;
    S2 += e.mid_change * e.mid_change;
    out.push_back(e);
  }
}

}  // namespace liqlab::analysis
