#include "liqlab/analysis/fss.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include "liqlab/analysis/stat_tests.hpp"

namespace liqlab::analysis {

namespace {

double interp(const Curve& c, double x) {
  auto it = std::lower_bound(c.begin(), c.end(), x,
                             [](const std::pair<double, double>& p, double v) { return p.first < v; });
  if (it == c.begin()) return c.front().second;
  if (it == c.end()) return c.back().second;
  const auto& [x1, y1] = *it;
  const auto& [x0, y0] = *(it - 1);
  if (x1 == x0) return y1;
  return y0 + (y1 - y0) * (x - x0) / (x1 - x0);
}

}  // namespace

double collapse_distance(std::span<const Curve> curves, int points) {
  if (points < 2) throw std::invalid_argument("collapse_distance: points must be >= 2");
  double total = 0.0;
  int pairs = 0;
  for (std::size_t i = 0; i < curves.size(); ++i) {
    for (std::size_t j = i + 1; j < curves.size(); ++j) {
      const Curve& a = curves[i];
      const Curve& b = curves[j];
      if (a.size() < 2 || b.size() < 2) continue;
      const double lo = std::max(a.front().first, b.front().first);
      const double hi = std::min(a.back().first, b.back().first);
      if (!(hi > lo)) continue;
      double diff = 0.0, mag = 0.0;
      for (int k = 0; k < points; ++k) {
        const double x = lo + (hi - lo) * k / (points - 1);
        const double ya = interp(a, x), yb = interp(b, x);
        diff += (ya - yb) * (ya - yb);
        mag += 0.5 * (ya * ya + yb * yb);
      }
      if (mag <= 0.0) continue;
      total += std::sqrt(diff / mag);
      ++pairs;
    }
  }
  return pairs == 0 ? std::numeric_limits<double>::infinity() : total / pairs;
}

PeakCell locate_peak(std::span<const ChiPoint> cell) {
  if (cell.empty()) throw std::invalid_argument("locate_peak: empty cell");
  PeakCell p;
  p.T = cell.front().T;
  p.N = cell.front().N;
  p.points = static_cast<int>(cell.size());
  std::size_t k = 0;
  for (std::size_t i = 1; i < cell.size(); ++i) {
    if (cell[i].chi > cell[k].chi) k = i;
  }
  p.alpha_m = cell[k].alpha;
  p.chi_max = cell[k].chi;
  if (k == 0 || k + 1 == cell.size()) return p;
  p.bracketed = true;
  const double x0 = cell[k - 1].alpha, x1 = cell[k].alpha, x2 = cell[k + 1].alpha;
  const double y0 = cell[k - 1].chi, y1 = cell[k].chi, y2 = cell[k + 1].chi;
  // Parabola through three (possibly unevenly spaced) points.
  const double d01 = (y1 - y0) / (x1 - x0);
  const double d12 = (y2 - y1) / (x2 - x1);
  const double a = (d12 - d01) / (x2 - x0);
  if (a < 0.0) {
    const double b = d01 - a * (x0 + x1);
    const double xm = std::clamp(-b / (2.0 * a), x0, x2);
    p.alpha_m = xm;
    p.chi_max = y0 + d01 * (xm - x0) + a * (xm - x0) * (xm - x1);
  }
  return p;
}

ScalingFit fss_pipeline(std::span<const ChiPoint> data, const FssOptions& o) {
  std::map<std::pair<double, double>, std::vector<ChiPoint>> cells;  // (T, N)
  for (const auto& d : data) {
    if (!(d.T > 0) || !(d.N > 0) || !std::isfinite(d.alpha) || !std::isfinite(d.chi)) {
      throw std::invalid_argument("fss: invalid data point");
    }
    cells[{d.T, d.N}].push_back(d);
  }
  std::set<double> horizons, sizes;
  for (const auto& [key, pts] : cells) {
    horizons.insert(key.first);
    sizes.insert(key.second);
  }
  if (static_cast<int>(horizons.size()) < o.min_horizons) {
    throw std::invalid_argument("fss: gamma requires >= " + std::to_string(o.min_horizons) +
                                " horizons, got " + std::to_string(horizons.size()));
  }
  if (static_cast<int>(sizes.size()) < o.min_sizes) {
    throw std::invalid_argument("fss: eta requires >= " + std::to_string(o.min_sizes) +
                                " book sizes, got " + std::to_string(sizes.size()));
  }

  ScalingFit fit;
  fit.n_max = *sizes.rbegin();
  std::ostringstream missing;
  for (double T : horizons) {
    for (double N : sizes) {
      auto it = cells.find({T, N});
      if (it == cells.end()) {
        missing << " (T=" << T << ", N=" << N << ")";
        continue;
      }
      auto& pts = it->second;
      std::sort(pts.begin(), pts.end(), [](const ChiPoint& a, const ChiPoint& b) { return a.alpha < b.alpha; });
      if (static_cast<int>(pts.size()) < o.min_alphas) {
        missing << " (T=" << T << ", N=" << N << ": " << pts.size() << " alphas)";
        continue;
      }
      PeakCell p = locate_peak(pts);
      (p.bracketed ? fit.peaks : fit.excluded).push_back(p);
    }
  }
  if (!missing.str().empty()) throw std::invalid_argument("fss: missing or incomplete cells:" + missing.str());

  // gamma from the peak heights at N_max.
  std::vector<double> lt, lc;
  std::map<double, double> alpha_m_at_nmax;
  for (const auto& p : fit.peaks) {
    if (p.N != fit.n_max || !(p.chi_max > 0)) continue;
    lt.push_back(std::log(p.T));
    lc.push_back(std::log(p.chi_max));
    alpha_m_at_nmax[p.T] = p.alpha_m;
  }
  if (static_cast<int>(lt.size()) < o.min_horizons) {
    throw std::invalid_argument("fss: gamma requires >= " + std::to_string(o.min_horizons) +
                                " horizons with a bracketed peak at N_max");
  }
  const auto g = fit_line(lt, lc);
  fit.gamma = g.slope;
  fit.gamma_se = g.slope_se;

  // zeta from the collapse of chi / T^gamma against T^{1/zeta} (alpha - alpha_m).
  double best = std::numeric_limits<double>::infinity();
  for (double iz = o.inv_zeta_min; iz <= o.inv_zeta_max + 1e-12; iz += o.inv_zeta_step) {
    std::vector<Curve> curves;
    for (const auto& [T, am] : alpha_m_at_nmax) {
      Curve c;
      for (const auto& d : cells[{T, fit.n_max}]) {
        c.emplace_back(std::pow(T, iz) * (d.alpha - am), d.chi / std::pow(T, fit.gamma));
      }
      curves.push_back(std::move(c));
    }
    const double dist = collapse_distance(curves, o.interp_points);
    fit.zeta_curve.emplace_back(iz, dist);
    if (dist < best) {
      best = dist;
      fit.zeta = 1.0 / iz;
      fit.collapse_distance = dist;
    }
  }

  // (eta, alpha*) from the collapse of T^{1/zeta} (alpha_m - alpha*) against N T^{-1/eta}, one curve per T.
  std::map<double, std::vector<PeakCell>> by_t;
  double am_lo = std::numeric_limits<double>::infinity(), am_hi = -am_lo;
  for (const auto& p : fit.peaks) {
    by_t[p.T].push_back(p);
    am_lo = std::min(am_lo, p.alpha_m);
    am_hi = std::max(am_hi, p.alpha_m);
  }
  double s_lo = o.alpha_star_min, s_hi = o.alpha_star_max;
  if (s_lo == 0.0 && s_hi == 0.0) {
    const double pad = std::max(am_hi - am_lo, 1e-6);
    s_lo = am_lo - pad;
    s_hi = am_hi + pad;
  }
  auto peak_curves = [&](double ie, double astar) {
    std::vector<Curve> curves;
    const double iz = 1.0 / fit.zeta;
    for (const auto& [T, ps] : by_t) {
      Curve c;
      for (const auto& p : ps) c.emplace_back(std::log(p.N) - ie * std::log(T), std::pow(T, iz) * (p.alpha_m - astar));
      std::sort(c.begin(), c.end());
      curves.push_back(std::move(c));
    }
    return collapse_distance(curves, o.interp_points);
  };
  best = std::numeric_limits<double>::infinity();
  const int steps = std::max(o.alpha_star_steps, 2);
  for (double ie = o.inv_eta_min; ie <= o.inv_eta_max + 1e-12; ie += o.inv_eta_step) {
    for (int k = 0; k < steps; ++k) {
      const double astar = s_lo + (s_hi - s_lo) * k / (steps - 1);
      const double dist = peak_curves(ie, astar);
      if (dist < best) {
        best = dist;
        fit.eta = 1.0 / ie;
        fit.alpha_star = astar;
        fit.peak_distance = dist;
      }
    }
  }
  for (double ie = o.inv_eta_min; ie <= o.inv_eta_max + 1e-12; ie += o.inv_eta_step) {
    fit.eta_curve.emplace_back(ie, peak_curves(ie, fit.alpha_star));
  }
  for (int k = 0; k < steps; ++k) {
    const double astar = s_lo + (s_hi - s_lo) * k / (steps - 1);
    fit.alpha_star_curve.emplace_back(astar, peak_curves(1.0 / fit.eta, astar));
  }
  return fit;
}

std::vector<ChiPoint> planted_chi_grid(const PlantedScaling& p) {
  std::vector<ChiPoint> out;
  for (double T : p.horizons) {
    const double shrink = std::pow(T, -1.0 / p.zeta);
    for (double N : p.sizes) {
      const double x = N * std::pow(T, -1.0 / p.eta);
      const double am = p.alpha_star + shrink * (p.offset - p.size_coeff / x);
      for (int k = -p.half_points; k <= p.half_points; ++k) {
        const double a = am + (0.37 * k + 0.01) * p.width * shrink;
        const double u = (a - am) / shrink;
        out.push_back({a, T, N, std::pow(T, p.gamma) * std::exp(-u * u / (2.0 * p.width * p.width))});
      }
    }
  }
  return out;
}

}  // namespace liqlab::analysis
