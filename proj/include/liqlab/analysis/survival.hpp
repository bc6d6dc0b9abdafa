#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace liqlab::analysis {

/// Weighted survival function P[X >= x] on the distinct sample values.
struct Ccdf {
  std::vector<double> support;   // ascending distinct values
  std::vector<double> survival;  // P[X >= support[i]]
  std::vector<double> mass;      // P[X == support[i]]
  double total_weight = 0.0;
  double effective_n = 0.0;      // (sum w)^2 / sum w^2

  /// P[X >= x] for arbitrary x.
  double at(double x) const;
};

Ccdf empirical_sf(std::span<const double> samples, std::span<const double> weights = {});

/// Survival function of an integer variable given time (or count) spent at each value.
Ccdf sf_from_histogram(std::span<const double> occupation, double effective_n = 0.0);

struct GeometricFit {
  double r = 0.0;
  double r_se = 0.0;
  double p_at_min = 0.0;  // P[X >= min_support]
  double n_tail = 0.0;    // effective observations in the tail
};

/// Maximum-likelihood ratio r of P[X >= n] proportional to r^(n - min_support)
/// over the conditional tail X >= min_support of an integer variable.
GeometricFit fit_geometric(const Ccdf& ccdf, double min_support = 2.0);

struct TailFit {
  double kappa = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  double hill = 0.0;          // Hill estimator over the same tail
  double curvature = 0.0;     // slope difference between upper and lower halves of the window
  bool power_law = true;      // false when the curvature diagnostic rejects a straight line
  std::size_t points = 0;
  double x_min = 0.0;
};

/// Log-log least squares of the survival function over points with
/// survival <= tail_fraction, skipping points backed by fewer than
/// min_count effective observations. Bootstrap CI from resampling `samples`.
TailFit fit_tail_exponent(std::span<const double> samples, double tail_fraction = 0.1,
                          int bootstrap = 200, std::uint64_t seed = 0, double min_count = 10.0);

}  // namespace liqlab::analysis
