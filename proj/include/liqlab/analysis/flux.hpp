#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace liqlab::analysis {

enum class OrderType : std::uint8_t { limit, cancel, market };
enum class BookSide : std::uint8_t { bid, ask };

struct StreamEvent {
  double time = 0.0;
  OrderType type = OrderType::limit;
  BookSide side = BookSide::bid;
  long long price_ticks = 0;
  double mid_change = 0.0;
  std::optional<long long> queue_after;
  // Optional Hawkes intensities lambda^{H,b+a}, lambda^{H,b-a} holding until the next event.
  std::optional<double> hawkes_sum;
  std::optional<double> hawkes_diff;
};

/// Signed contribution of one event to the bid (or ask) net flux: +1 for a
/// limit order, -1 for a cancellation or market order.
int flux_sign(OrderType t);

struct FluxOptions {
  double beta = 0.05;        // trend / volatility memory
  double beta_prime = 0.5;   // forward flux horizon
  bool normalize_trend = false;  // multiply R by sqrt(2 beta)
  double tail_cut = 10.0;    // drop records within tail_cut / beta' of the stream end
};

struct FluxRecord {
  double time = 0.0;
  double weight = 0.0;   // inter-event time as a fraction of the stream duration
  double R = 0.0;        // past trend at the event (after its own price change)
  double sigma2 = 0.0;   // past volatility
  double f_sum = 0.0;    // beta' F^{b+a} averaged over the interval to the next event
  double f_diff = 0.0;   // beta' F^{b-a}
  double h_sum = 0.0;    // beta' H^{b+a}, zero without Hawkes input
  double h_diff = 0.0;
};

struct FluxFeatures {
  std::vector<FluxRecord> records;
  bool has_hawkes = false;
  double duration = 0.0;
  FluxOptions options;
};

/// Backward EWMAs and forward fluxes for every event of a time-ordered stream.
FluxFeatures flux_features(std::span<const StreamEvent> events, const FluxOptions& options);

struct Coefficient {
  double value = 0.0;
  double se = 0.0;  // block jackknife
  double t_stat() const { return se > 0 ? value / se : 0.0; }
};

struct CorrelationSurface {
  std::vector<double> betas;
  std::vector<double> beta_primes;
  std::vector<double> corr;  // corr[i_beta * beta_primes.size() + i_beta_prime]
  std::size_t argmax_beta = 0;
  std::size_t argmax_beta_prime = 0;
  double argmax_value = 0.0;  // signed correlation at the max |corr|
  double at(std::size_t i, std::size_t j) const { return corr[i * beta_primes.size() + j]; }
};

struct FluxRegressionResult {
  Coefficient C0, C1, C2, C3;
  // Raw slopes before the 2 beta / sqrt(beta) prefactors.
  double raw_r2 = 0.0;
  double raw_sigma2 = 0.0;
  double raw_r = 0.0;
  int bins_symmetric = 0;
  int bins_antisymmetric = 0;
  double total_weight = 0.0;
  std::size_t records = 0;
  bool has_hawkes = false;
  std::optional<CorrelationSurface> surface;
};

struct RegressionOptions {
  int bins = 100;
  int jackknife_blocks = 20;
  std::size_t min_records = 10'000;
};

/// Binned weighted least squares of the symmetric flux on (1, 2 beta R^2,
/// 2 beta Sigma^2) and of the antisymmetric flux on sqrt(beta) R, with the
/// Hawkes term subtracted at unit coefficient.
FluxRegressionResult flux_regression(const FluxFeatures& features, const RegressionOptions& options = {});

/// Time-weighted Cor(beta' F^{b+a}_{beta'}, R_beta^2) on a (beta, beta') grid.
CorrelationSurface correlation_surface(std::span<const StreamEvent> events, std::span<const double> betas,
                                       std::span<const double> beta_primes, bool normalize_trend = false,
                                       double tail_cut = 10.0);

/// Weighted least squares on explicit rows (no binning). Returns coefficients
/// in column order; throws when the design is rank deficient.
std::vector<double> weighted_least_squares(const std::vector<std::vector<double>>& rows,
                                           std::span<const double> y, std::span<const double> w);

struct SyntheticFluxParams {
  double C0 = 0.5, C1 = -2.0, C2 = -1.0, C3 = 0.1;
  double beta = 0.05;
  double beta_prime = 0.5;
  double price_rate = 1.0;  // Poisson rate of +-1 tick mid moves
  double base_rate = 0.25;  // per side, added to both limit and cancel rates
  double horizon = 1e5;
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
};

/// Event stream whose conditional forward fluxes follow the regression model
/// exactly for the given coefficients (no Hawkes term).
std::vector<StreamEvent> synthetic_flux_stream(const SyntheticFluxParams& p);

}  // namespace liqlab::analysis
