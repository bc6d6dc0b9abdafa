#pragma once

#include <optional>
#include <string>

/// Closed-form and quadrature predictions for the spread models.
namespace liqlab::theory {

enum class Regime { stationary, linear_growth, explosive };
std::string to_string(Regime r);

struct LinearSpreadTheory {
  double alpha_c = 0.0;
  double p_open = 0.0;
  std::optional<double> V;  // empty in the explosive regime
  std::optional<double> D;
  Regime regime = Regime::stationary;
};

/// Linear Hawkes spread model: alpha_c = 1 - lambda0+/lambda0-, alpha* = 1.
LinearSpreadTheory linear_spread_theory(double lambda0_plus, double lambda0_minus, double alpha);

/// Signed drift lambda0+ (alpha - alpha_c) / ((1 - alpha)(1 - alpha_c)), alpha < 1.
double linear_drift_signed(double lambda0_plus, double lambda0_minus, double alpha);
/// D(alpha) = lambda0- + lambda0+ / (1 - alpha)^3, alpha < 1.
double linear_diffusion(double lambda0_plus, double lambda0_minus, double alpha);

/// The printed first-passage exponent is (N + V u)^2, i.e. a positive V moves
/// away from the barrier. `reversed` evaluates (N - V u)^2 instead.
enum class BarrierSign { as_printed, reversed };

/// P[tau <= T] = int_0^T N / sqrt(2 pi D u^3) exp(-(N + V u)^2 / (2 D u)) du.
double first_passage_prob(double N, double T, double V, double D,
                          BarrierSign sign = BarrierSign::as_printed);

/// Var[min(tau, T)] for the same first-passage density.
double chi_from_drift(double T, double N, double V, double D,
                      BarrierSign sign = BarrierSign::as_printed);

/// How chi_theory maps alpha to (V, D). `critical_linearized` uses
/// V = Lambda (alpha - alpha_c) with Lambda = lambda0+ / (1 - alpha_c)^2 and
/// D = D(alpha_c), which is the form that obeys the scaling identity exactly;
/// `full` uses the signed V(alpha) and D(alpha).
enum class DriftForm { critical_linearized, full };

double chi_theory(double alpha, double T, double N, double lambda0_plus, double lambda0_minus,
                  DriftForm form = DriftForm::critical_linearized,
                  BarrierSign sign = BarrierSign::as_printed);

/// Scaling function G(x, y) with chi = T^2 G(N / sqrt(T), sqrt(T) (alpha - alpha_c)).
double scaling_G(double x, double y, double D_c, double Lambda,
                 BarrierSign sign = BarrierSign::as_printed);

struct HawkesCumulants {
  double lambda0 = 0.0;
  double alpha = 0.0;
  double beta = 0.0;
  double mean = 0.0;
  double variance = 0.0;
  /// E[exp(-u X)] in the stationary state, u >= 0.
  double laplace(double u) const;
  /// log laplace(u).
  double log_laplace(double u) const;
};

/// Stationary moments of X = int beta e^{-beta (t-s)} dN_s for a linear Hawkes
/// process with baseline lambda0 and norm alpha < 1.
HawkesCumulants hawkes_cumulants(double lambda0, double alpha, double beta);

struct MetastabilityTheory {
  double X_eq = 0.0;
  double X_star = 0.0;
  double X_star_asymptotic = 0.0;  // (1 - alpha) / eps
  double barrier = 0.0;            // V(X*) - V(X_eq), exact roots
  double barrier_asymptotic = 0.0; // beta (1 - alpha)^3 / (6 eps^2)
  double kramers_time = 0.0;
  double log_time_asymptotic = 0.0;  // second-order expansion in eps
  double log_time_adjusted = 0.0;    // same with the exponent scaled by the empirical 2.5
};

/// Quadratic model potential V(X) = beta(1-alpha)/2 (X - lambda0/(1-alpha))^2 - beta eps X^3 / 3.
double quadratic_potential(double X, double lambda0, double alpha, double beta, double eps);

/// Throws std::domain_error when the potential has no barrier.
MetastabilityTheory metastability_theory(double lambda0, double alpha, double beta, double eps);

/// Raw second-order expansion of log E[tau_c].
double log_escape_time_asymptotic(double lambda0, double alpha, double beta, double eps);

inline constexpr double kEmpiricalExponentFactor = 2.5;

struct PriceFeedbackTheory {
  double alpha_c = 0.0;      // onset of spread growth
  double alpha_star = 0.0;   // explosive threshold
  double p_open = 0.0;
  std::optional<double> V;
  std::optional<double> D_P;  // rate of price quadratic variation
  Regime regime = Regime::stationary;
};

/// Price-feedback spread model. `qv_per_event` is the quadratic variation of
/// the mid price added by each event in the feedback balance; 0.5 reproduces
/// the published closed forms (alpha* = 2). With mid moves of half a tick the
/// realized value is 0.25.
PriceFeedbackTheory price_feedback_theory(double lambda0_plus, double lambda0_minus, double alpha,
                                          double qv_per_event = 0.5);

}  // namespace liqlab::theory
