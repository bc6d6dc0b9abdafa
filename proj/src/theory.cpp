#include "liqlab/theory.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace liqlab::theory {

namespace {

constexpr double kRelTol = 1e-10;

using Rule = boost::math::quadrature::gauss_kronrod<double, 31>;

// Integrates over consecutive segments [cuts[i], cuts[i+1]]. Segments whose
// coarse estimate is negligible against the whole integral keep that estimate;
// the rest are refined adaptively.
template <class F>
double integrate_segments(F&& f, const std::vector<double>& cuts) {
  std::vector<double> coarse(cuts.size(), 0.0);
  double scale = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    if (cuts[i + 1] <= cuts[i]) continue;
    coarse[i] = Rule::integrate(f, cuts[i], cuts[i + 1], 0, 0.0);
    scale += std::abs(coarse[i]);
  }
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    if (cuts[i + 1] <= cuts[i]) continue;
    if (std::abs(coarse[i]) <= 1e-14 * scale) {
      total += coarse[i];
    } else {
      total += Rule::integrate(f, cuts[i], cuts[i + 1], 15, kRelTol);
    }
  }
  return total;
}

template <class F>
double integrate(F&& f, double a, double b) {
  if (b <= a) return 0.0;
  return integrate_segments(f, {a, b});
}

// Splits [0, T] on a geometric grid around the scale of the first-passage peak
// so that the adaptive rule never has to locate a narrow bump on its own.
template <class F>
double integrate_first_passage(F&& f, double T, double N, double V, double D) {
  const double peak = N * N / (3.0 * D);
  std::vector<double> cuts{0.0};
  double c = peak * 1e-3;
  while (c < T) {
    cuts.push_back(c);
    c *= 2.0;
  }
  if (V != 0.0) {
    const double drift_scale = N / std::abs(V);
    if (drift_scale < T) cuts.push_back(drift_scale);
  }
  cuts.push_back(T);
  std::sort(cuts.begin(), cuts.end());
  return integrate_segments(f, cuts);
}

void check_positive(double v, const char* name) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw std::invalid_argument(std::string("theory: ") + name + " must be finite and > 0");
  }
}

struct FirstPassageDensity {
  double N, V, D;
  double sign;  // +1 as printed, -1 reversed
  double operator()(double u) const {
    if (u <= 0.0) return 0.0;
    const double a = N + sign * V * u;
    return N / std::sqrt(2.0 * std::numbers::pi * D * u * u * u) * std::exp(-a * a / (2.0 * D * u));
  }
};

FirstPassageDensity density(double N, double V, double D, BarrierSign s) {
  return {N, V, D, s == BarrierSign::as_printed ? 1.0 : -1.0};
}

}  // namespace

std::string to_string(Regime r) {
  switch (r) {
    case Regime::stationary: return "stationary";
    case Regime::linear_growth: return "linear_growth";
    case Regime::explosive: return "explosive";
  }
  return "unknown";
}

double linear_drift_signed(double lp, double lm, double alpha) {
  check_positive(lp, "lambda0_plus");
  check_positive(lm, "lambda0_minus");
  if (alpha >= 1.0) throw std::domain_error("theory: drift undefined for alpha >= 1");
  const double ac = 1.0 - lp / lm;
  return lp * (alpha - ac) / ((1.0 - alpha) * (1.0 - ac));
}

double linear_diffusion(double lp, double lm, double alpha) {
  check_positive(lp, "lambda0_plus");
  check_positive(lm, "lambda0_minus");
  if (alpha >= 1.0) throw std::domain_error("theory: diffusion undefined for alpha >= 1");
  const double q = 1.0 - alpha;
  return lm + lp / (q * q * q);
}

LinearSpreadTheory linear_spread_theory(double lp, double lm, double alpha) {
  check_positive(lp, "lambda0_plus");
  check_positive(lm, "lambda0_minus");
  LinearSpreadTheory t;
  t.alpha_c = 1.0 - lp / lm;
  if (alpha >= 1.0) {
    t.p_open = 1.0;
    t.regime = Regime::explosive;
    return t;
  }
  t.p_open = std::min(1.0, (1.0 - t.alpha_c) / (1.0 - alpha));
  t.regime = alpha > t.alpha_c ? Regime::linear_growth : Regime::stationary;
  t.V = alpha > t.alpha_c ? linear_drift_signed(lp, lm, alpha) : 0.0;
  t.D = linear_diffusion(lp, lm, alpha);
  return t;
}

double first_passage_prob(double N, double T, double V, double D, BarrierSign sign) {
  check_positive(N, "N");
  check_positive(D, "D");
  if (!std::isfinite(V)) throw std::invalid_argument("theory: V must be finite");
  if (!(T >= 0.0)) throw std::invalid_argument("theory: T must be >= 0");
  if (T == 0.0) return 0.0;
  return integrate_first_passage(density(N, V, D, sign), T, N, V, D);
}

double chi_from_drift(double T, double N, double V, double D, BarrierSign sign) {
  check_positive(N, "N");
  check_positive(D, "D");
  check_positive(T, "T");
  if (!std::isfinite(V)) throw std::invalid_argument("theory: V must be finite");
  const auto f = density(N, V, D, sign);
  const double m2 = integrate_first_passage([&](double u) { return (T - u) * (T - u) * f(u); }, T, N, V, D);
  const double m1 = integrate_first_passage([&](double u) { return (T - u) * f(u); }, T, N, V, D);
  return std::max(0.0, m2 - m1 * m1);
}

double chi_theory(double alpha, double T, double N, double lp, double lm, DriftForm form,
                  BarrierSign sign) {
  check_positive(lp, "lambda0_plus");
  check_positive(lm, "lambda0_minus");
  const double ac = 1.0 - lp / lm;
  if (form == DriftForm::critical_linearized) {
    const double Lambda = lp / ((1.0 - ac) * (1.0 - ac));
    return chi_from_drift(T, N, Lambda * (alpha - ac), linear_diffusion(lp, lm, ac), sign);
  }
  return chi_from_drift(T, N, linear_drift_signed(lp, lm, alpha), linear_diffusion(lp, lm, alpha),
                        sign);
}

double scaling_G(double x, double y, double D_c, double Lambda, BarrierSign sign) {
  return chi_from_drift(1.0, x, Lambda * y, D_c, sign);
}

double HawkesCumulants::log_laplace(double u) const {
  if (!(u >= 0.0)) throw std::invalid_argument("laplace: u must be >= 0");
  const auto g = [this](double v) {
    if (v == 0.0) return lambda0 / (alpha - 1.0);
    const double e = -std::expm1(-beta * v);  // 1 - e^{-beta v}
    return lambda0 * e / (alpha * e - beta * v);
  };
  return integrate(g, 0.0, u);
}

double HawkesCumulants::laplace(double u) const { return std::exp(log_laplace(u)); }

HawkesCumulants hawkes_cumulants(double lambda0, double alpha, double beta) {
  check_positive(lambda0, "lambda0");
  check_positive(beta, "beta");
  if (!(alpha >= 0.0) || alpha >= 1.0) throw std::domain_error("hawkes_cumulants: need 0 <= alpha < 1");
  HawkesCumulants h;
  h.lambda0 = lambda0;
  h.alpha = alpha;
  h.beta = beta;
  h.mean = lambda0 / (1.0 - alpha);
  h.variance = beta * lambda0 / (2.0 * (1.0 - alpha) * (1.0 - alpha));
  return h;
}

double quadratic_potential(double X, double lambda0, double alpha, double beta, double eps) {
  const double d = X - lambda0 / (1.0 - alpha);
  return 0.5 * beta * (1.0 - alpha) * d * d - beta * eps * X * X * X / 3.0;
}

double log_escape_time_asymptotic(double lambda0, double alpha, double beta, double eps) {
  check_positive(lambda0, "lambda0");
  check_positive(beta, "beta");
  check_positive(eps, "epsilon");
  if (alpha < 0.0 || alpha >= 1.0) throw std::domain_error("theory: need 0 <= alpha < 1");
  if (alpha == 0.0) return (std::log(1.0 / (eps * lambda0)) - 2.0) / (beta * eps);
  const double l = std::log(1.0 / eps);
  return -2.0 / beta * ((1.0 - alpha - std::log(alpha)) / eps + lambda0 / (alpha * alpha) * l) - 0.5 * l;
}

MetastabilityTheory metastability_theory(double lambda0, double alpha, double beta, double eps) {
  check_positive(lambda0, "lambda0");
  check_positive(beta, "beta");
  check_positive(eps, "epsilon");
  if (alpha < 0.0 || alpha >= 1.0) throw std::domain_error("metastability: need 0 <= alpha < 1");
  const double q = 1.0 - alpha;
  const double disc = q * q - 4.0 * eps * lambda0;
  if (disc <= 0.0) {
    throw std::domain_error("metastability: no barrier, (1-alpha)^2 <= 4 eps lambda0 (eps=" +
                            std::to_string(eps) + ")");
  }
  MetastabilityTheory m;
  const double s = std::sqrt(disc);
  // Smaller root written without cancellation.
  m.X_eq = 2.0 * lambda0 / (q + s);
  m.X_star = (q + s) / (2.0 * eps);
  m.X_star_asymptotic = q / eps;
  m.barrier = quadratic_potential(m.X_star, lambda0, alpha, beta, eps) -
              quadratic_potential(m.X_eq, lambda0, alpha, beta, eps);
  m.barrier_asymptotic = beta * q * q * q / (6.0 * eps * eps);

  const auto diff = [&](double x) { return 0.5 * beta * beta * (lambda0 + alpha * x + eps * x * x); };
  const auto dpot = [&](double x) { return beta * (q * x - lambda0 - eps * x * x); };
  const auto d2pot = [&](double x) { return beta * (q - 2.0 * eps * x); };
  const double exponent = integrate([&](double x) { return dpot(x) / diff(x); }, m.X_eq, m.X_star);
  const double prefactor = 2.0 * std::numbers::pi *
                           std::sqrt(diff(m.X_eq) * diff(m.X_star) /
                                     std::abs(d2pot(m.X_star) * d2pot(m.X_eq)));
  m.kramers_time = prefactor * std::exp(exponent);
  m.log_time_asymptotic = log_escape_time_asymptotic(lambda0, alpha, beta, eps);
  m.log_time_adjusted = kEmpiricalExponentFactor * m.log_time_asymptotic;
  return m;
}

PriceFeedbackTheory price_feedback_theory(double lp, double lm, double alpha, double c) {
  check_positive(lp, "lambda0_plus");
  check_positive(lm, "lambda0_minus");
  check_positive(c, "qv_per_event");
  if (!(alpha >= 0.0)) throw std::invalid_argument("theory: alpha must be >= 0");
  PriceFeedbackTheory t;
  const double ac = 1.0 - lp / lm;
  t.alpha_c = ac / (2.0 * c);
  t.alpha_star = 1.0 / c;
  if (alpha >= t.alpha_star) {
    t.p_open = 1.0;
    t.regime = Regime::explosive;
    return t;
  }
  if (alpha <= t.alpha_c) {
    t.regime = Regime::stationary;
    t.p_open = (1.0 - ac) / (1.0 - 2.0 * c * alpha);
    t.V = 0.0;
    t.D_P = 2.0 * c * lm * t.p_open;
  } else {
    t.regime = Regime::linear_growth;
    t.p_open = 1.0;
    t.V = lm * (2.0 * c * alpha - ac) / (1.0 - c * alpha);
    t.D_P = c * (lm + lp) / (1.0 - c * alpha);
  }
  return t;
}

}  // namespace liqlab::theory
