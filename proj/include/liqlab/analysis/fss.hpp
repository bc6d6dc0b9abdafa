#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

namespace liqlab::analysis {

struct ChiPoint {
  double alpha = 0.0;
  double T = 0.0;
  double N = 0.0;
  double chi = 0.0;
};

struct PeakCell {
  double T = 0.0;
  double N = 0.0;
  double alpha_m = 0.0;
  double chi_max = 0.0;
  int points = 0;
  bool bracketed = false;  // discrete argmax is an interior grid point
};

struct FssOptions {
  double inv_zeta_min = 0.1;
  double inv_zeta_max = 1.0;
  double inv_zeta_step = 0.0025;
  double inv_eta_min = 0.1;
  double inv_eta_max = 1.0;
  double inv_eta_step = 0.0025;
  int alpha_star_steps = 401;  // grid over [alpha_star_min, alpha_star_max]
  double alpha_star_min = 0.0; // both zero: span of the alpha_m table, padded
  double alpha_star_max = 0.0;
  int interp_points = 64;
  int min_horizons = 4;
  int min_sizes = 3;
  int min_alphas = 8;
};

struct ScalingFit {
  double gamma = 0.0;
  double gamma_se = 0.0;
  double zeta = 0.0;
  double eta = 0.0;
  double alpha_star = 0.0;
  double collapse_distance = 0.0;  // chi collapse at the fitted zeta
  double peak_distance = 0.0;      // alpha_m collapse at the fitted (eta, alpha*)
  double n_max = 0.0;
  std::vector<PeakCell> peaks;
  std::vector<PeakCell> excluded;
  std::vector<std::pair<double, double>> zeta_curve;       // (1/zeta, distance)
  std::vector<std::pair<double, double>> eta_curve;        // (1/eta, distance) at alpha*
  std::vector<std::pair<double, double>> alpha_star_curve; // (alpha*, distance) at eta
};

/// Curve as (x, y) points sorted by x.
using Curve = std::vector<std::pair<double, double>>;

/// Mean over curve pairs of the RMS difference on the intersection of their
/// x-ranges (linear interpolation, `points` abscissae), each normalised by the
/// pair's RMS magnitude. Pairs without overlap are skipped; returns +inf when
/// no pair overlaps.
double collapse_distance(std::span<const Curve> curves, int points = 64);

/// Location and height of the chi peak of one (T, N) cell by a 3-point parabola
/// through the discrete argmax. The cell must be sorted by alpha.
PeakCell locate_peak(std::span<const ChiPoint> cell);

/// Full finite-size-scaling fit. Throws std::invalid_argument naming what is missing.
ScalingFit fss_pipeline(std::span<const ChiPoint> data, const FssOptions& options = {});

/// Peak curves chi = T^gamma exp(-u^2 / (2 w^2)), u = T^{1/zeta} (alpha - alpha_m), with
/// alpha_m = alpha* + T^{-1/zeta} (offset - size_coeff / x) and x = N T^{-1/eta}.
struct PlantedScaling {
  double gamma = 2.0;
  double zeta = 3.0;
  double eta = 3.0;
  double alpha_star = 0.063;
  double offset = 1.8;
  double size_coeff = 5.0;
  double width = 0.8;
  std::vector<double> horizons{50, 100, 200, 400};
  std::vector<double> sizes{60, 120, 240};
  int half_points = 8;  // 2 * half_points + 1 alphas per cell
};

std::vector<ChiPoint> planted_chi_grid(const PlantedScaling& p = {});

}  // namespace liqlab::analysis
