#pragma once

#include <optional>
#include <span>

namespace liqlab::analysis {

/// Unbiased sample variance of min(tau_c, T); censored replicas (no crisis)
/// are passed as nullopt or any value >= T.
double susceptibility(std::span<const std::optional<double>> crisis_times, double T);
double susceptibility(std::span<const double> crisis_times, double T);

}  // namespace liqlab::analysis
