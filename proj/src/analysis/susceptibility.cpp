#include "liqlab/analysis/susceptibility.hpp"

#include <algorithm>
#include <stdexcept>
#include <vector>

#include "liqlab/analysis/stat_tests.hpp"

namespace liqlab::analysis {

double susceptibility(std::span<const double> crisis_times, double T) {
  if (crisis_times.size() < 2) throw std::invalid_argument("susceptibility: need >= 2 replicas");
  if (!(T > 0)) throw std::invalid_argument("susceptibility: T must be > 0");
  std::vector<double> capped;
  capped.reserve(crisis_times.size());
  for (double t : crisis_times) capped.push_back(std::min(t, T));
  return sample_variance(capped);
}

double susceptibility(std::span<const std::optional<double>> crisis_times, double T) {
  std::vector<double> v;
  v.reserve(crisis_times.size());
  for (const auto& t : crisis_times) v.push_back(t ? *t : T);
  return susceptibility(std::span<const double>(v), T);
}

}  // namespace liqlab::analysis
