#pragma once

#include <optional>
#include <span>
#include <vector>

#include "bmrmm/engine.hpp"

namespace bmrmm {

/// Addresses one scalar parameter across kept iterations. Levels, states and
/// components are 1-based, as on the command line.
struct TraceSelector {
  enum class Kind { Transition, KernelShape, KernelRate };
  Kind kind = Kind::Transition;
  /// Level of each transition clustering covariate.
  std::vector<int> cov_comb;
  int from = 1;
  int to = 1;
  int component = 1;

  static TraceSelector transition(std::vector<int> cov_comb, int from, int to);
  static TraceSelector shape(int component);
  static TraceSelector rate(int component);
  std::string name() const;
};

/// Kept-iteration series of the selected parameter. Transition selectors
/// read the covariate-only probability through each iteration's clusters.
std::vector<double> trace(const PosteriorSamples& samples, const TraceSelector& selector);

/// Sample autocorrelation with denominator n for lags 0..max_lag.
/// Default max_lag is min(50, n - 1). Throws NumericalError on a constant series.
std::vector<double> acf(std::span<const double> series, std::optional<int> max_lag = std::nullopt);

}  // namespace bmrmm
