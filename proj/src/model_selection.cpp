#include "bmrmm/model_selection.hpp"

#include <algorithm>
#include <cmath>
#include <span>

#include "bmrmm/errors.hpp"

namespace bmrmm {

namespace {

std::size_t check_shape(const LoglikMatrix& ll) {
  if (ll.empty() || ll.front().empty()) throw UsageError("log-likelihood matrix is empty");
  const std::size_t n = ll.front().size();
  for (const auto& row : ll) {
    if (row.size() != n) throw UsageError("log-likelihood matrix rows differ in length");
  }
  return n;
}

// log of the mean of exp(x); exactly x[0] when all entries are equal.
double log_mean_exp(std::span<const double> x) {
  double m = x[0];
  for (double v : x) m = std::max(m, v);
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (double v : x) s += std::exp(v - m);
  return m + std::log(s / static_cast<double>(x.size()));
}

}  // namespace

double lpml(const LoglikMatrix& ll) {
  const std::size_t n = check_shape(ll);
  std::vector<double> col(ll.size());
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t m = 0; m < ll.size(); ++m) col[m] = -ll[m][i];
    total -= log_mean_exp(col);
  }
  return total;
}

WaicParts waic_parts(const LoglikMatrix& ll) {
  const std::size_t n = check_shape(ll);
  std::vector<double> col(ll.size());
  WaicParts w;
  for (std::size_t i = 0; i < n; ++i) {
    // Welford's recurrence keeps the variance of a constant column exactly zero.
    double mean = 0.0, ss = 0.0;
    for (std::size_t m = 0; m < ll.size(); ++m) {
      col[m] = ll[m][i];
      const double delta = col[m] - mean;
      mean += delta / static_cast<double>(m + 1);
      ss += delta * (col[m] - mean);
    }
    w.lppd += log_mean_exp(col);
    if (ll.size() > 1) w.p_waic += ss / static_cast<double>(ll.size() - 1);
  }
  w.waic = -2.0 * (w.lppd - w.p_waic);
  return w;
}

double waic(const LoglikMatrix& ll) { return waic_parts(ll).waic; }

ModelScores model_selection_scores(const PosteriorSamples& samples) {
  if (!samples.has_duration) {
    throw UsageError("duration model required: scores are defined only for gamma-mixture duration fits");
  }
  return {lpml(samples.loglik), waic(samples.loglik)};
}

}  // namespace bmrmm
