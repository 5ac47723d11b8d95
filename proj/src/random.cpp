#include "bmrmm/random.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "bmrmm/errors.hpp"

namespace bmrmm {

double Rng::uniform() {
  return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
}

double Rng::normal() { return normal_(engine_); }

double Rng::gamma(double shape, double rate) {
  std::gamma_distribution<double> dist(shape, 1.0 / rate);
  return dist(engine_);
}

double Rng::log_gamma_variate(double shape) {
  if (shape >= 1.0) {
    std::gamma_distribution<double> dist(shape, 1.0);
    return std::log(dist(engine_));
  }
  // Ga(a) = Ga(a+1) * U^(1/a), taken in log space.
  std::gamma_distribution<double> dist(shape + 1.0, 1.0);
  const double g = dist(engine_);
  return std::log(g) + std::log(uniform()) / shape;
}

double Rng::beta(double a, double b) {
  const double x = log_gamma_variate(a);
  const double y = log_gamma_variate(b);
  const double m = std::max(x, y);
  const double ex = std::exp(x - m);
  const double ey = std::exp(y - m);
  return ex / (ex + ey);
}

void Rng::dirichlet(std::span<const double> concentration, std::span<double> out) {
  const std::size_t n = concentration.size();
  if (n == 1) {
    out[0] = 1.0;
    return;
  }
  double max_log = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < n; ++k) {
    out[k] = log_gamma_variate(concentration[k]);
    max_log = std::max(max_log, out[k]);
  }
  double total = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    out[k] = std::max(std::exp(out[k] - max_log), std::numeric_limits<double>::min());
    total += out[k];
  }
  for (std::size_t k = 0; k < n; ++k) out[k] /= total;
}

std::size_t Rng::categorical(std::span<const double> weights) {
  double total = 0.0;
  for (double w : weights) total += w;
  if (!(total > 0.0) || !std::isfinite(total)) {
    throw NumericalError("categorical draw with non-positive total weight");
  }
  double u = uniform() * total;
  for (std::size_t k = 0; k + 1 < weights.size(); ++k) {
    if (u < weights[k]) return k;
    u -= weights[k];
  }
  return weights.size() - 1;
}

}  // namespace bmrmm
