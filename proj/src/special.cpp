#include "bmrmm/special.hpp"

#include <algorithm>
#include <boost/math/special_functions/digamma.hpp>
#include <boost/math/special_functions/polygamma.hpp>
#include <boost/math/special_functions/trigamma.hpp>
#include <cmath>
#include <limits>

namespace bmrmm {

double digamma(double x) { return boost::math::digamma(x); }
double trigamma(double x) { return boost::math::trigamma(x); }
double polygamma(int n, double x) { return boost::math::polygamma(n, x); }

double log_gamma_density(double x, double shape, double rate) {
  if (!(x > 0.0)) return -std::numeric_limits<double>::infinity();
  return shape * std::log(rate) - std::lgamma(shape) + (shape - 1.0) * std::log(x) - rate * x;
}

double log_dirichlet_density(std::span<const double> v, std::span<const double> concentration) {
  double total = 0.0;
  double out = 0.0;
  for (std::size_t k = 0; k < v.size(); ++k) {
    if (!(v[k] > 0.0)) return -std::numeric_limits<double>::infinity();
    total += concentration[k];
    out += (concentration[k] - 1.0) * std::log(v[k]) - std::lgamma(concentration[k]);
  }
  return out + std::lgamma(total);
}

double log_dirichlet_multinomial(std::span<const int> counts, std::span<const double> concentration) {
  double total_conc = 0.0;
  int total = 0;
  double out = 0.0;
  for (std::size_t k = 0; k < counts.size(); ++k) {
    total_conc += concentration[k];
    total += counts[k];
    if (counts[k] > 0) out += std::lgamma(concentration[k] + counts[k]) - std::lgamma(concentration[k]);
  }
  if (total == 0) return 0.0;
  return out + std::lgamma(total_conc) - std::lgamma(total_conc + total);
}

double log_sum_exp(std::span<const double> x) {
  if (x.empty()) return -std::numeric_limits<double>::infinity();
  const double m = *std::max_element(x.begin(), x.end());
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (double v : x) s += std::exp(v - m);
  return m + std::log(s);
}

}  // namespace bmrmm
