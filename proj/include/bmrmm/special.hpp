#pragma once

#include <span>

namespace bmrmm {

struct GammaPrior {
  double shape = 1.0;
  double rate = 1.0;
};

struct BetaPrior {
  double a = 1.0;
  double b = 1.0;
};

double digamma(double x);
double trigamma(double x);
/// n-th polygamma function psi^(n).
double polygamma(int n, double x);

/// log Ga(x | shape, rate).
double log_gamma_density(double x, double shape, double rate);

/// log Dir(v | concentration). Returns -inf if any component of v is 0.
double log_dirichlet_density(std::span<const double> v, std::span<const double> concentration);

/// log of the Dirichlet-multinomial marginal of one count vector (ordered
/// sequence likelihood, without the multinomial coefficient).
double log_dirichlet_multinomial(std::span<const int> counts, std::span<const double> concentration);

/// Numerically stable log(sum(exp(x))).
double log_sum_exp(std::span<const double> x);

}  // namespace bmrmm
