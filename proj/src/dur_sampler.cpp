#include "bmrmm/dur_sampler.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <sstream>

#include "bmrmm/errors.hpp"
#include "bmrmm/special.hpp"

namespace bmrmm {

namespace {

constexpr int kMaxShapeIterations = 10;
constexpr double kShapeTolerance = 1e-8;

// Coefficient of alpha in the log target.
double linear_term(double n, double sum_log_tau, double log_beta, GammaPrior prior) {
  return n * log_beta + sum_log_tau - prior.rate;
}

// Mode of the target on the log scale, where the density of u = log(alpha)
// is g(e^u) e^u. Its derivative a + c*alpha - n*alpha*psi(alpha) is strictly
// decreasing in u, so a bracketed Newton iteration converges.
double log_space_mode(double n, double c, double a) {
  auto score = [&](double u) {
    const double x = std::exp(u);
    return a + c * x - n * x * digamma(x);
  };
  double lo = -1.0, hi = 1.0;
  while (score(lo) <= 0.0) lo *= 2.0;
  while (score(hi) > 0.0) hi *= 2.0;
  double u = 0.5 * (lo + hi);
  for (int it = 0; it < 100; ++it) {
    const double x = std::exp(u);
    const double s = a + c * x - n * x * digamma(x);
    if (s > 0.0) lo = u;
    else hi = u;
    const double ds = c * x - n * x * digamma(x) - n * x * x * trigamma(x);
    double next = u - s / ds;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - u) < 1e-12 * std::max(1.0, std::abs(u))) return std::exp(next);
    u = next;
  }
  return std::exp(u);
}

ShapeApproximation fixed_point(double n, double sum_log_tau, double log_beta, GammaPrior prior, bool strict) {
  const double a = prior.shape;
  const double c = linear_term(n, sum_log_tau, log_beta, prior);
  double x = log_space_mode(n, c, a);
  double A = 0.0, B = 0.0;
  for (int it = 1; it <= kMaxShapeIterations; ++it) {
    const double next_A = a + n * x * x * trigamma(x);
    const double grad = (a - 1.0) / x + c - n * digamma(x);
    const double next_B = (next_A - 1.0) / x - grad;
    const bool converged = it > 1 && std::abs(next_A - A) <= kShapeTolerance * std::abs(A);
    A = next_A;
    B = next_B;
    if (!(A > 0.0 && B > 0.0) || !std::isfinite(A) || !std::isfinite(B)) break;
    if (converged) return {A, B, it};
    x = A / B;
  }
  if (!strict) return {A, B, kMaxShapeIterations};
  std::ostringstream msg;
  msg.precision(17);
  msg << "shape approximation did not converge (n=" << n << ", last iterate A=" << A << ", B=" << B << ")";
  throw NumericalError(msg.str());
}

struct HermiteRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

// Gauss-Hermite rule for the weight exp(-t^2), roots by Newton iteration on
// the orthonormal recurrence.
HermiteRule make_hermite_rule(int m) {
  HermiteRule r{std::vector<double>(static_cast<std::size_t>(m)), std::vector<double>(static_cast<std::size_t>(m))};
  const double pi_quarter = std::pow(std::numbers::pi, -0.25);
  auto& x = r.nodes;
  for (int i = 0; i < (m + 1) / 2; ++i) {
    const auto k = static_cast<std::size_t>(i);
    double z;
    if (i == 0) z = std::sqrt(2.0 * m + 1.0) - 1.85575 * std::pow(2.0 * m + 1.0, -1.0 / 6.0);
    else if (i == 1) z = x[0] - 1.14 * std::pow(static_cast<double>(m), 0.426) / x[0];
    else if (i == 2) z = 1.86 * x[1] - 0.86 * x[0];
    else if (i == 3) z = 1.91 * x[2] - 0.91 * x[1];
    else z = 2.0 * x[k - 1] - x[k - 2];
    double deriv = 1.0;
    for (int it = 0; it < 100; ++it) {
      double p1 = pi_quarter, p2 = 0.0;
      for (int j = 1; j <= m; ++j) {
        const double p3 = p2;
        p2 = p1;
        p1 = z * std::sqrt(2.0 / j) * p2 - std::sqrt((j - 1.0) / j) * p3;
      }
      deriv = std::sqrt(2.0 * m) * p2;
      const double step = p1 / deriv;
      z -= step;
      if (std::abs(step) < 1e-15) break;
    }
    x[k] = z;
    x[static_cast<std::size_t>(m - 1 - i)] = -z;
    r.weights[k] = r.weights[static_cast<std::size_t>(m - 1 - i)] = 2.0 / (deriv * deriv);
  }
  return r;
}

const HermiteRule& hermite_rule() {
  static const HermiteRule rule = make_hermite_rule(24);
  return rule;
}

}  // namespace

double log_shape_conditional(double alpha, double n, double sum_log_tau, double log_beta, GammaPrior prior) {
  if (!(alpha > 0.0)) return -std::numeric_limits<double>::infinity();
  return (prior.shape - 1.0) * std::log(alpha) + alpha * linear_term(n, sum_log_tau, log_beta, prior) -
         n * std::lgamma(alpha);
}

ShapeApproximation approx_shape_fixed_point(double n, double sum_log_tau, double log_beta, GammaPrior prior) {
  if (n == 0.0) return {prior.shape, prior.rate, 0};
  return fixed_point(n, sum_log_tau, log_beta, prior, true);
}

ShapeApproximation approx_shape_conditional(double n, double sum_log_tau, double log_beta, GammaPrior prior) {
  if (n == 0.0) return {prior.shape, prior.rate, 0};
  const ShapeApproximation base = fixed_point(n, sum_log_tau, log_beta, prior, true);
  // Moments of the exact target by Gauss-Hermite quadrature in u = log(alpha),
  // centred and scaled by the log-moments of the fixed-point gamma.
  const auto& rule = hermite_rule();
  const double centre = digamma(base.shape) - std::log(base.rate);
  const double scale = std::sqrt(2.0 * trigamma(base.shape));
  auto log_density = [&](double u) { return log_shape_conditional(std::exp(u), n, sum_log_tau, log_beta, prior) + u; };
  const double ref = log_density(centre);
  double z0 = 0.0, z1 = 0.0, z2 = 0.0;
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
    const double t = rule.nodes[i];
    const double u = centre + scale * t;
    const double w = rule.weights[i] * std::exp(log_density(u) - ref + t * t);
    const double x = std::exp(u);
    z0 += w;
    z1 += w * x;
    z2 += w * x * x;
  }
  const double mean = z1 / z0;
  const double var = z2 / z0 - mean * mean;
  if (!(mean > 0.0 && var > 0.0) || !std::isfinite(mean) || !std::isfinite(var)) return base;
  return {mean * mean / var, mean / var, base.iterations};
}

DurationSampler::DurationSampler(const SequenceDataset& data, const ModelConfig& config)
    : covariates_(config.fixed_effect ? config.duration_covariates() : std::vector<int>{}),
      prev_state_(config.fixed_effect && config.duration_incl_prev_state),
      block_(
          [&] {
            MixedLayout layout;
            if (config.fixed_effect) {
              for (int j : config.duration_covariates()) {
                layout.cardinalities.push_back(data.covariate_cardinalities[static_cast<std::size_t>(j)]);
              }
              if (config.duration_incl_prev_state) layout.cardinalities.push_back(data.num_states);
            }
            layout.rows = 1;
            layout.outcomes = config.duration.components();
            layout.individuals = data.num_individuals();
            return layout;
          }(),
          config.hyper.dur, EffectFlags{config.fixed_effect, config.random_effect}),
      shape_sampler_(config.shape_sampler) {
  if (!data.has_durations) throw DataError("duration mixture requires a duration column");
  const int K = config.duration.components();
  if (K < 1 || K > kernels::kMaxComponents) {
    throw UsageError("number of mixture components must be between 1 and " + std::to_string(kernels::kMaxComponents));
  }
  for (int k = 0; k < K; ++k) {
    shape_priors_.push_back({config.duration.shape_prior[static_cast<std::size_t>(k)], config.hyper.kernel_shape_prior_rate});
    rate_priors_.push_back({config.duration.rate_prior[static_cast<std::size_t>(k)], config.hyper.kernel_rate_prior_rate});
  }
  const auto& cards = block_.layout().cardinalities;
  std::vector<int> levels(cards.size());
  for (const auto& rec : data.records) {
    for (std::size_t j = 0; j < covariates_.size(); ++j) {
      levels[j] = rec.covariates[static_cast<std::size_t>(covariates_[j])];
    }
    if (prev_state_) levels.back() = rec.previous_state;
    base_.individual.push_back(rec.individual);
    base_.row.push_back(0);
    base_.level_combination.push_back(combination_index(levels, cards));
    duration_.push_back(rec.duration);
    log_duration_.push_back(std::log(rec.duration));
  }
  base_.outcome.assign(duration_.size(), 0);
}

MixedObservations DurationSampler::observations(const DurationState& state) const {
  MixedObservations obs = base_;
  obs.outcome = state.assignment;
  return obs;
}

ComponentStats DurationSampler::compute_stats(std::span<const int> assignment) const {
  const auto K = static_cast<std::size_t>(components());
  ComponentStats s{std::vector<double>(K, 0.0), std::vector<double>(K, 0.0), std::vector<double>(K, 0.0)};
  for (std::size_t n = 0; n < assignment.size(); ++n) {
    const auto k = static_cast<std::size_t>(assignment[n]);
    s.count[k] += 1.0;
    s.sum[k] += duration_[n];
    s.sum_log[k] += log_duration_[n];
  }
  return s;
}

DurationState DurationSampler::initial_state(Rng& rng) const {
  const int K = components();
  const std::size_t N = duration_.size();
  DurationState s;
  s.assignment.assign(N, 0);
  // Components start on duration quantile bands, shortest first.
  std::vector<std::size_t> order(N);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return duration_[x] < duration_[y]; });
  for (std::size_t r = 0; r < N; ++r) {
    s.assignment[order[r]] = static_cast<int>(r * static_cast<std::size_t>(K) / std::max<std::size_t>(N, 1));
  }
  s.stats = compute_stats(s.assignment);
  s.shapes.assign(static_cast<std::size_t>(K), 1.0);
  s.rates.assign(static_cast<std::size_t>(K), 1.0);
  for (std::size_t k = 0; k < static_cast<std::size_t>(K); ++k) {
    const double n = s.stats.count[k];
    if (n < 1.0) continue;
    const double mean = s.stats.sum[k] / n;
    double ss = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
      if (static_cast<std::size_t>(s.assignment[i]) == k) ss += (duration_[i] - mean) * (duration_[i] - mean);
    }
    const double var = n > 1.0 ? ss / (n - 1.0) : 0.0;
    if (var > 0.0 && mean > 0.0) {
      s.shapes[k] = std::clamp(mean * mean / var, 1e-2, 1e4);
      s.rates[k] = s.shapes[k] / mean;
    } else if (mean > 0.0) {
      s.rates[k] = 1.0 / mean;
    }
  }
  s.mix = block_.initial_state(observations(s), rng);
  return s;
}

kernels::MixtureInputs DurationSampler::mixture_inputs(const DurationState& state,
                                                       std::vector<int>& label_combination) const {
  const std::vector<int> map = block_.label_map(state.mix);
  label_combination.resize(duration_.size());
  for (std::size_t n = 0; n < duration_.size(); ++n) {
    label_combination[n] = map[static_cast<std::size_t>(base_.level_combination[n])];
  }
  kernels::MixtureInputs in;
  in.duration = duration_;
  in.log_duration = log_duration_;
  in.individual = base_.individual;
  in.label_combination = label_combination;
  in.lambda_fixed = state.mix.lambda_fixed;
  in.lambda_indiv = state.mix.lambda_indiv;
  in.pi0 = state.mix.pi0;
  in.shapes = state.shapes;
  in.rates = state.rates;
  in.fixed = block_.flags().fixed;
  in.random = block_.flags().random;
  in.components = components();
  return in;
}

void DurationSampler::sample_assignments(DurationState& state, std::uint64_t key, ExecPolicy policy) const {
  if (components() == 1) return;
  std::vector<int> lc;
  kernels::MixtureInputs in = mixture_inputs(state, lc);
  in.key = key;
  std::vector<int> next = state.assignment;
  const std::size_t bad = kernels::sample_assignments(in, next, policy.exec, policy.threads);
  if (bad > 0) {
    throw NumericalError("all component log-densities are -inf for " + std::to_string(bad) + " duration record(s)");
  }
  for (std::size_t n = 0; n < next.size(); ++n) {
    const int from = state.assignment[n];
    const int to = next[n];
    if (from == to) continue;
    const auto f = static_cast<std::size_t>(from);
    const auto t = static_cast<std::size_t>(to);
    state.stats.count[f] -= 1.0;
    state.stats.sum[f] -= duration_[n];
    state.stats.sum_log[f] -= log_duration_[n];
    state.stats.count[t] += 1.0;
    state.stats.sum[t] += duration_[n];
    state.stats.sum_log[t] += log_duration_[n];
  }
  // An emptied component restarts its sums at exactly zero.
  for (std::size_t k = 0; k < state.stats.count.size(); ++k) {
    if (state.stats.count[k] == 0.0) state.stats.sum[k] = state.stats.sum_log[k] = 0.0;
  }
  state.assignment = std::move(next);
}

void DurationSampler::update_shapes(DurationState& state, Rng& rng, std::vector<AcceptanceCounter>* acceptance) const {
  const auto K = static_cast<std::size_t>(components());
  if (acceptance && acceptance->size() < K) acceptance->resize(K);
  for (std::size_t k = 0; k < K; ++k) {
    const double n = state.stats.count[k];
    const double sl = state.stats.sum_log[k];
    const double lb = std::log(state.rates[k]);
    const GammaPrior prior = shape_priors_[k];
    const ShapeApproximation q = approx_shape_conditional(n, sl, lb, prior);
    const double proposal = rng.gamma(q.shape, q.rate);
    bool accept = proposal > 0.0 && std::isfinite(proposal);
    if (accept && shape_sampler_ == ShapeSampler::MetropolisHastings) {
      const double current = state.shapes[k];
      const double log_ratio = log_shape_conditional(proposal, n, sl, lb, prior) -
                               log_shape_conditional(current, n, sl, lb, prior) +
                               log_gamma_density(current, q.shape, q.rate) -
                               log_gamma_density(proposal, q.shape, q.rate);
      accept = std::log(rng.uniform()) < log_ratio;
    }
    if (accept) state.shapes[k] = proposal;
    if (acceptance) (*acceptance)[k].record(accept);
  }
}

void DurationSampler::update_rates(DurationState& state, Rng& rng) const {
  for (std::size_t k = 0; k < state.rates.size(); ++k) {
    const double shape = rate_priors_[k].shape + state.stats.count[k] * state.shapes[k];
    const double rate = rate_priors_[k].rate + state.stats.sum[k];
    state.rates[k] = rng.gamma(shape, rate);
  }
}

void DurationSampler::update_mixture(DurationState& state, const MixedTuning& tuning, MixedAcceptance& acceptance,
                                     Rng& rng, ExecPolicy policy) const {
  if (components() == 1) return;
  block_.sweep(state.mix, observations(state), tuning, acceptance, rng, policy);
}

void DurationSampler::sweep(DurationState& state, const MixedTuning& tuning, DurationAcceptance& acceptance, Rng& rng,
                            ExecPolicy policy) const {
  sample_assignments(state, rng.next_u64(), policy);
  update_shapes(state, rng, &acceptance.shapes);
  update_rates(state, rng);
  update_mixture(state, tuning, acceptance.mix, rng, policy);
}

void DurationSampler::loglik(const DurationState& state, std::span<double> out, ExecPolicy policy) const {
  std::vector<int> lc;
  const kernels::MixtureInputs in = mixture_inputs(state, lc);
  kernels::mixture_loglik(in, out, policy.exec, policy.threads);
}

std::vector<double> DurationSampler::record_probabilities(const DurationState& state, ExecPolicy policy) const {
  std::vector<int> lc;
  const kernels::MixtureInputs in = mixture_inputs(state, lc);
  std::vector<double> out(duration_.size() * static_cast<std::size_t>(components()));
  kernels::mixture_weights(in, out, policy.exec, policy.threads);
  return out;
}

std::string DurationSampler::check_invariants(const DurationState& state) const {
  if (auto e = block_.check_invariants(state.mix); !e.empty()) return "duration " + e;
  const auto K = static_cast<std::size_t>(components());
  if (state.shapes.size() != K || state.rates.size() != K) return "kernel parameters: wrong size";
  for (std::size_t k = 0; k < K; ++k) {
    if (!(state.shapes[k] > 0.0) || !std::isfinite(state.shapes[k])) return "kernel shape not positive";
    if (!(state.rates[k] > 0.0) || !std::isfinite(state.rates[k])) return "kernel rate not positive";
  }
  for (int a : state.assignment) {
    if (a < 0 || static_cast<std::size_t>(a) >= K) return "component assignment out of range";
  }
  return {};
}

}  // namespace bmrmm
