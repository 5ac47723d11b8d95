#include "bmrmm/kernels.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <limits>

#include "bmrmm/random.hpp"

namespace bmrmm::kernels {

namespace {

int thread_count(int requested) { return requested > 0 ? requested : omp_get_max_threads(); }

inline bool allocate_one(const AllocationInputs& in, std::size_t n, std::uint8_t& out) {
  const auto i = static_cast<std::size_t>(in.individual[n]);
  const auto r = static_cast<std::size_t>(in.row[n]);
  const auto y = static_cast<std::size_t>(in.outcome[n]);
  const auto rows = static_cast<std::size_t>(in.rows);
  const auto outs = static_cast<std::size_t>(in.outcomes);
  const auto lc = static_cast<std::size_t>(in.label_combination[n]);
  const double p = in.pi0[i * rows + r];
  const double wf = p * in.lambda_fixed[(lc * rows + r) * outs + y];
  const double wr = (1.0 - p) * in.lambda_indiv[(i * rows + r) * outs + y];
  const double total = wf + wr;
  if (!(total > 0.0)) return false;
  out = counter_uniform(in.key, n) * total < wf ? 1 : 0;
  return true;
}

// Unnormalized mixture weights of one record into w[0..K).
inline void record_weights(const MixtureInputs& in, std::size_t n, double* w) {
  const auto K = static_cast<std::size_t>(in.components);
  const auto i = static_cast<std::size_t>(in.individual[n]);
  const auto lc = static_cast<std::size_t>(in.label_combination[n]);
  const double p = in.pi0[i];
  for (std::size_t k = 0; k < K; ++k) {
    const double f = in.fixed ? in.lambda_fixed[lc * K + k] : 0.0;
    const double g = in.random ? in.lambda_indiv[i * K + k] : 0.0;
    if (in.fixed && in.random) w[k] = p * f + (1.0 - p) * g;
    else w[k] = in.fixed ? f : g;
  }
}

inline double log_kernel(const MixtureInputs& in, std::size_t n, std::size_t k) {
  const double a = in.shapes[k];
  const double b = in.rates[k];
  return a * std::log(b) - std::lgamma(a) + (a - 1.0) * in.log_duration[n] - b * in.duration[n];
}

inline bool assign_one(const MixtureInputs& in, std::size_t n, int& out) {
  const auto K = static_cast<std::size_t>(in.components);
  if (K == 1) {
    out = 0;
    return true;
  }
  double w[kMaxComponents];
  double lp[kMaxComponents];
  record_weights(in, n, w);
  double m = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < K; ++k) {
    lp[k] = w[k] > 0.0 ? std::log(w[k]) + log_kernel(in, n, k) : -std::numeric_limits<double>::infinity();
    m = std::max(m, lp[k]);
  }
  if (!std::isfinite(m)) return false;
  double total = 0.0;
  for (std::size_t k = 0; k < K; ++k) {
    lp[k] = std::exp(lp[k] - m);
    total += lp[k];
  }
  double u = counter_uniform(in.key, n) * total;
  std::size_t pick = K - 1;
  for (std::size_t k = 0; k + 1 < K; ++k) {
    if (u < lp[k]) {
      pick = k;
      break;
    }
    u -= lp[k];
  }
  out = static_cast<int>(pick);
  return true;
}

inline double loglik_one(const MixtureInputs& in, std::size_t n) {
  const auto K = static_cast<std::size_t>(in.components);
  double w[kMaxComponents];
  double lp[kMaxComponents];
  record_weights(in, n, w);
  double m = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < K; ++k) {
    lp[k] = w[k] > 0.0 ? std::log(w[k]) + log_kernel(in, n, k) : -std::numeric_limits<double>::infinity();
    m = std::max(m, lp[k]);
  }
  if (!std::isfinite(m)) return m;
  double total = 0.0;
  for (std::size_t k = 0; k < K; ++k) total += std::exp(lp[k] - m);
  double wsum = 0.0;
  for (std::size_t k = 0; k < K; ++k) wsum += w[k];
  return m + std::log(total) - std::log(wsum);
}

inline void weights_one(const MixtureInputs& in, std::size_t n, double* out) {
  const auto K = static_cast<std::size_t>(in.components);
  record_weights(in, n, out);
  double total = 0.0;
  for (std::size_t k = 0; k < K; ++k) total += out[k];
  for (std::size_t k = 0; k < K; ++k) out[k] /= total;
}

void accumulate(const CountInputs& in, std::size_t begin, std::size_t end, AllocationCounts& c) {
  const auto rows = static_cast<std::size_t>(in.rows);
  const auto outs = static_cast<std::size_t>(in.outcomes);
  for (std::size_t n = begin; n < end; ++n) {
    const auto i = static_cast<std::size_t>(in.individual[n]);
    const auto r = static_cast<std::size_t>(in.row[n]);
    const auto y = static_cast<std::size_t>(in.outcome[n]);
    if (in.from_fixed[n]) {
      const auto l = static_cast<std::size_t>(in.level_combination[n]);
      ++c.fixed_by_level[(l * rows + r) * outs + y];
      ++c.fixed_alloc[i * rows + r];
    } else {
      ++c.random_by_indiv[(i * rows + r) * outs + y];
      ++c.random_alloc[i * rows + r];
    }
  }
}

AllocationCounts empty_counts(const CountInputs& in) {
  const auto rows = static_cast<std::size_t>(in.rows);
  const auto outs = static_cast<std::size_t>(in.outcomes);
  const auto ind = static_cast<std::size_t>(in.individuals);
  AllocationCounts c;
  c.fixed_by_level.assign(static_cast<std::size_t>(in.level_combinations) * rows * outs, 0);
  c.random_by_indiv.assign(ind * rows * outs, 0);
  c.fixed_alloc.assign(ind * rows, 0);
  c.random_alloc.assign(ind * rows, 0);
  return c;
}

}  // namespace

namespace serial {

std::size_t sample_allocations(const AllocationInputs& in, std::span<std::uint8_t> from_fixed) {
  std::size_t bad = 0;
  for (std::size_t n = 0; n < from_fixed.size(); ++n) {
    if (!allocate_one(in, n, from_fixed[n])) ++bad;
  }
  return bad;
}

AllocationCounts count_allocations(const CountInputs& in) {
  AllocationCounts c = empty_counts(in);
  accumulate(in, 0, in.outcome.size(), c);
  return c;
}

std::size_t sample_assignments(const MixtureInputs& in, std::span<int> assignment) {
  std::size_t bad = 0;
  for (std::size_t n = 0; n < assignment.size(); ++n) {
    if (!assign_one(in, n, assignment[n])) ++bad;
  }
  return bad;
}

void mixture_loglik(const MixtureInputs& in, std::span<double> out) {
  for (std::size_t n = 0; n < out.size(); ++n) out[n] = loglik_one(in, n);
}

void mixture_weights(const MixtureInputs& in, std::span<double> out) {
  const auto K = static_cast<std::size_t>(in.components);
  for (std::size_t n = 0; n < in.duration.size(); ++n) weights_one(in, n, out.data() + n * K);
}

}  // namespace serial

namespace parallel {

std::size_t sample_allocations(const AllocationInputs& in, std::span<std::uint8_t> from_fixed, int threads) {
  const auto n_rec = static_cast<std::int64_t>(from_fixed.size());
  std::size_t bad = 0;
#pragma omp parallel for schedule(static) reduction(+ : bad) num_threads(thread_count(threads))
  for (std::int64_t n = 0; n < n_rec; ++n) {
    if (!allocate_one(in, static_cast<std::size_t>(n), from_fixed[static_cast<std::size_t>(n)])) ++bad;
  }
  return bad;
}

AllocationCounts count_allocations(const CountInputs& in, int threads) {
  const int nt = thread_count(threads);
  std::vector<AllocationCounts> partial(static_cast<std::size_t>(nt), empty_counts(in));
  const std::size_t n_rec = in.outcome.size();
#pragma omp parallel num_threads(nt)
  {
    const int t = omp_get_thread_num();
    const int team = omp_get_num_threads();
    const std::size_t chunk = (n_rec + static_cast<std::size_t>(team) - 1) / static_cast<std::size_t>(team);
    const std::size_t begin = std::min(n_rec, chunk * static_cast<std::size_t>(t));
    const std::size_t end = std::min(n_rec, begin + chunk);
    accumulate(in, begin, end, partial[static_cast<std::size_t>(t)]);
  }
  AllocationCounts total = std::move(partial[0]);
  for (std::size_t t = 1; t < partial.size(); ++t) {
    auto add = [](std::vector<int>& into, const std::vector<int>& from) {
      for (std::size_t k = 0; k < into.size(); ++k) into[k] += from[k];
    };
    add(total.fixed_by_level, partial[t].fixed_by_level);
    add(total.random_by_indiv, partial[t].random_by_indiv);
    add(total.fixed_alloc, partial[t].fixed_alloc);
    add(total.random_alloc, partial[t].random_alloc);
  }
  return total;
}

std::size_t sample_assignments(const MixtureInputs& in, std::span<int> assignment, int threads) {
  const auto n_rec = static_cast<std::int64_t>(assignment.size());
  std::size_t bad = 0;
#pragma omp parallel for schedule(static) reduction(+ : bad) num_threads(thread_count(threads))
  for (std::int64_t n = 0; n < n_rec; ++n) {
    if (!assign_one(in, static_cast<std::size_t>(n), assignment[static_cast<std::size_t>(n)])) ++bad;
  }
  return bad;
}

void mixture_loglik(const MixtureInputs& in, std::span<double> out, int threads) {
  const auto n_rec = static_cast<std::int64_t>(out.size());
#pragma omp parallel for schedule(static) num_threads(thread_count(threads))
  for (std::int64_t n = 0; n < n_rec; ++n) {
    out[static_cast<std::size_t>(n)] = loglik_one(in, static_cast<std::size_t>(n));
  }
}

void mixture_weights(const MixtureInputs& in, std::span<double> out, int threads) {
  const auto K = static_cast<std::size_t>(in.components);
  const auto n_rec = static_cast<std::int64_t>(in.duration.size());
#pragma omp parallel for schedule(static) num_threads(thread_count(threads))
  for (std::int64_t n = 0; n < n_rec; ++n) {
    weights_one(in, static_cast<std::size_t>(n), out.data() + static_cast<std::size_t>(n) * K);
  }
}

}  // namespace parallel

std::size_t sample_allocations(const AllocationInputs& in, std::span<std::uint8_t> from_fixed, Exec exec,
                               int threads) {
  return exec == Exec::Serial ? serial::sample_allocations(in, from_fixed)
                              : parallel::sample_allocations(in, from_fixed, threads);
}

AllocationCounts count_allocations(const CountInputs& in, Exec exec, int threads) {
  return exec == Exec::Serial ? serial::count_allocations(in) : parallel::count_allocations(in, threads);
}

std::size_t sample_assignments(const MixtureInputs& in, std::span<int> assignment, Exec exec, int threads) {
  return exec == Exec::Serial ? serial::sample_assignments(in, assignment)
                              : parallel::sample_assignments(in, assignment, threads);
}

void mixture_loglik(const MixtureInputs& in, std::span<double> out, Exec exec, int threads) {
  if (exec == Exec::Serial) serial::mixture_loglik(in, out);
  else parallel::mixture_loglik(in, out, threads);
}

void mixture_weights(const MixtureInputs& in, std::span<double> out, Exec exec, int threads) {
  if (exec == Exec::Serial) serial::mixture_weights(in, out);
  else parallel::mixture_weights(in, out, threads);
}

}  // namespace bmrmm::kernels
