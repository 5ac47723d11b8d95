// Serial reference kernels against their OpenMP counterparts on synthetic
// record sets of growing size.

#include <cmath>
#include <vector>

#include <benchmark/benchmark.h>

#include "bmrmm/kernels.hpp"
#include "bmrmm/random.hpp"

namespace {

using namespace bmrmm;

struct Records {
  int states = 4;
  int individuals = 50;
  int combos = 6;
  std::vector<int> individual, row, combo, outcome;
  std::vector<double> duration, log_duration;
  std::vector<double> fixed, indiv, pi_row, pi_ind;
  std::vector<double> shapes{2.0, 6.0}, rates{8.0, 4.0};
  std::vector<double> mix_fixed, mix_indiv;

  explicit Records(std::size_t n) {
    Rng rng(7);
    for (std::size_t r = 0; r < n; ++r) {
      individual.push_back(static_cast<int>(rng.next_u64() % individuals));
      row.push_back(static_cast<int>(rng.next_u64() % states));
      combo.push_back(static_cast<int>(rng.next_u64() % combos));
      outcome.push_back(static_cast<int>(rng.next_u64() % states));
      duration.push_back(rng.gamma(3.0, 5.0));
      log_duration.push_back(std::log(duration.back()));
    }
    auto simplex = [&](std::size_t blocks, std::size_t width) {
      std::vector<double> v(blocks * width), conc(width, 1.0);
      for (std::size_t b = 0; b < blocks; ++b) rng.dirichlet(conc, std::span<double>(v).subspan(b * width, width));
      return v;
    };
    fixed = simplex(static_cast<std::size_t>(combos * states), static_cast<std::size_t>(states));
    indiv = simplex(static_cast<std::size_t>(individuals * states), static_cast<std::size_t>(states));
    pi_row.assign(static_cast<std::size_t>(individuals * states), 0.6);
    pi_ind.assign(static_cast<std::size_t>(individuals), 0.6);
    mix_fixed = simplex(static_cast<std::size_t>(combos), 2);
    mix_indiv = simplex(static_cast<std::size_t>(individuals), 2);
  }

  kernels::AllocationInputs allocation_inputs() const {
    return {individual, row, combo, outcome, fixed, indiv, pi_row, states, states, 11};
  }
  kernels::MixtureInputs mixture_inputs() const {
    kernels::MixtureInputs in;
    in.duration = duration;
    in.log_duration = log_duration;
    in.individual = individual;
    in.label_combination = combo;
    in.lambda_fixed = mix_fixed;
    in.lambda_indiv = mix_indiv;
    in.pi0 = pi_ind;
    in.shapes = shapes;
    in.rates = rates;
    in.components = 2;
    in.key = 13;
    return in;
  }
};

const Records& records(std::size_t n) {
  static std::vector<std::pair<std::size_t, Records>> cache;
  for (auto& [size, r] : cache) {
    if (size == n) return r;
  }
  cache.emplace_back(n, Records(n));
  return cache.back().second;
}

template <kernels::Exec E>
void BM_Allocations(benchmark::State& state) {
  const auto& r = records(static_cast<std::size_t>(state.range(0)));
  const auto in = r.allocation_inputs();
  std::vector<std::uint8_t> out(r.outcome.size());
  for (auto _ : state) {
    kernels::sample_allocations(in, out, E);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

template <kernels::Exec E>
void BM_Counts(benchmark::State& state) {
  const auto& r = records(static_cast<std::size_t>(state.range(0)));
  std::vector<std::uint8_t> from(r.outcome.size());
  for (std::size_t i = 0; i < from.size(); ++i) from[i] = static_cast<std::uint8_t>(i & 1U);
  const kernels::CountInputs in{r.individual, r.row, r.combo, r.outcome, from, r.states, r.states, r.combos,
                                r.individuals};
  for (auto _ : state) {
    auto c = kernels::count_allocations(in, E);
    benchmark::DoNotOptimize(c.fixed_by_level.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

template <kernels::Exec E>
void BM_Assignments(benchmark::State& state) {
  const auto& r = records(static_cast<std::size_t>(state.range(0)));
  const auto in = r.mixture_inputs();
  std::vector<int> out(r.duration.size());
  for (auto _ : state) {
    kernels::sample_assignments(in, out, E);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

template <kernels::Exec E>
void BM_Loglik(benchmark::State& state) {
  const auto& r = records(static_cast<std::size_t>(state.range(0)));
  const auto in = r.mixture_inputs();
  std::vector<double> out(r.duration.size());
  for (auto _ : state) {
    kernels::mixture_loglik(in, out, E);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

constexpr auto kSerial = kernels::Exec::Serial;
constexpr auto kParallel = kernels::Exec::Parallel;

}  // namespace

BENCHMARK(BM_Allocations<kSerial>)->RangeMultiplier(10)->Range(1000, 1000000);
BENCHMARK(BM_Allocations<kParallel>)->RangeMultiplier(10)->Range(1000, 1000000)->UseRealTime();
BENCHMARK(BM_Counts<kSerial>)->RangeMultiplier(10)->Range(1000, 1000000);
BENCHMARK(BM_Counts<kParallel>)->RangeMultiplier(10)->Range(1000, 1000000)->UseRealTime();
BENCHMARK(BM_Assignments<kSerial>)->RangeMultiplier(10)->Range(1000, 1000000);
BENCHMARK(BM_Assignments<kParallel>)->RangeMultiplier(10)->Range(1000, 1000000)->UseRealTime();
BENCHMARK(BM_Loglik<kSerial>)->RangeMultiplier(10)->Range(1000, 1000000);
BENCHMARK(BM_Loglik<kParallel>)->RangeMultiplier(10)->Range(1000, 1000000)->UseRealTime();

BENCHMARK_MAIN();
