#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

#include <doctest.h>

#include "../oracles/shape_quadrature.hpp"
#include "bmrmm/dur_sampler.hpp"
#include "bmrmm/errors.hpp"
#include "bmrmm/special.hpp"

using namespace bmrmm;

namespace {

// Alternating 1 -> 2 -> 1 chain for each individual, covariate level by individual parity.
SequenceDataset duration_data(const std::vector<double>& taus, int individuals = 1) {
  std::ostringstream csv;
  csv.precision(17);
  csv << "Id,X,Prev,Cur,D\n";
  for (int i = 0; i < individuals; ++i) {
    for (std::size_t n = 0; n < taus.size(); ++n) {
      const int prev = n % 2 == 0 ? 1 : 2;
      csv << i + 1 << ',' << (i % 2) + 1 << ',' << prev << ',' << 3 - prev << ',' << taus[n] << '\n';
    }
  }
  ParseOptions o;
  o.num_covariates = 1;
  return parse_dataset_text(csv.str(), o);
}

ModelConfig duration_config(int K) {
  ModelConfig c;
  c.num_covariates = 1;
  c.duration = DurationSpec::gamma_mixture(K);
  return c;
}

std::vector<double> gamma_sample(int n, double shape, double rate, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> out;
  for (int i = 0; i < n; ++i) out.push_back(rng.gamma(shape, rate));
  return out;
}

}  // namespace

TEST_CASE("shape approximation") {
  SUBCASE("no data returns the prior") {
    const auto a = approx_shape_conditional(0.0, 0.0, 0.3, {2.0, 3.0});
    CHECK(a.shape == doctest::Approx(2.0));
    CHECK(a.rate == doctest::Approx(3.0));
  }
  SUBCASE("matches quadrature moments") {
    for (int n : {5, 50, 500}) {
      const auto taus = gamma_sample(n, 3.0, 2.0, 40 + static_cast<std::uint64_t>(n));
      double sl = 0.0;
      for (double t : taus) sl += std::log(t);
      const auto ref = oracle::shape_moments(n, sl, std::log(2.0), 1.0, 1.0);
      const auto a = approx_shape_conditional(n, sl, std::log(2.0), {1.0, 1.0});
      CHECK(a.shape / a.rate == doctest::Approx(ref.mean).epsilon(1e-4));
      CHECK(std::sqrt(a.shape) / a.rate == doctest::Approx(ref.sd).epsilon(1e-3));
      const auto fp = approx_shape_fixed_point(n, sl, std::log(2.0), {1.0, 1.0});
      CHECK(fp.shape / fp.rate == doctest::Approx(ref.mean).epsilon(0.05));
      CHECK(fp.iterations <= 10);
    }
  }
  SUBCASE("larger mean log-duration gives a larger shape") {
    double last = 0.0;
    for (double sl : {-10.0, 0.0, 10.0, 20.0}) {
      const auto a = approx_shape_conditional(20.0, sl, 0.0, {1.0, 1.0});
      CHECK(a.shape / a.rate > last);
      last = a.shape / a.rate;
    }
  }
  SUBCASE("log conditional up to a constant") {
    auto ref = [](double a) {
      return log_gamma_density(a, 2.0, 1.0) + 3.0 * (a * std::log(4.0) - std::lgamma(a)) + (a - 1.0) * 1.5;
    };
    const double v = log_shape_conditional(2.0, 3.0, 1.5, std::log(4.0), {2.0, 1.0}) -
                     log_shape_conditional(0.7, 3.0, 1.5, std::log(4.0), {2.0, 1.0});
    CHECK(v == doctest::Approx(ref(2.0) - ref(0.7)).epsilon(1e-12));
  }
}

TEST_CASE("rate update is conjugate") {
  const auto data = duration_data({1.0, 3.0});
  const DurationSampler s(data, duration_config(1));
  Rng rng(1);
  auto state = s.initial_state(rng);
  state.shapes = {2.0};
  state.stats = s.compute_stats(state.assignment);
  CHECK(state.stats.count[0] == 2.0);
  CHECK(state.stats.sum[0] == doctest::Approx(4.0));
  // Ga(1 + 2 * 2, 1 + 4) has mean 1.
  double m = 0.0;
  const int n = 100000;
  for (int t = 0; t < n; ++t) {
    s.update_rates(state, rng);
    m += state.rates[0] / n;
  }
  CHECK(m == doctest::Approx(1.0).epsilon(0.01));

  // An empty component draws from the prior.
  const DurationSampler s2(data, duration_config(2));
  auto st2 = s2.initial_state(rng);
  st2.assignment = {0, 0};
  st2.stats = s2.compute_stats(st2.assignment);
  CHECK(st2.stats.count[1] == 0.0);
  m = 0.0;
  for (int t = 0; t < n; ++t) {
    s2.update_rates(st2, rng);
    m += st2.rates[1] / n;
  }
  CHECK(m == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("shape update targets the full conditional") {
  const auto taus = gamma_sample(40, 3.0, 2.0, 77);
  const auto data = duration_data(taus);
  const DurationSampler s(data, duration_config(1));
  Rng rng(2);
  auto state = s.initial_state(rng);
  state.rates = {2.0};
  state.stats = s.compute_stats(state.assignment);
  double sl = 0.0;
  for (double t : taus) sl += std::log(t);
  const auto ref = oracle::shape_moments(40, sl, std::log(2.0), 1.0, 1.0);
  std::vector<AcceptanceCounter> acc(1);
  const int n = 100000;
  double m = 0.0, sq = 0.0;
  for (int t = 0; t < n; ++t) {
    s.update_shapes(state, rng, &acc);
    m += state.shapes[0] / n;
    sq += state.shapes[0] * state.shapes[0] / n;
  }
  CHECK(m == doctest::Approx(ref.mean).epsilon(0.01));
  CHECK(std::sqrt(sq - m * m) == doctest::Approx(ref.sd).epsilon(0.03));
  CHECK(acc[0].rate() > 0.9);

  // No data: the proposal is the prior and every move is accepted.
  const DurationSampler s2(data, duration_config(2));
  auto st2 = s2.initial_state(rng);
  st2.assignment.assign(st2.assignment.size(), 0);
  st2.stats = s2.compute_stats(st2.assignment);
  std::vector<AcceptanceCounter> acc2(2);
  for (int t = 0; t < 200; ++t) s2.update_shapes(st2, rng, &acc2);
  CHECK(acc2[1].rate() == 1.0);
}

TEST_CASE("assignments favour the likelier kernel") {
  const auto data = duration_data(std::vector<double>(30, 5.0));
  const DurationSampler s(data, duration_config(2));
  Rng rng(3);
  auto state = s.initial_state(rng);
  state.shapes = {2.0, 2.0};
  state.rates = {1.0, 10.0};
  s.sample_assignments(state, 99);
  for (int z : state.assignment) CHECK(z == 0);
  CHECK(state.stats.count[0] == 30.0);
  CHECK(s.check_invariants(state).empty());
}

TEST_CASE("single component") {
  const auto taus = gamma_sample(20, 2.0, 1.0, 5);
  const auto data = duration_data(taus);
  const DurationSampler s(data, duration_config(1));
  Rng rng(4);
  auto state = s.initial_state(rng);
  const auto before = state.mix.lambda_fixed;
  MixedAcceptance acc;
  s.update_mixture(state, s.block().default_tuning(), acc, rng);
  CHECK(state.mix.lambda_fixed == before);
  std::vector<double> ll(s.size());
  s.loglik(state, ll);
  for (std::size_t n = 0; n < s.size(); ++n) {
    CHECK(ll[n] == doctest::Approx(log_gamma_density(s.durations()[n], state.shapes[0], state.rates[0])).epsilon(1e-12));
  }
}

TEST_CASE("clustering covariates") {
  const auto data = duration_data(gamma_sample(10, 2.0, 1.0, 6), 4);
  auto config = duration_config(2);
  const DurationSampler with_prev(data, config);
  CHECK(with_prev.includes_previous_state());
  CHECK(with_prev.block().layout().cardinalities == std::vector<int>{2, 2});
  config.duration_incl_prev_state = false;
  const DurationSampler without(data, config);
  CHECK_FALSE(without.includes_previous_state());
  CHECK(without.block().layout().cardinalities == std::vector<int>{2});
  CHECK(without.covariates().size() == 1);
  CHECK(without.block().layout().individuals == 4);
}

TEST_CASE("sweeps keep the state valid") {
  const auto a = gamma_sample(60, 1.5, 4.0, 7);
  const auto b = gamma_sample(60, 8.0, 1.0, 8);
  std::vector<double> taus;
  for (std::size_t i = 0; i < a.size(); ++i) {
    taus.push_back(a[i]);
    taus.push_back(b[i]);
  }
  const auto data = duration_data(taus, 3);
  const DurationSampler s(data, duration_config(2));
  Rng rng(9);
  auto state = s.initial_state(rng);
  const auto tuning = s.block().default_tuning();
  DurationAcceptance acc;
  for (int t = 0; t < 300; ++t) {
    s.sweep(state, tuning, acc, rng);
    REQUIRE(s.check_invariants(state).empty());
  }
  const auto probs = s.record_probabilities(state);
  CHECK(probs.size() == s.size() * 2);
  for (std::size_t n = 0; n < s.size(); ++n) CHECK(probs[2 * n] + probs[2 * n + 1] == doctest::Approx(1.0));
  // Kernels separate into a short and a long component.
  const double m0 = state.shapes[0] / state.rates[0], m1 = state.shapes[1] / state.rates[1];
  CHECK(std::min(m0, m1) < 1.0);
  CHECK(std::max(m0, m1) > 5.0);
}

TEST_CASE("a dataset without durations is rejected") {
  ParseOptions o;
  o.num_covariates = 1;
  const auto data = parse_dataset_text("Id,X,Prev,Cur\n1,1,1,2\n", o);
  CHECK_THROWS_AS(DurationSampler(data, duration_config(2)), DataError);
}
