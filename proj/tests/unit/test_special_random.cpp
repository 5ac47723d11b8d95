#include <cmath>
#include <numeric>
#include <set>
#include <vector>

#include <boost/math/distributions/gamma.hpp>
#include <boost/math/special_functions/digamma.hpp>
#include <boost/math/special_functions/polygamma.hpp>
#include <boost/math/special_functions/trigamma.hpp>
#include <doctest.h>

#include "../oracles/partitions.hpp"
#include "bmrmm/random.hpp"
#include "bmrmm/special.hpp"

using namespace bmrmm;

TEST_CASE("polygamma family matches boost") {
  for (double x : {0.05, 0.5, 1.0, 2.5, 10.0, 300.0}) {
    CHECK(digamma(x) == doctest::Approx(boost::math::digamma(x)).epsilon(1e-13));
    CHECK(trigamma(x) == doctest::Approx(boost::math::trigamma(x)).epsilon(1e-13));
    CHECK(polygamma(2, x) == doctest::Approx(boost::math::polygamma(2, x)).epsilon(1e-12));
  }
}

TEST_CASE("log gamma density") {
  const boost::math::gamma_distribution<double> g(3.0, 1.0 / 2.0);
  CHECK(log_gamma_density(1.3, 3.0, 2.0) == doctest::Approx(std::log(boost::math::pdf(g, 1.3))).epsilon(1e-13));
  CHECK(std::isinf(log_gamma_density(0.0, 3.0, 2.0)));
}

TEST_CASE("log Dirichlet density and Dirichlet-multinomial") {
  const std::vector<double> conc{1.0, 1.0, 1.0};
  const std::vector<double> v{0.2, 0.3, 0.5};
  CHECK(log_dirichlet_density(v, conc) == doctest::Approx(std::log(2.0)));
  const std::vector<double> zero{0.0, 0.5, 0.5};
  CHECK(std::isinf(log_dirichlet_density(zero, conc)));

  const std::vector<int> counts{3, 0, 2};
  const std::vector<double> a{0.7, 1.3, 2.0};
  CHECK(log_dirichlet_multinomial(counts, a) ==
        doctest::Approx(static_cast<double>(oracle::log_dirmult({3, 0, 2}, {0.7L, 1.3L, 2.0L}))).epsilon(1e-13));
  // Flat prior on two outcomes: one ordered pair (1,1) has probability 1/6.
  const std::vector<int> one_each{1, 1};
  const std::vector<double> flat{1.0, 1.0};
  CHECK(std::exp(log_dirichlet_multinomial(one_each, flat)) == doctest::Approx(1.0 / 6.0));
}

TEST_CASE("log_sum_exp is stable") {
  const std::vector<double> x{1000.0, 1000.0};
  CHECK(log_sum_exp(x) == doctest::Approx(1000.0 + std::log(2.0)));
  const std::vector<double> y{-INFINITY, -INFINITY};
  CHECK(std::isinf(log_sum_exp(y)));
}

TEST_CASE("Rng is deterministic per seed") {
  Rng a(42), b(42), c(43);
  bool differs = false;
  for (int i = 0; i < 100; ++i) {
    const auto x = a.next_u64();
    CHECK(x == b.next_u64());
    differs = differs || x != c.next_u64();
  }
  CHECK(differs);
}

TEST_CASE("Rng moments") {
  Rng rng(7);
  const int n = 200000;
  double su = 0, sg = 0, sg2 = 0, sb = 0, sl = 0;
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform();
    REQUIRE(u > 0.0);
    REQUIRE(u < 1.0);
    su += u;
    const double g = rng.gamma(3.0, 2.0);
    sg += g;
    sg2 += g * g;
    sb += rng.beta(2.0, 6.0);
    sl += rng.log_gamma_variate(0.5);
  }
  CHECK(su / n == doctest::Approx(0.5).epsilon(0.01));
  CHECK(sg / n == doctest::Approx(1.5).epsilon(0.01));
  CHECK(sg2 / n - (sg / n) * (sg / n) == doctest::Approx(0.75).epsilon(0.02));
  CHECK(sb / n == doctest::Approx(0.25).epsilon(0.01));
  // E log Ga(a,1) = digamma(a)
  CHECK(sl / n == doctest::Approx(boost::math::digamma(0.5)).epsilon(0.01));

  // Tiny shapes stay finite on the log scale.
  for (int i = 0; i < 100; ++i) CHECK(std::isfinite(rng.log_gamma_variate(1e-4)));
}

TEST_CASE("Dirichlet draws lie on the simplex with the right mean") {
  Rng rng(11);
  const std::vector<double> conc{1.0, 2.0, 5.0};
  std::vector<double> out(3), mean(3, 0.0);
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    rng.dirichlet(conc, out);
    REQUIRE(std::accumulate(out.begin(), out.end(), 0.0) == doctest::Approx(1.0));
    for (int k = 0; k < 3; ++k) mean[k] += out[k] / n;
  }
  CHECK(mean[0] == doctest::Approx(0.125).epsilon(0.02));
  CHECK(mean[1] == doctest::Approx(0.25).epsilon(0.02));
  CHECK(mean[2] == doctest::Approx(0.625).epsilon(0.02));

  const std::vector<double> tiny{1e-6, 1e-6};
  for (int i = 0; i < 100; ++i) {
    rng.dirichlet(tiny, std::span<double>(out.data(), 2));
    CHECK(out[0] > 0.0);
    CHECK(out[1] > 0.0);
  }
}

TEST_CASE("categorical frequencies") {
  Rng rng(5);
  const std::vector<double> w{1.0, 0.0, 3.0};
  int hits[3] = {0, 0, 0};
  for (int i = 0; i < 40000; ++i) ++hits[rng.categorical(w)];
  CHECK(hits[1] == 0);
  CHECK(hits[0] / 40000.0 == doctest::Approx(0.25).epsilon(0.03));
}

TEST_CASE("counter_uniform and chain seeds") {
  double s = 0;
  std::set<double> seen;
  for (std::uint64_t i = 0; i < 50000; ++i) {
    const double u = counter_uniform(99, i);
    REQUIRE(u > 0.0);
    REQUIRE(u < 1.0);
    s += u;
    seen.insert(u);
  }
  CHECK(s / 50000 == doctest::Approx(0.5).epsilon(0.01));
  CHECK(seen.size() == 50000);
  CHECK(counter_uniform(1, 3) == counter_uniform(1, 3));
  CHECK(counter_uniform(1, 3) != counter_uniform(2, 3));

  CHECK(derive_chain_seed(77, 0) == 77);
  std::set<std::uint64_t> seeds;
  for (std::uint64_t c = 0; c < 64; ++c) seeds.insert(derive_chain_seed(77, c));
  CHECK(seeds.size() == 64);
}
