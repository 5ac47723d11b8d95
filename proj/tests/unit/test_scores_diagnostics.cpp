#include <algorithm>
#include <cmath>

#include <doctest.h>

#include "../oracles/scores.hpp"
#include "bmrmm/diagnostics.hpp"
#include "bmrmm/errors.hpp"
#include "bmrmm/model_selection.hpp"
#include "bmrmm/random.hpp"
#include "bmrmm/simulate.hpp"
#include "bmrmm/summaries.hpp"

using namespace bmrmm;

TEST_CASE("LPML and WAIC on small matrices") {
  const LoglikMatrix one{{-2.0}};
  CHECK(lpml(one) == doctest::Approx(-2.0));
  CHECK(waic(one) == doctest::Approx(4.0));

  const LoglikMatrix two{{-1.0}, {-3.0}};
  CHECK(lpml(two) == doctest::Approx(-std::log((std::exp(1.0) + std::exp(3.0)) / 2)));
  const auto w = waic_parts(two);
  CHECK(w.lppd == doctest::Approx(std::log((std::exp(-1.0) + std::exp(-3.0)) / 2)));
  CHECK(w.p_waic == doctest::Approx(2.0));
  CHECK(w.waic == doctest::Approx(-2.0 * (w.lppd - w.p_waic)));
}

TEST_CASE("scores agree with the long double oracle and ignore draw order") {
  Rng rng(4);
  LoglikMatrix ll(200, std::vector<double>(50));
  for (auto& row : ll)
    for (double& v : row) v = -700.0 * rng.uniform() - 1.0;
  CHECK(lpml(ll) == doctest::Approx(static_cast<double>(oracle::lpml(ll))).epsilon(1e-12));
  CHECK(waic(ll) == doctest::Approx(static_cast<double>(oracle::waic(ll).waic)).epsilon(1e-12));
  auto reversed = ll;
  std::reverse(reversed.begin(), reversed.end());
  CHECK(lpml(reversed) == doctest::Approx(lpml(ll)).epsilon(1e-13));
  CHECK(waic(reversed) == doctest::Approx(waic(ll)).epsilon(1e-13));
}

TEST_CASE("model selection needs a duration mixture") {
  const auto corpus = make_demo_corpus(DemoKind::AsthmaLike, 3, {10, 1, 5, 10});
  ModelConfig c;
  c.num_covariates = 3;
  c.simsize = 10;
  const auto s = fit(corpus.data, c);
  CHECK_THROWS_AS(model_selection_scores(s), UsageError);
  c.duration = DurationSpec::gamma_mixture(2);
  const auto g = fit(corpus.data, c);
  const auto scores = model_selection_scores(g);
  CHECK(scores.lpml == doctest::Approx(lpml(g.loglik)));
  CHECK(scores.waic == doctest::Approx(waic(g.loglik)));
}

TEST_CASE("autocorrelation") {
  std::vector<double> alt;
  for (int i = 0; i < 100; ++i) alt.push_back(i % 2 ? 1.0 : -1.0);
  const auto r = acf(alt, 3);
  REQUIRE(r.size() == 4);
  CHECK(r[0] == doctest::Approx(1.0));
  CHECK(r[1] == doctest::Approx(-0.99));
  CHECK(r[2] == doctest::Approx(0.98));

  Rng rng(5);
  std::vector<double> noise(20000), affine(20000);
  for (std::size_t i = 0; i < noise.size(); ++i) {
    noise[i] = rng.normal();
    affine[i] = 3.0 * noise[i] - 7.0;
  }
  const auto rn = acf(noise);
  CHECK(rn.size() == 51);
  CHECK(std::abs(rn[1]) < 0.05);
  const auto ra = acf(affine);
  for (std::size_t k = 0; k < rn.size(); ++k) CHECK(ra[k] == doctest::Approx(rn[k]).epsilon(1e-9));

  CHECK_THROWS_AS(acf(std::vector<double>(5, 1.0), 2), NumericalError);
  CHECK(acf(std::vector<double>{1.0, 2.0, 4.0}).size() == 3);
}

TEST_CASE("traces read the stored draws") {
  const auto corpus = make_demo_corpus(DemoKind::Foxp2Like, 9, {4, 1, 20, 30});
  ModelConfig c;
  c.num_covariates = 2;
  c.simsize = 30;
  c.duration = DurationSpec::gamma_mixture(2);
  const auto s = fit(corpus.data, c);
  const auto shapes = trace(s, TraceSelector::shape(2));
  const auto rates = trace(s, TraceSelector::rate(1));
  REQUIRE(shapes.size() == s.kept());
  for (std::size_t t = 0; t < s.kept(); ++t) {
    CHECK(shapes[t] == s.dur_draws[t].shapes[1]);
    CHECK(rates[t] == s.dur_draws[t].rates[0]);
  }
  // Transition traces average to the summary mean.
  const auto tr = trace(s, TraceSelector::transition({2, 3}, 1, 2));
  const auto summary = transition_posterior_summary(s);
  double m = 0.0;
  for (double v : tr) m += v / static_cast<double>(tr.size());
  const int combo = 1 + 2 * 2;  // levels (2, 3), first covariate fastest
  CHECK(m == doctest::Approx(summary.mean[static_cast<std::size_t>(combo * 16 + 0 * 4 + 1)]));
  CHECK(TraceSelector::shape(2).name() != TraceSelector::rate(2).name());
  CHECK_THROWS(trace(s, TraceSelector::shape(5)));
  CHECK_THROWS(trace(s, TraceSelector::transition({3, 1}, 1, 1)));
}
