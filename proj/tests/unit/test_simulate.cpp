#include <cmath>
#include <vector>

#include <boost/math/distributions/chi_squared.hpp>
#include <doctest.h>
#include <json.hpp>

#include "bmrmm/datamodel.hpp"
#include "bmrmm/errors.hpp"
#include "bmrmm/simulate.hpp"

using namespace bmrmm;

namespace {

// One binary covariate that does not matter, fixed-only law `matrix`.
GenerativeSpec fixed_model(int d, std::vector<double> matrix, int individuals, int length) {
  GenerativeSpec g;
  g.num_states = d;
  g.cardinalities = {2};
  g.individual_level = {false};
  g.num_individuals = individuals;
  g.min_length = g.max_length = length;
  g.trans_covariates = {0};
  g.trans_partition = {{0, 0}};
  // Both covariate levels carry the same law.
  g.trans_fixed = matrix;
  g.trans_fixed.insert(g.trans_fixed.end(), matrix.begin(), matrix.end());
  g.trans_indiv.clear();
  for (int i = 0; i < individuals * d; ++i)
    for (int k = 0; k < d; ++k) g.trans_indiv.push_back(1.0 / d);
  g.trans_pi.assign(static_cast<std::size_t>(individuals * d), 1.0);
  return g;
}

}  // namespace

TEST_CASE("identity law gives constant sequences") {
  const auto g = fixed_model(3, {1, 0, 0, 0, 1, 0, 0, 0, 1}, 5, 12);
  const auto data = simulate_dataset(g);
  CHECK(data.size() == 60);
  CHECK(data.num_sequences() == 5);
  for (const auto& r : data.records) CHECK(r.previous_state == r.current_state);
}

TEST_CASE("transition frequencies follow the law") {
  const std::vector<double> law{0.2, 0.5, 0.3, 0.6, 0.1, 0.3, 1.0 / 3, 1.0 / 3, 1.0 / 3};
  const auto g = fixed_model(3, law, 30, 1000);
  const auto data = simulate_dataset(g);
  std::vector<double> counts(9, 0.0), rows(3, 0.0);
  for (const auto& r : data.records) {
    counts[static_cast<std::size_t>(r.previous_state * 3 + r.current_state)] += 1;
    rows[static_cast<std::size_t>(r.previous_state)] += 1;
  }
  double chi2 = 0.0;
  for (int p = 0; p < 3; ++p)
    for (int c = 0; c < 3; ++c) {
      const double e = rows[p] * law[p * 3 + c];
      chi2 += (counts[p * 3 + c] - e) * (counts[p * 3 + c] - e) / e;
      CHECK(counts[p * 3 + c] / rows[p] == doctest::Approx(law[p * 3 + c]).epsilon(0.06));
    }
  const boost::math::chi_squared dist(6.0);
  CHECK(boost::math::cdf(boost::math::complement(dist, chi2)) > 1e-4);

  std::vector<int> levels{1};
  const auto row = true_transition_row(g, 0, levels, 1);
  CHECK(row[0] == doctest::Approx(0.6));
}

TEST_CASE("true transition rows mix the two components") {
  auto g = fixed_model(2, {0.1, 0.9, 0.5, 0.5}, 1, 5);
  g.trans_indiv = {0.5, 0.5, 0.5, 0.5};
  g.trans_pi = {0.4, 0.4};
  std::vector<int> levels{0};
  const auto row = true_transition_row(g, 0, levels, 0);
  CHECK(row[0] == doctest::Approx(0.34));
  CHECK(row[1] == doctest::Approx(0.66));
}

TEST_CASE("inconsistent specs are rejected") {
  auto g = fixed_model(2, {0.1, 0.9, 0.5, 0.5}, 1, 5);
  g.trans_fixed[1] = 0.8;
  CHECK_THROWS_AS(simulate_dataset(g), UsageError);
  g = fixed_model(2, {0.1, 0.9, 0.5, 0.5}, 1, 5);
  g.trans_partition = {{0, 2}};
  CHECK_THROWS_AS(simulate_dataset(g), UsageError);
  g = fixed_model(2, {0.1, 0.9, 0.5, 0.5}, 1, 5);
  g.min_length = 6;
  CHECK_THROWS_AS(simulate_dataset(g), UsageError);
}

TEST_CASE("demo corpora") {
  CHECK(parse_demo_kind("foxp2") == DemoKind::Foxp2Like);
  CHECK(parse_demo_kind("asthma-like") == DemoKind::AsthmaLike);
  CHECK_THROWS_AS(parse_demo_kind("mice"), UsageError);
  CHECK(parse_demo_kind(to_string(DemoKind::AsthmaLike)) == DemoKind::AsthmaLike);

  const auto a = make_demo_corpus(DemoKind::Foxp2Like, 3);
  const auto b = make_demo_corpus(DemoKind::Foxp2Like, 3);
  const auto c = make_demo_corpus(DemoKind::Foxp2Like, 4);
  CHECK(a.data == b.data);
  CHECK_FALSE(a.data == c.data);
  CHECK(a.data.num_states == 4);
  CHECK(a.data.covariate_cardinalities == std::vector<int>{2, 3});
  CHECK(a.data.num_individuals() == 25);
  CHECK(a.data.num_sequences() == 50);
  CHECK(a.data.has_durations);
  for (const auto& r : a.data.records) CHECK(r.duration > 0.0);

  const auto asthma = make_demo_corpus(DemoKind::AsthmaLike, 3);
  CHECK(asthma.data.num_states == 3);
  CHECK(asthma.data.covariate_cardinalities == std::vector<int>{2, 2, 2});
  CHECK(asthma.data.num_individuals() == 150);

  // Genotype is fixed per individual.
  std::vector<int> genotype(static_cast<std::size_t>(a.data.num_individuals()), -1);
  for (const auto& r : a.data.records) {
    auto& g = genotype[static_cast<std::size_t>(r.individual)];
    if (g < 0) g = r.covariates[0];
    CHECK(g == r.covariates[0]);
  }

  const auto truth = nlohmann::json::parse(ground_truth_json(a.spec));
  CHECK(truth.at("durations").at("shapes").size() == 2);
  CHECK(truth.at("num_states") == 4);
}
