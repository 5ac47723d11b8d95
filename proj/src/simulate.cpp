#include "bmrmm/simulate.hpp"

#include <cmath>

#include <json.hpp>

#include "bmrmm/errors.hpp"
#include "bmrmm/random.hpp"

namespace bmrmm {

namespace {

int radix_size(const std::vector<int>& cards) {
  int n = 1;
  for (int c : cards) n *= c;
  return n;
}

void check_simplex(std::span<const double> v, std::size_t width, const char* what) {
  if (width == 0 || v.size() % width != 0) throw UsageError(std::string(what) + ": wrong size");
  for (std::size_t b = 0; b < v.size(); b += width) {
    double total = 0.0;
    for (std::size_t k = 0; k < width; ++k) {
      if (!(v[b + k] >= 0.0)) throw UsageError(std::string(what) + ": negative entry");
      total += v[b + k];
    }
    if (std::abs(total - 1.0) > 1e-9) throw UsageError(std::string(what) + ": vector does not sum to 1");
  }
}

std::vector<int> trans_cards(const GenerativeSpec& s) {
  std::vector<int> c;
  for (int j : s.trans_covariates) c.push_back(s.cardinalities[static_cast<std::size_t>(j)]);
  return c;
}

std::vector<int> dur_cards(const GenerativeSpec& s) {
  std::vector<int> c;
  for (int j : s.dur_covariates) c.push_back(s.cardinalities[static_cast<std::size_t>(j)]);
  if (s.dur_prev_state) c.push_back(s.num_states);
  return c;
}

int label_index(const std::vector<std::vector<int>>& partition, std::span<const int> levels,
                const std::vector<int>& cards) {
  int lc = 0, stride = 1;
  for (std::size_t j = 0; j < levels.size(); ++j) {
    lc += partition[j][static_cast<std::size_t>(levels[j])] * stride;
    stride *= cards[j];
  }
  return lc;
}

std::size_t draw_index(Rng& rng, std::span<const double> p) {
  double u = rng.uniform();
  for (std::size_t k = 0; k + 1 < p.size(); ++k) {
    if (u < p[k]) return k;
    u -= p[k];
  }
  return p.size() - 1;
}

std::vector<double> dur_weights(const GenerativeSpec& s, int individual, std::span<const int> covariates, int previous) {
  const auto K = static_cast<std::size_t>(s.components());
  std::vector<int> levels;
  for (int j : s.dur_covariates) levels.push_back(covariates[static_cast<std::size_t>(j)]);
  if (s.dur_prev_state) levels.push_back(previous);
  const auto lc = static_cast<std::size_t>(label_index(s.dur_partition, levels, dur_cards(s)));
  const auto i = static_cast<std::size_t>(individual);
  const double p = s.dur_pi[i];
  std::vector<double> w(K);
  for (std::size_t k = 0; k < K; ++k) w[k] = p * s.dur_fixed[lc * K + k] + (1.0 - p) * s.dur_indiv[i * K + k];
  return w;
}

}  // namespace

void GenerativeSpec::validate() const {
  if (num_states < 1) throw UsageError("num_states must be positive");
  const int p = static_cast<int>(cardinalities.size());
  if (p < 1 || p > kMaxCovariates) throw UsageError("between 1 and 5 covariates are required");
  for (int c : cardinalities) {
    if (c < 1) throw UsageError("covariate cardinalities must be positive");
  }
  if (num_individuals < 1 || sequences_per_individual < 1) throw UsageError("need at least one sequence");
  if (min_length < 1 || max_length < min_length) throw UsageError("invalid sequence length range");
  if (static_cast<int>(individual_level.size()) != p) throw UsageError("individual_level needs one flag per covariate");
  if (!initial.empty()) check_simplex(initial, static_cast<std::size_t>(num_states), "initial");
  auto check_partition = [&](const std::vector<std::vector<int>>& part, const std::vector<int>& cards, const char* what) {
    if (part.size() != cards.size()) throw UsageError(std::string(what) + ": one partition per covariate required");
    for (std::size_t j = 0; j < cards.size(); ++j) {
      if (static_cast<int>(part[j].size()) != cards[j]) throw UsageError(std::string(what) + ": partition size");
      for (int l : part[j]) {
        if (l < 0 || l >= cards[j]) throw UsageError(std::string(what) + ": label out of range");
      }
    }
  };
  for (int j : trans_covariates) {
    if (j < 0 || j >= p) throw UsageError("trans covariate index out of range");
  }
  const auto tc = trans_cards(*this);
  check_partition(trans_partition, tc, "trans_partition");
  const auto d = static_cast<std::size_t>(num_states);
  const auto n = static_cast<std::size_t>(num_individuals);
  check_simplex(trans_fixed, d, "trans_fixed");
  if (trans_fixed.size() != static_cast<std::size_t>(radix_size(tc)) * d * d) throw UsageError("trans_fixed: wrong size");
  check_simplex(trans_indiv, d, "trans_indiv");
  if (trans_indiv.size() != n * d * d) throw UsageError("trans_indiv: wrong size");
  if (trans_pi.size() != n * d) throw UsageError("trans_pi: wrong size");
  for (double v : trans_pi) {
    if (!(v >= 0.0 && v <= 1.0)) throw UsageError("trans_pi entries must lie in [0,1]");
  }
  if (!durations) return;
  const auto K = static_cast<std::size_t>(components());
  if (K < 1 || rates.size() != K) throw UsageError("shapes and rates must have the same positive length");
  for (std::size_t k = 0; k < K; ++k) {
    if (!(shapes[k] > 0.0) || !(rates[k] > 0.0)) throw UsageError("kernel parameters must be positive");
  }
  for (int j : dur_covariates) {
    if (j < 0 || j >= p) throw UsageError("duration covariate index out of range");
  }
  const auto dc = dur_cards(*this);
  check_partition(dur_partition, dc, "dur_partition");
  check_simplex(dur_fixed, K, "dur_fixed");
  if (dur_fixed.size() != static_cast<std::size_t>(radix_size(dc)) * K) throw UsageError("dur_fixed: wrong size");
  check_simplex(dur_indiv, K, "dur_indiv");
  if (dur_indiv.size() != n * K) throw UsageError("dur_indiv: wrong size");
  if (dur_pi.size() != n) throw UsageError("dur_pi: wrong size");
}

std::vector<double> true_transition_row(const GenerativeSpec& s, int individual, std::span<const int> covariates,
                                        int previous) {
  const auto d = static_cast<std::size_t>(s.num_states);
  std::vector<int> levels;
  for (int j : s.trans_covariates) levels.push_back(covariates[static_cast<std::size_t>(j)]);
  const auto lc = static_cast<std::size_t>(label_index(s.trans_partition, levels, trans_cards(s)));
  const auto i = static_cast<std::size_t>(individual);
  const auto r = static_cast<std::size_t>(previous);
  const double p = s.trans_pi[i * d + r];
  std::vector<double> row(d);
  for (std::size_t y = 0; y < d; ++y) {
    row[y] = p * s.trans_fixed[(lc * d + r) * d + y] + (1.0 - p) * s.trans_indiv[(i * d + r) * d + y];
  }
  return row;
}

SequenceDataset simulate_dataset(const GenerativeSpec& s) {
  s.validate();
  const auto p = s.cardinalities.size();
  SequenceDataset data;
  data.num_states = s.num_states;
  data.num_covariates = static_cast<int>(p);
  data.covariate_cardinalities = s.cardinalities;
  data.has_durations = s.durations;
  for (int i = 0; i < s.num_individuals; ++i) data.individual_ids.push_back(i + 1);
  for (int k = 0; k < s.num_states; ++k) {
    data.state_labels.push_back(static_cast<std::size_t>(k) < s.state_labels.size() ? s.state_labels[static_cast<std::size_t>(k)]
                                                                                   : std::to_string(k + 1));
  }
  for (std::size_t j = 0; j < p; ++j) {
    data.covariate_names.push_back(j < s.covariate_names.size() ? s.covariate_names[j] : "Covariate" + std::to_string(j + 1));
    std::vector<std::string> labels;
    for (int l = 0; l < s.cardinalities[j]; ++l) {
      const bool named = j < s.covariate_labels.size() && static_cast<std::size_t>(l) < s.covariate_labels[j].size();
      labels.push_back(named ? s.covariate_labels[j][static_cast<std::size_t>(l)] : std::to_string(l + 1));
    }
    data.covariate_labels.push_back(std::move(labels));
  }

  std::vector<double> initial = s.initial;
  if (initial.empty()) initial.assign(static_cast<std::size_t>(s.num_states), 1.0 / s.num_states);

  int sequence = 0;
  for (int i = 0; i < s.num_individuals; ++i) {
    // Individual-level covariates cycle through their levels in a crossed design.
    std::array<int, kMaxCovariates> indiv_levels{};
    int stride = 1;
    for (std::size_t j = 0; j < p; ++j) {
      if (!s.individual_level[j]) continue;
      indiv_levels[j] = (i / stride) % s.cardinalities[j];
      stride *= s.cardinalities[j];
    }
    for (int q = 0; q < s.sequences_per_individual; ++q, ++sequence) {
      Rng rng(splitmix64(s.seed) ^ splitmix64(static_cast<std::uint64_t>(sequence) + 1));
      std::array<int, kMaxCovariates> cov = indiv_levels;
      for (std::size_t j = 0; j < p; ++j) {
        if (!s.individual_level[j]) {
          cov[j] = static_cast<int>(rng.uniform() * s.cardinalities[j]);
        }
      }
      const int span = s.max_length - s.min_length + 1;
      const int length = s.min_length + static_cast<int>(rng.uniform() * span);
      int state = static_cast<int>(draw_index(rng, initial));
      for (int t = 0; t < length; ++t) {
        TransitionRecord rec;
        rec.sequence = sequence;
        rec.individual = i;
        rec.covariates = cov;
        rec.previous_state = state;
        const auto row = true_transition_row(s, i, std::span<const int>(cov.data(), p), state);
        rec.current_state = static_cast<int>(draw_index(rng, row));
        if (s.durations) {
          const auto w = dur_weights(s, i, std::span<const int>(cov.data(), p), state);
          const auto k = draw_index(rng, w);
          double tau = 0.0;
          while (!(tau > 0.0)) tau = rng.gamma(s.shapes[k], s.rates[k]);
          rec.duration = tau;
        }
        data.records.push_back(rec);
        state = rec.current_state;
      }
    }
  }
  data.validate();
  return data;
}

DemoKind parse_demo_kind(const std::string& text) {
  if (text == "foxp2" || text == "foxp2-like") return DemoKind::Foxp2Like;
  if (text == "asthma" || text == "asthma-like") return DemoKind::AsthmaLike;
  throw UsageError("unknown demo corpus '" + text + "' (expected foxp2-like or asthma-like)");
}

std::string to_string(DemoKind kind) { return kind == DemoKind::Foxp2Like ? "foxp2-like" : "asthma-like"; }

DemoSize default_demo_size(DemoKind kind) {
  if (kind == DemoKind::Foxp2Like) return {25, 2, 80, 120};
  return {150, 1, 5, 25};
}

namespace {

// Individual-level vectors scattered around a population vector.
void individual_vectors(Rng& rng, std::span<const double> population, std::size_t width, double concentration,
                        int individuals, std::vector<double>& out) {
  std::vector<double> conc(width), draw(width);
  for (int i = 0; i < individuals; ++i) {
    for (std::size_t b = 0; b < population.size(); b += width) {
      for (std::size_t k = 0; k < width; ++k) conc[k] = concentration * population[b + k];
      rng.dirichlet(conc, draw);
      out.insert(out.end(), draw.begin(), draw.end());
    }
  }
}

void fill_block(std::vector<double>& field, std::size_t combos, std::size_t rows, std::size_t width,
                const std::vector<std::pair<std::size_t, std::vector<double>>>& planted) {
  field.assign(combos * rows * width, 1.0 / static_cast<double>(width));
  for (const auto& [combo, values] : planted) {
    std::copy(values.begin(), values.end(), field.begin() + static_cast<std::ptrdiff_t>(combo * rows * width));
  }
}

}  // namespace

DemoCorpus make_demo_corpus(DemoKind kind, std::uint64_t seed, DemoSize size) {
  const DemoSize def = default_demo_size(kind);
  if (size.individuals <= 0) size.individuals = def.individuals;
  if (size.sequences_per_individual <= 0) size.sequences_per_individual = def.sequences_per_individual;
  if (size.min_length <= 0) size.min_length = def.min_length;
  if (size.max_length <= 0) size.max_length = std::max(def.max_length, size.min_length);

  GenerativeSpec s;
  s.seed = seed;
  s.num_individuals = size.individuals;
  s.sequences_per_individual = size.sequences_per_individual;
  s.min_length = size.min_length;
  s.max_length = size.max_length;
  s.durations = true;
  Rng rng(splitmix64(seed ^ 0xD1B54A32D192ED03ULL));
  const auto n = static_cast<std::size_t>(size.individuals);

  if (kind == DemoKind::Foxp2Like) {
    s.num_states = 4;
    s.state_labels = {"d", "m", "s", "u"};
    s.cardinalities = {2, 3};
    s.covariate_names = {"Genotype", "Context"};
    s.covariate_labels = {{"F", "W"}, {"U", "L", "A"}};
    s.individual_level = {true, false};
    s.trans_covariates = {0, 1};
    s.trans_partition = {{0, 0}, {0, 1, 1}};
    const std::vector<double> persist = {0.55, 0.15, 0.15, 0.15, 0.15, 0.55, 0.15, 0.15,
                                         0.15, 0.15, 0.55, 0.15, 0.15, 0.15, 0.15, 0.55};
    const std::vector<double> cycle = {0.10, 0.60, 0.15, 0.15, 0.15, 0.10, 0.60, 0.15,
                                       0.15, 0.15, 0.10, 0.60, 0.60, 0.15, 0.15, 0.10};
    // Label combination = genotype label + 2 * context label.
    fill_block(s.trans_fixed, 6, 4, 4, {{0, persist}, {2, cycle}});
    const std::vector<double> mean_row = {0.25, 0.25, 0.25, 0.25};
    std::vector<double> pop;
    for (int r = 0; r < 4; ++r) pop.insert(pop.end(), mean_row.begin(), mean_row.end());
    individual_vectors(rng, pop, 4, 20.0, size.individuals, s.trans_indiv);
    s.trans_pi.assign(n * 4, 0.85);

    s.shapes = {2.0, 6.0};
    s.rates = {8.0, 4.0};
    s.dur_covariates = {0, 1};
    s.dur_prev_state = true;
    s.dur_partition = {{0, 1}, {0, 0, 0}, {0, 0, 0, 0}};
    fill_block(s.dur_fixed, 2 * 3 * 4, 1, 2, {{0, {0.8, 0.2}}, {1, {0.25, 0.75}}});
    individual_vectors(rng, std::vector<double>{0.5, 0.5}, 2, 20.0, size.individuals, s.dur_indiv);
    s.dur_pi.assign(n, 0.85);
  } else {
    s.num_states = 3;
    s.state_labels = {"1", "2", "3"};
    s.cardinalities = {2, 2, 2};
    s.covariate_names = {"Severity", "BMI", "Sex"};
    s.covariate_labels = {{"Mild-Moderate", "Severe"}, {"BMI<25", "BMI>=25"}, {"Women", "Men"}};
    s.individual_level = {true, true, true};
    s.trans_covariates = {0, 1, 2};
    s.trans_partition = {{0, 1}, {0, 0}, {0, 0}};
    const std::vector<double> mild = {0.70, 0.20, 0.10, 0.45, 0.40, 0.15, 0.35, 0.35, 0.30};
    const std::vector<double> severe = {0.30, 0.30, 0.40, 0.10, 0.40, 0.50, 0.05, 0.25, 0.70};
    // Label combination = severity label (other labels are 0).
    fill_block(s.trans_fixed, 8, 3, 3, {{0, mild}, {1, severe}});
    std::vector<double> pop(9, 1.0 / 3.0);
    individual_vectors(rng, pop, 3, 20.0, size.individuals, s.trans_indiv);
    s.trans_pi.assign(n * 3, 0.85);

    s.shapes = {1.5, 5.0};
    s.rates = {6.0, 2.0};
    s.dur_covariates = {0, 1, 2};
    s.dur_prev_state = true;
    s.dur_partition = {{0, 0}, {0, 0}, {0, 0}, {0, 1, 1}};
    // Previous-state label is the last digit of the radix (2,2,2,3): stride 8.
    fill_block(s.dur_fixed, 2 * 2 * 2 * 3, 1, 2, {{0, {0.8, 0.2}}, {8, {0.2, 0.8}}});
    individual_vectors(rng, std::vector<double>{0.5, 0.5}, 2, 20.0, size.individuals, s.dur_indiv);
    s.dur_pi.assign(n, 0.85);
  }
  DemoCorpus out{s, simulate_dataset(s)};
  return out;
}

std::string ground_truth_json(const GenerativeSpec& s) {
  nlohmann::json j;
  j["num_states"] = s.num_states;
  j["state_labels"] = s.state_labels;
  j["cardinalities"] = s.cardinalities;
  j["covariate_names"] = s.covariate_names;
  j["covariate_labels"] = s.covariate_labels;
  j["num_individuals"] = s.num_individuals;
  j["sequences_per_individual"] = s.sequences_per_individual;
  j["length_range"] = {s.min_length, s.max_length};
  std::vector<int> indiv_level(s.individual_level.begin(), s.individual_level.end());
  j["individual_level"] = indiv_level;
  j["initial"] = s.initial;
  j["seed"] = s.seed;
  j["transitions"] = {{"covariates", s.trans_covariates},
                      {"partition", s.trans_partition},
                      {"lambda_fixed", s.trans_fixed},
                      {"lambda_indiv", s.trans_indiv},
                      {"pi", s.trans_pi}};
  if (s.durations) {
    j["durations"] = {{"shapes", s.shapes},       {"rates", s.rates},
                      {"covariates", s.dur_covariates}, {"previous_state", s.dur_prev_state},
                      {"partition", s.dur_partition}, {"lambda_fixed", s.dur_fixed},
                      {"lambda_indiv", s.dur_indiv},  {"pi", s.dur_pi}};
  }
  return j.dump(2) + "\n";
}

}  // namespace bmrmm
