#include "bmrmm/mixed_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "bmrmm/errors.hpp"
#include "bmrmm/special.hpp"

namespace bmrmm {

int MixedLayout::combinations() const {
  int n = 1;
  for (int c : cardinalities) n *= c;
  return n;
}

std::size_t MixedLayout::fixed_size() const {
  return static_cast<std::size_t>(combinations()) * static_cast<std::size_t>(rows) * static_cast<std::size_t>(outcomes);
}

std::size_t MixedLayout::indiv_size() const {
  return static_cast<std::size_t>(individuals) * static_cast<std::size_t>(rows) * static_cast<std::size_t>(outcomes);
}

std::size_t MixedLayout::fixed_index(int combination, int row, int outcome) const {
  return (static_cast<std::size_t>(combination) * static_cast<std::size_t>(rows) + static_cast<std::size_t>(row)) *
             static_cast<std::size_t>(outcomes) +
         static_cast<std::size_t>(outcome);
}

std::size_t MixedLayout::indiv_index(int individual, int row, int outcome) const {
  return (static_cast<std::size_t>(individual) * static_cast<std::size_t>(rows) + static_cast<std::size_t>(row)) *
             static_cast<std::size_t>(outcomes) +
         static_cast<std::size_t>(outcome);
}

double log_partition_prior(std::span<const int> labels, double alpha) {
  const auto d = static_cast<double>(labels.size());
  std::vector<int> sizes(labels.size(), 0);
  for (int l : labels) ++sizes[static_cast<std::size_t>(l)];
  double out = std::lgamma(d * alpha) - std::lgamma(d * alpha + d);
  int k = 0;
  for (int m : sizes) {
    if (m == 0) continue;
    ++k;
    out += std::lgamma(alpha + m) - std::lgamma(alpha);
  }
  // d! / (d - k)! labelings share one partition.
  out += std::lgamma(d + 1.0) - std::lgamma(d - k + 1.0);
  return out;
}

int canonicalize_labels(std::span<int> labels) {
  std::vector<int> remap(labels.size(), -1);
  int next = 0;
  for (int& l : labels) {
    auto& slot = remap[static_cast<std::size_t>(l)];
    if (slot < 0) slot = next++;
    l = slot;
  }
  return next;
}

int count_clusters(std::span<const int> labels) {
  std::vector<bool> seen(labels.size(), false);
  int k = 0;
  for (int l : labels) {
    if (!seen[static_cast<std::size_t>(l)]) {
      seen[static_cast<std::size_t>(l)] = true;
      ++k;
    }
  }
  return k;
}

MixedSampler::MixedSampler(MixedLayout layout, HierarchyPriors priors, EffectFlags flags)
    : layout_(std::move(layout)), priors_(std::move(priors)), flags_(flags) {
  if (layout_.outcomes < 1 || layout_.rows < 1) throw UsageError("mixed model needs at least one row and outcome");
  if (priors_.top_mean.empty()) {
    top_mean_.assign(static_cast<std::size_t>(layout_.outcomes), 1.0 / layout_.outcomes);
  } else {
    if (static_cast<int>(priors_.top_mean.size()) != layout_.outcomes) {
      throw UsageError("top_mean length must equal the number of outcomes (" + std::to_string(layout_.outcomes) + ")");
    }
    top_mean_ = priors_.top_mean;
  }
  strides_.resize(layout_.cardinalities.size());
  int stride = 1;
  for (std::size_t j = 0; j < layout_.cardinalities.size(); ++j) {
    strides_[j] = stride;
    stride *= layout_.cardinalities[j];
  }
  const int L = layout_.combinations();
  level_of_.resize(static_cast<std::size_t>(L));
  for (int c = 0; c < L; ++c) {
    int rest = c;
    level_of_[static_cast<std::size_t>(c)].resize(layout_.cardinalities.size());
    for (std::size_t j = 0; j < layout_.cardinalities.size(); ++j) {
      level_of_[static_cast<std::size_t>(c)][j] = rest % layout_.cardinalities[j];
      rest /= layout_.cardinalities[j];
    }
  }
}

MixedTuning MixedSampler::default_tuning() const {
  MixedTuning t;
  t.lambda0_concentration = 100.0 * layout_.outcomes;
  return t;
}

MixedState MixedSampler::initial_state(const MixedObservations& obs, Rng& rng) const {
  const auto rows = static_cast<std::size_t>(layout_.rows);
  const auto outs = static_cast<std::size_t>(layout_.outcomes);
  MixedState s;
  s.labels.resize(layout_.cardinalities.size());
  s.mu.resize(layout_.cardinalities.size());
  for (std::size_t j = 0; j < layout_.cardinalities.size(); ++j) {
    const int d = layout_.cardinalities[j];
    s.labels[j].resize(static_cast<std::size_t>(d));
    for (int l = 0; l < d; ++l) s.labels[j][static_cast<std::size_t>(l)] = flags_.fixed ? l : 0;
    s.mu[j].assign(static_cast<std::size_t>(d), 1.0 / d);
  }

  std::vector<double> by_level(layout_.fixed_size(), 0.0);
  std::vector<double> by_indiv(layout_.indiv_size(), 0.0);
  std::vector<double> by_row(rows * outs, 0.0);
  for (std::size_t n = 0; n < obs.size(); ++n) {
    by_level[layout_.fixed_index(obs.level_combination[n], obs.row[n], obs.outcome[n])] += 1.0;
    by_indiv[layout_.indiv_index(obs.individual[n], obs.row[n], obs.outcome[n])] += 1.0;
    by_row[static_cast<std::size_t>(obs.row[n]) * outs + static_cast<std::size_t>(obs.outcome[n])] += 1.0;
  }
  auto smooth = [outs](std::vector<double>& v) {
    for (std::size_t b = 0; b < v.size(); b += outs) {
      double total = 0.0;
      for (std::size_t k = 0; k < outs; ++k) total += v[b + k] + 1.0;
      for (std::size_t k = 0; k < outs; ++k) v[b + k] = (v[b + k] + 1.0) / total;
    }
  };
  smooth(by_level);
  smooth(by_indiv);
  smooth(by_row);
  // Identity labels make label combinations coincide with level combinations.
  s.lambda_fixed = flags_.fixed ? by_level : std::vector<double>(layout_.fixed_size(), 1.0 / static_cast<double>(outs));
  s.lambda_indiv = by_indiv;
  s.lambda0 = by_row;
  const double pi_start = flags_.fixed && flags_.random ? 0.5 : (flags_.fixed ? 1.0 : 0.0);
  s.pi0.assign(static_cast<std::size_t>(layout_.individuals) * rows, pi_start);
  s.alpha0 = priors_.alpha0.shape / priors_.alpha0.rate;
  s.alpha_indiv = priors_.alpha_indiv.shape / priors_.alpha_indiv.rate;
  s.from_fixed.resize(obs.size());
  for (auto& f : s.from_fixed) {
    if (flags_.fixed && flags_.random) f = rng.uniform() < 0.5 ? 1 : 0;
    else f = flags_.fixed ? 1 : 0;
  }
  return s;
}

std::vector<int> MixedSampler::label_map(const MixedState& state) const {
  const int L = layout_.combinations();
  std::vector<int> out(static_cast<std::size_t>(L));
  for (int c = 0; c < L; ++c) {
    int lc = 0;
    const auto& lv = level_of_[static_cast<std::size_t>(c)];
    for (std::size_t j = 0; j < lv.size(); ++j) lc += state.labels[j][static_cast<std::size_t>(lv[j])] * strides_[j];
    out[static_cast<std::size_t>(c)] = lc;
  }
  return out;
}

std::vector<int> MixedSampler::attached_combinations(const MixedState& state) const {
  std::vector<int> used(layout_.cardinalities.size());
  for (std::size_t j = 0; j < used.size(); ++j) {
    used[j] = *std::max_element(state.labels[j].begin(), state.labels[j].end()) + 1;
  }
  std::vector<int> out;
  const int L = layout_.combinations();
  for (int c = 0; c < L; ++c) {
    const auto& lv = level_of_[static_cast<std::size_t>(c)];
    bool ok = true;
    for (std::size_t j = 0; j < lv.size() && ok; ++j) ok = lv[j] < used[j];
    if (ok) out.push_back(c);
  }
  return out;
}

MixedCounts MixedSampler::count(const MixedState& state, const MixedObservations& obs, ExecPolicy policy) const {
  kernels::CountInputs in;
  in.individual = obs.individual;
  in.row = obs.row;
  in.level_combination = obs.level_combination;
  in.outcome = obs.outcome;
  in.from_fixed = state.from_fixed;
  in.rows = layout_.rows;
  in.outcomes = layout_.outcomes;
  in.level_combinations = layout_.combinations();
  in.individuals = layout_.individuals;
  return kernels::count_allocations(in, policy.exec, policy.threads);
}

void MixedSampler::sample_allocations(MixedState& state, const MixedObservations& obs, std::uint64_t key,
                                      ExecPolicy policy) const {
  if (!(flags_.fixed && flags_.random)) return;
  const std::vector<int> map = label_map(state);
  std::vector<int> label_combination(obs.size());
  for (std::size_t n = 0; n < obs.size(); ++n) {
    label_combination[n] = map[static_cast<std::size_t>(obs.level_combination[n])];
  }
  kernels::AllocationInputs in;
  in.individual = obs.individual;
  in.row = obs.row;
  in.label_combination = label_combination;
  in.outcome = obs.outcome;
  in.lambda_fixed = state.lambda_fixed;
  in.lambda_indiv = state.lambda_indiv;
  in.pi0 = state.pi0;
  in.rows = layout_.rows;
  in.outcomes = layout_.outcomes;
  in.key = key;
  const std::size_t bad = kernels::sample_allocations(in, state.from_fixed, policy.exec, policy.threads);
  if (bad > 0) {
    throw NumericalError("source-indicator normalizer is zero for " + std::to_string(bad) +
                         " observation(s); sampler state is corrupted");
  }
}

void MixedSampler::update_lambda_fixed(MixedState& state, const MixedCounts& counts, Rng& rng) const {
  if (!flags_.fixed) return;
  const auto rows = static_cast<std::size_t>(layout_.rows);
  const auto outs = static_cast<std::size_t>(layout_.outcomes);
  const std::vector<int> map = label_map(state);
  std::vector<double> agg(layout_.fixed_size(), 0.0);
  const int L = layout_.combinations();
  for (int c = 0; c < L; ++c) {
    const std::size_t from = static_cast<std::size_t>(c) * rows * outs;
    const std::size_t to = static_cast<std::size_t>(map[static_cast<std::size_t>(c)]) * rows * outs;
    for (std::size_t k = 0; k < rows * outs; ++k) agg[to + k] += counts.fixed_by_level[from + k];
  }
  std::vector<double> conc(outs);
  for (std::size_t b = 0; b < agg.size(); b += outs) {
    const std::size_t r = (b / outs) % rows;
    for (std::size_t k = 0; k < outs; ++k) conc[k] = state.alpha0 * state.lambda0[r * outs + k] + agg[b + k];
    rng.dirichlet(conc, std::span<double>(state.lambda_fixed).subspan(b, outs));
  }
}

void MixedSampler::update_lambda_indiv(MixedState& state, const MixedCounts& counts, Rng& rng) const {
  if (!flags_.random) return;
  const auto rows = static_cast<std::size_t>(layout_.rows);
  const auto outs = static_cast<std::size_t>(layout_.outcomes);
  std::vector<double> conc(outs);
  for (std::size_t b = 0; b < state.lambda_indiv.size(); b += outs) {
    const std::size_t r = (b / outs) % rows;
    for (std::size_t k = 0; k < outs; ++k) {
      conc[k] = state.alpha_indiv * state.lambda0[r * outs + k] + counts.random_by_indiv[b + k];
    }
    rng.dirichlet(conc, std::span<double>(state.lambda_indiv).subspan(b, outs));
  }
}

void MixedSampler::update_pi(MixedState& state, const MixedCounts& counts, Rng& rng) const {
  if (!(flags_.fixed && flags_.random)) return;
  for (std::size_t c = 0; c < state.pi0.size(); ++c) {
    state.pi0[c] = rng.beta(priors_.mixing.a + counts.fixed_alloc[c], priors_.mixing.b + counts.random_alloc[c]);
  }
}

double MixedSampler::cluster_log_target(const MixedState& state, const MixedCounts& counts, int covariate,
                                        std::span<const int> covariate_labels) const {
  const auto rows = static_cast<std::size_t>(layout_.rows);
  const auto outs = static_cast<std::size_t>(layout_.outcomes);
  const auto cj = static_cast<std::size_t>(covariate);
  const int L = layout_.combinations();
  std::vector<int> agg(layout_.fixed_size(), 0);
  for (int c = 0; c < L; ++c) {
    const auto& lv = level_of_[static_cast<std::size_t>(c)];
    int lc = 0;
    for (std::size_t j = 0; j < lv.size(); ++j) {
      const int label = j == cj ? covariate_labels[static_cast<std::size_t>(lv[j])]
                                : state.labels[j][static_cast<std::size_t>(lv[j])];
      lc += label * strides_[j];
    }
    const std::size_t from = static_cast<std::size_t>(c) * rows * outs;
    const std::size_t to = static_cast<std::size_t>(lc) * rows * outs;
    for (std::size_t k = 0; k < rows * outs; ++k) agg[to + k] += counts.fixed_by_level[from + k];
  }
  std::vector<double> conc(rows * outs);
  for (std::size_t k = 0; k < conc.size(); ++k) conc[k] = state.alpha0 * state.lambda0[k];
  double out = 0.0;
  for (std::size_t b = 0; b < agg.size(); b += outs) {
    const std::size_t r = (b / outs) % rows;
    out += log_dirichlet_multinomial(std::span<const int>(agg).subspan(b, outs),
                                     std::span<const double>(conc).subspan(r * outs, outs));
  }
  return out + log_partition_prior(covariate_labels, priors_.cluster_concentration);
}

double MixedSampler::cluster_move_log_ratio(const MixedState& state, const MixedCounts& counts, int covariate,
                                            int level, int new_label) const {
  const auto& current = state.labels[static_cast<std::size_t>(covariate)];
  std::vector<int> proposed = current;
  proposed[static_cast<std::size_t>(level)] = new_label;
  return cluster_log_target(state, counts, covariate, proposed) -
         cluster_log_target(state, counts, covariate, current);
}

void MixedSampler::update_cluster_labels(MixedState& state, const MixedCounts& counts, int covariate, Rng& rng,
                                         AcceptanceCounter* acceptance) const {
  if (!flags_.fixed) return;
  const auto cj = static_cast<std::size_t>(covariate);
  const int d = layout_.cardinalities[cj];
  if (d < 2) return;
  auto& labels = state.labels[cj];
  std::vector<int> others;
  for (int level = 0; level < d; ++level) {
    others.clear();
    for (int m = 0; m < d; ++m) {
      if (m != level) others.push_back(labels[static_cast<std::size_t>(m)]);
    }
    std::sort(others.begin(), others.end());
    others.erase(std::unique(others.begin(), others.end()), others.end());
    int fresh = 0;
    while (std::binary_search(others.begin(), others.end(), fresh)) ++fresh;
    // Candidates: join any block of the other levels, or become a singleton.
    // The candidate set depends only on the other levels, so the proposal is symmetric.
    const auto n_cand = others.size() + 1;
    const auto pick = static_cast<std::size_t>(rng.uniform() * static_cast<double>(n_cand));
    const int candidate = pick < others.size() ? others[pick] : fresh;
    const int current = labels[static_cast<std::size_t>(level)];
    const bool current_singleton = !std::binary_search(others.begin(), others.end(), current);
    const bool same_partition = candidate == current || (current_singleton && candidate == fresh);
    if (same_partition) {
      labels[static_cast<std::size_t>(level)] = candidate;
      if (acceptance) acceptance->record(true);
      continue;
    }
    const double log_ratio = cluster_move_log_ratio(state, counts, covariate, level, candidate);
    const bool accept = std::log(rng.uniform()) < log_ratio;
    if (accept) labels[static_cast<std::size_t>(level)] = candidate;
    if (acceptance) acceptance->record(accept);
  }
  canonicalize_labels(labels);
  std::vector<double> conc(static_cast<std::size_t>(d), priors_.cluster_concentration);
  for (int l : labels) conc[static_cast<std::size_t>(l)] += 1.0;
  state.mu[cj].resize(static_cast<std::size_t>(d));
  rng.dirichlet(conc, state.mu[cj]);
}

std::vector<MixedSampler::RowStats> MixedSampler::attached_stats(const MixedState& state, bool fixed_side) const {
  const auto rows = static_cast<std::size_t>(layout_.rows);
  const auto outs = static_cast<std::size_t>(layout_.outcomes);
  std::vector<RowStats> stats(rows);
  for (auto& s : stats) s.sum_log.assign(outs, 0.0);
  auto add = [&](const std::vector<double>& field, std::size_t base) {
    for (std::size_t r = 0; r < rows; ++r) {
      stats[r].count += 1.0;
      for (std::size_t k = 0; k < outs; ++k) stats[r].sum_log[k] += std::log(field[base + r * outs + k]);
    }
  };
  if (fixed_side) {
    if (!flags_.fixed) return stats;
    for (int c : attached_combinations(state)) add(state.lambda_fixed, static_cast<std::size_t>(c) * rows * outs);
  } else {
    if (!flags_.random) return stats;
    for (int i = 0; i < layout_.individuals; ++i) add(state.lambda_indiv, static_cast<std::size_t>(i) * rows * outs);
  }
  return stats;
}

double MixedSampler::attached_log_density(const RowStats& stats, double alpha, std::span<const double> mean) const {
  if (stats.count == 0.0) return 0.0;
  double norm = std::lgamma(alpha);
  double kernel = 0.0;
  for (std::size_t k = 0; k < mean.size(); ++k) {
    const double a = alpha * mean[k];
    norm -= std::lgamma(a);
    kernel += (a - 1.0) * stats.sum_log[k];
  }
  return stats.count * norm + kernel;
}

double MixedSampler::lambda0_log_target(const MixedState& state, int row, std::span<const double> candidate) const {
  const auto outs = static_cast<std::size_t>(layout_.outcomes);
  std::vector<double> prior(outs);
  for (std::size_t k = 0; k < outs; ++k) prior[k] = priors_.top_concentration * top_mean_[k];
  double out = log_dirichlet_density(candidate, prior);
  if (!std::isfinite(out)) return out;
  const auto fixed = attached_stats(state, true);
  const auto indiv = attached_stats(state, false);
  out += attached_log_density(fixed[static_cast<std::size_t>(row)], state.alpha0, candidate);
  out += attached_log_density(indiv[static_cast<std::size_t>(row)], state.alpha_indiv, candidate);
  return out;
}

double MixedSampler::lambda0_log_ratio(const MixedState& state, int row, std::span<const double> proposal,
                                       double c) const {
  const auto outs = static_cast<std::size_t>(layout_.outcomes);
  const std::span<const double> current(state.lambda0.data() + static_cast<std::size_t>(row) * outs, outs);
  std::vector<double> fwd(outs), rev(outs);
  for (std::size_t k = 0; k < outs; ++k) {
    fwd[k] = c * current[k];
    rev[k] = c * proposal[k];
  }
  return lambda0_log_target(state, row, proposal) - lambda0_log_target(state, row, current) +
         log_dirichlet_density(current, rev) - log_dirichlet_density(proposal, fwd);
}

void MixedSampler::update_lambda0(MixedState& state, const MixedTuning& tuning, Rng& rng,
                                  AcceptanceCounter* acceptance) const {
  const auto rows = static_cast<std::size_t>(layout_.rows);
  const auto outs = static_cast<std::size_t>(layout_.outcomes);
  if (outs == 1) return;
  const auto fixed = attached_stats(state, true);
  const auto indiv = attached_stats(state, false);
  std::vector<double> prior(outs);
  for (std::size_t k = 0; k < outs; ++k) prior[k] = priors_.top_concentration * top_mean_[k];
  auto target = [&](std::size_t r, std::span<const double> v) {
    double t = log_dirichlet_density(v, prior);
    t += attached_log_density(fixed[r], state.alpha0, v);
    t += attached_log_density(indiv[r], state.alpha_indiv, v);
    return t;
  };
  const double c = tuning.lambda0_concentration;
  std::vector<double> fwd(outs), rev(outs), proposal(outs);
  for (std::size_t r = 0; r < rows; ++r) {
    std::span<double> current(state.lambda0.data() + r * outs, outs);
    for (std::size_t k = 0; k < outs; ++k) fwd[k] = c * current[k];
    rng.dirichlet(fwd, proposal);
    bool degenerate = false;
    for (double v : proposal) degenerate = degenerate || v <= std::numeric_limits<double>::min();
    if (degenerate) {
      if (acceptance) acceptance->record(false);
      continue;
    }
    for (std::size_t k = 0; k < outs; ++k) rev[k] = c * proposal[k];
    const double log_ratio = target(r, proposal) - target(r, current) + log_dirichlet_density(current, rev) -
                             log_dirichlet_density(proposal, fwd);
    const bool accept = std::log(rng.uniform()) < log_ratio;
    if (accept) std::copy(proposal.begin(), proposal.end(), current.begin());
    if (acceptance) acceptance->record(accept);
  }
}

double MixedSampler::concentration_log_target(const MixedState& state, bool fixed_side, double alpha) const {
  const auto outs = static_cast<std::size_t>(layout_.outcomes);
  const GammaPrior& prior = fixed_side ? priors_.alpha0 : priors_.alpha_indiv;
  double out = log_gamma_density(alpha, prior.shape, prior.rate);
  const auto stats = attached_stats(state, fixed_side);
  for (std::size_t r = 0; r < stats.size(); ++r) {
    out += attached_log_density(stats[r], alpha, std::span<const double>(state.lambda0.data() + r * outs, outs));
  }
  return out;
}

void MixedSampler::update_concentrations(MixedState& state, const MixedTuning& tuning, Rng& rng,
                                         AcceptanceCounter* alpha0_acc, AcceptanceCounter* indiv_acc) const {
  const auto outs = static_cast<std::size_t>(layout_.outcomes);
  auto step = [&](bool fixed_side, double& alpha, double scale, AcceptanceCounter* acc) {
    const GammaPrior& prior = fixed_side ? priors_.alpha0 : priors_.alpha_indiv;
    const auto stats = attached_stats(state, fixed_side);
    auto target = [&](double a) {
      double t = log_gamma_density(a, prior.shape, prior.rate);
      for (std::size_t r = 0; r < stats.size(); ++r) {
        t += attached_log_density(stats[r], a, std::span<const double>(state.lambda0.data() + r * outs, outs));
      }
      return t;
    };
    const double proposal = alpha * std::exp(scale * rng.normal());
    if (!(proposal > 0.0) || !std::isfinite(proposal)) {
      if (acc) acc->record(false);
      return;
    }
    const double log_ratio = target(proposal) - target(alpha) + std::log(proposal) - std::log(alpha);
    const bool accept = std::log(rng.uniform()) < log_ratio;
    if (accept) alpha = proposal;
    if (acc) acc->record(accept);
  };
  if (flags_.fixed) step(true, state.alpha0, tuning.alpha0_step, alpha0_acc);
  if (flags_.random) step(false, state.alpha_indiv, tuning.alpha_indiv_step, indiv_acc);
}

void MixedSampler::sweep(MixedState& state, const MixedObservations& obs, const MixedTuning& tuning,
                         MixedAcceptance& acceptance, Rng& rng, ExecPolicy policy) const {
  if (flags_.fixed && flags_.random) sample_allocations(state, obs, rng.next_u64(), policy);
  const MixedCounts counts = count(state, obs, policy);
  update_lambda_fixed(state, counts, rng);
  update_lambda_indiv(state, counts, rng);
  update_pi(state, counts, rng);
  if (flags_.fixed) {
    bool any = false;
    for (std::size_t j = 0; j < layout_.cardinalities.size(); ++j) {
      if (layout_.cardinalities[j] < 2) continue;
      update_cluster_labels(state, counts, static_cast<int>(j), rng, &acceptance.clusters);
      any = true;
    }
    if (any) update_lambda_fixed(state, counts, rng);
  }
  update_lambda0(state, tuning, rng, &acceptance.lambda0);
  update_concentrations(state, tuning, rng, &acceptance.alpha0, &acceptance.alpha_indiv);
}

std::vector<double> MixedSampler::outcome_probabilities(const MixedState& state, int level_combination, int row,
                                                        int individual) const {
  const auto outs = static_cast<std::size_t>(layout_.outcomes);
  std::vector<double> out(outs);
  const int lc = label_map(state)[static_cast<std::size_t>(level_combination)];
  const std::size_t fb = layout_.fixed_index(lc, row, 0);
  if (individual < 0) {
    for (std::size_t k = 0; k < outs; ++k) {
      out[k] = flags_.fixed ? state.lambda_fixed[fb + k] : state.lambda0[static_cast<std::size_t>(row) * outs + k];
    }
    return out;
  }
  const std::size_t ib = layout_.indiv_index(individual, row, 0);
  const double p = state.pi0[static_cast<std::size_t>(individual) * static_cast<std::size_t>(layout_.rows) +
                             static_cast<std::size_t>(row)];
  for (std::size_t k = 0; k < outs; ++k) {
    if (flags_.fixed && flags_.random) out[k] = p * state.lambda_fixed[fb + k] + (1.0 - p) * state.lambda_indiv[ib + k];
    else if (flags_.fixed) out[k] = state.lambda_fixed[fb + k];
    else out[k] = state.lambda_indiv[ib + k];
  }
  return out;
}

std::string MixedSampler::check_invariants(const MixedState& state) const {
  const auto outs = static_cast<std::size_t>(layout_.outcomes);
  auto simplex = [outs](const std::vector<double>& v, const char* name) -> std::string {
    if (v.size() % outs != 0) return std::string(name) + ": size not a multiple of the outcome count";
    for (std::size_t b = 0; b < v.size(); b += outs) {
      double total = 0.0;
      for (std::size_t k = 0; k < outs; ++k) {
        if (!(v[b + k] >= 0.0) || !std::isfinite(v[b + k])) return std::string(name) + ": negative or non-finite entry";
        total += v[b + k];
      }
      if (std::abs(total - 1.0) > 1e-12) {
        std::ostringstream msg;
        msg << name << ": vector at offset " << b << " sums to " << total;
        return msg.str();
      }
    }
    return {};
  };
  if (state.lambda_fixed.size() != layout_.fixed_size()) return "lambda_fixed: wrong size";
  if (state.lambda_indiv.size() != layout_.indiv_size()) return "lambda_indiv: wrong size";
  if (auto e = simplex(state.lambda_fixed, "lambda_fixed"); !e.empty()) return e;
  if (auto e = simplex(state.lambda_indiv, "lambda_indiv"); !e.empty()) return e;
  if (auto e = simplex(state.lambda0, "lambda0"); !e.empty()) return e;
  for (double p : state.pi0) {
    if (!(p >= 0.0 && p <= 1.0)) return "pi0: entry outside [0,1]";
  }
  if (!(state.alpha0 > 0.0) || !std::isfinite(state.alpha0)) return "alpha0: not positive";
  if (!(state.alpha_indiv > 0.0) || !std::isfinite(state.alpha_indiv)) return "alpha_indiv: not positive";
  for (std::size_t j = 0; j < state.labels.size(); ++j) {
    const auto& l = state.labels[j];
    if (static_cast<int>(l.size()) != layout_.cardinalities[j]) return "labels: wrong size";
    int next = 0;
    for (int v : l) {
      if (v < 0 || v > next) return "labels: not canonical (contiguous by first appearance)";
      if (v == next) ++next;
    }
    const auto& m = state.mu[j];
    double total = 0.0;
    for (double v : m) {
      if (!(v >= 0.0)) return "mu: negative entry";
      total += v;
    }
    if (std::abs(total - 1.0) > 1e-12) return "mu: not on the simplex";
  }
  return {};
}

}  // namespace bmrmm
