#pragma once

// Hierarchical Dirichlet mixed-effects block shared by the transition model
// and the duration mixture-weight model.
//
// For an observation with individual i, clustering-covariate levels x,
// conditioning row r and outcome y:
//
//   P(y | i, x, r) = pi0[i,r] * lambda_fixed[h(x), r](y) + (1 - pi0[i,r]) * lambda_indiv[i, r](y)
//
// where h(x) maps covariate levels to cluster labels. lambda_fixed and
// lambda_indiv share the Dirichlet mean lambda0[r], which has a Dirichlet
// prior centred on the top-level mean. A latent source indicator per
// observation restores conjugacy of the convex combination.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "bmrmm/config.hpp"
#include "bmrmm/kernels.hpp"
#include "bmrmm/random.hpp"

namespace bmrmm {

struct MixedLayout {
  /// Levels of each clustering covariate. Label combinations share this radix.
  std::vector<int> cardinalities;
  int rows = 1;
  int outcomes = 1;
  int individuals = 0;

  int combinations() const;
  std::size_t fixed_size() const;
  std::size_t indiv_size() const;
  std::size_t fixed_index(int combination, int row, int outcome) const;
  std::size_t indiv_index(int individual, int row, int outcome) const;
};

struct EffectFlags {
  bool fixed = true;
  bool random = true;
};

/// Observations of one block, stored column-wise.
struct MixedObservations {
  std::vector<int> individual;
  std::vector<int> row;
  std::vector<int> level_combination;
  std::vector<int> outcome;

  std::size_t size() const { return outcome.size(); }
};

struct MixedState {
  std::vector<double> lambda_fixed;  // [label combo][row][outcome]
  std::vector<double> lambda_indiv;  // [individual][row][outcome]
  std::vector<double> lambda0;       // [row][outcome]
  std::vector<double> pi0;           // [individual][row]
  std::vector<std::vector<int>> labels;  // [covariate][level]
  std::vector<std::vector<double>> mu;   // [covariate][label]
  double alpha0 = 1.0;
  double alpha_indiv = 1.0;
  std::vector<std::uint8_t> from_fixed;  // per observation
};

using MixedCounts = kernels::AllocationCounts;

struct AcceptanceCounter {
  long long accepted = 0;
  long long proposed = 0;

  void record(bool ok) {
    ++proposed;
    if (ok) ++accepted;
  }
  double rate() const { return proposed ? static_cast<double>(accepted) / static_cast<double>(proposed) : 0.0; }
};

struct MixedAcceptance {
  AcceptanceCounter lambda0;
  AcceptanceCounter alpha0;
  AcceptanceCounter alpha_indiv;
  AcceptanceCounter clusters;
};

/// Proposal scales of the random-walk Metropolis-Hastings families.
struct MixedTuning {
  /// Concentration c of the Dir(c * lambda0) proposal.
  double lambda0_concentration = 100.0;
  /// Standard deviation of the log-scale random walk on alpha0 / alpha_indiv.
  double alpha0_step = 0.5;
  double alpha_indiv_step = 0.5;
};

struct ExecPolicy {
  kernels::Exec exec = kernels::Exec::Serial;
  int threads = 1;
};

/// log prior probability of the partition induced by `labels` when labels
/// are i.i.d. Mult(mu) over `labels.size()` slots and mu ~ Dir(alpha, ..., alpha)
/// is integrated out, summed over all labelings of the same partition.
double log_partition_prior(std::span<const int> labels, double alpha);

/// Relabels to 0..k-1 by first appearance; returns k.
int canonicalize_labels(std::span<int> labels);

/// Number of distinct labels.
int count_clusters(std::span<const int> labels);

class MixedSampler {
 public:
  MixedSampler(MixedLayout layout, HierarchyPriors priors, EffectFlags flags);

  const MixedLayout& layout() const { return layout_; }
  const HierarchyPriors& priors() const { return priors_; }
  const EffectFlags& flags() const { return flags_; }
  /// Resolved top-level mean (uniform when unset).
  std::span<const double> top_mean() const { return top_mean_; }

  /// Smoothed-frequency start: each level in its own cluster, pi0 = 1/2,
  /// concentrations at their prior means, random source indicators.
  MixedState initial_state(const MixedObservations& obs, Rng& rng) const;
  MixedTuning default_tuning() const;

  /// Label combination of every level combination under the current labels.
  std::vector<int> label_map(const MixedState& state) const;
  /// Label combinations made only of labels in use.
  std::vector<int> attached_combinations(const MixedState& state) const;

  MixedCounts count(const MixedState& state, const MixedObservations& obs, ExecPolicy policy = {}) const;

  void sample_allocations(MixedState& state, const MixedObservations& obs, std::uint64_t key,
                          ExecPolicy policy = {}) const;
  void update_lambda_fixed(MixedState& state, const MixedCounts& counts, Rng& rng) const;
  void update_lambda_indiv(MixedState& state, const MixedCounts& counts, Rng& rng) const;
  void update_pi(MixedState& state, const MixedCounts& counts, Rng& rng) const;
  /// One reassignment proposal per level of `covariate`, then canonical relabeling and a mu draw.
  void update_cluster_labels(MixedState& state, const MixedCounts& counts, int covariate, Rng& rng,
                             AcceptanceCounter* acceptance = nullptr) const;
  void update_lambda0(MixedState& state, const MixedTuning& tuning, Rng& rng,
                      AcceptanceCounter* acceptance = nullptr) const;
  void update_concentrations(MixedState& state, const MixedTuning& tuning, Rng& rng,
                             AcceptanceCounter* alpha0_acc = nullptr, AcceptanceCounter* indiv_acc = nullptr) const;

  /// allocations -> lambda_fixed -> lambda_indiv -> pi0 -> cluster labels
  /// (then lambda_fixed redrawn) -> lambda0 -> concentrations.
  void sweep(MixedState& state, const MixedObservations& obs, const MixedTuning& tuning,
             MixedAcceptance& acceptance, Rng& rng, ExecPolicy policy = {}) const;

  /// Collapsed log target of a partition of `covariate`: Dirichlet-multinomial
  /// marginal of the fixed-allocated counts plus the partition prior.
  double cluster_log_target(const MixedState& state, const MixedCounts& counts, int covariate,
                            std::span<const int> covariate_labels) const;
  /// log acceptance ratio of moving `level` of `covariate` to `new_label`.
  double cluster_move_log_ratio(const MixedState& state, const MixedCounts& counts, int covariate, int level,
                                int new_label) const;

  /// log target of lambda0[row] (prior times attached Dirichlet densities).
  double lambda0_log_target(const MixedState& state, int row, std::span<const double> candidate) const;
  /// log target of alpha0 or alpha_indiv, without the log-scale Jacobian.
  double concentration_log_target(const MixedState& state, bool fixed_side, double alpha) const;
  /// log MH ratio of replacing lambda0[row] by `proposal` under a Dir(c * .) proposal.
  double lambda0_log_ratio(const MixedState& state, int row, std::span<const double> proposal, double c) const;

  /// Outcome distribution for one row; `individual < 0` gives the fixed
  /// (covariate-only) component.
  std::vector<double> outcome_probabilities(const MixedState& state, int level_combination, int row,
                                            int individual) const;

  /// Empty when all invariants hold, else a description of the first failure.
  std::string check_invariants(const MixedState& state) const;

 private:
  struct RowStats {
    double count = 0.0;
    std::vector<double> sum_log;  // per outcome
  };
  std::vector<RowStats> attached_stats(const MixedState& state, bool fixed_side) const;
  double attached_log_density(const RowStats& stats, double alpha, std::span<const double> mean) const;

  MixedLayout layout_;
  HierarchyPriors priors_;
  EffectFlags flags_;
  std::vector<double> top_mean_;
  std::vector<std::vector<int>> level_of_;  // [level combo][covariate]
  std::vector<int> strides_;
};

}  // namespace bmrmm
