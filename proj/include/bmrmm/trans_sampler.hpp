#pragma once

// Transition sub-model: the mixed-effects block with one row per previous
// state and one outcome per current state.

#include <span>
#include <vector>

#include "bmrmm/datamodel.hpp"
#include "bmrmm/mixed_model.hpp"

namespace bmrmm {

using TransitionState = MixedState;

class TransitionSampler {
 public:
  TransitionSampler(const SequenceDataset& data, const ModelConfig& config);

  const MixedSampler& block() const { return block_; }
  const MixedObservations& observations() const { return obs_; }
  /// Dataset covariate indices used for clustering.
  std::span<const int> covariates() const { return covariates_; }
  int num_states() const { return block_.layout().outcomes; }

  TransitionState initial_state(Rng& rng) const { return block_.initial_state(obs_, rng); }
  void sweep(TransitionState& state, const MixedTuning& tuning, MixedAcceptance& acceptance, Rng& rng,
             ExecPolicy policy = {}) const {
    block_.sweep(state, obs_, tuning, acceptance, rng, policy);
  }

 private:
  std::vector<int> covariates_;
  MixedSampler block_;
  MixedObservations obs_;
};

/// Row-major d0 x d0 matrix P(current | previous) for a level combination of
/// the selected covariates. `individual < 0` gives the covariate-only matrix.
std::vector<double> posterior_transition_matrix(const MixedSampler& block, const TransitionState& state,
                                                int level_combination, int individual);

}  // namespace bmrmm
