#include "bmrmm/trans_sampler.hpp"

namespace bmrmm {

namespace {

MixedLayout transition_layout(const SequenceDataset& data, std::span<const int> covariates) {
  MixedLayout layout;
  for (int j : covariates) layout.cardinalities.push_back(data.covariate_cardinalities[static_cast<std::size_t>(j)]);
  layout.rows = data.num_states;
  layout.outcomes = data.num_states;
  layout.individuals = data.num_individuals();
  return layout;
}

}  // namespace

TransitionSampler::TransitionSampler(const SequenceDataset& data, const ModelConfig& config)
    : covariates_(config.fixed_effect ? config.trans_covariates() : std::vector<int>{}),
      block_(transition_layout(data, covariates_), config.hyper.trans,
             EffectFlags{config.fixed_effect, config.random_effect}) {
  std::vector<int> cards = block_.layout().cardinalities;
  std::vector<int> levels(covariates_.size());
  obs_.individual.reserve(data.size());
  for (const auto& rec : data.records) {
    for (std::size_t j = 0; j < covariates_.size(); ++j) {
      levels[j] = rec.covariates[static_cast<std::size_t>(covariates_[j])];
    }
    obs_.individual.push_back(rec.individual);
    obs_.row.push_back(rec.previous_state);
    obs_.level_combination.push_back(combination_index(levels, cards));
    obs_.outcome.push_back(rec.current_state);
  }
}

std::vector<double> posterior_transition_matrix(const MixedSampler& block, const TransitionState& state,
                                                int level_combination, int individual) {
  const int d = block.layout().rows;
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(d) * static_cast<std::size_t>(block.layout().outcomes));
  for (int r = 0; r < d; ++r) {
    const auto row = block.outcome_probabilities(state, level_combination, r, individual);
    out.insert(out.end(), row.begin(), row.end());
  }
  return out;
}

}  // namespace bmrmm
