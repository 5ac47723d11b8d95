#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "bmrmm/datamodel.hpp"
#include "bmrmm/dur_sampler.hpp"
#include "bmrmm/mixed_model.hpp"
#include "bmrmm/trans_sampler.hpp"

namespace bmrmm {

/// Population-level fields of one stored iteration of a mixed-effects block.
struct MixedDraw {
  std::vector<double> lambda_fixed;
  std::vector<double> lambda0;
  std::vector<std::vector<int>> labels;
  std::vector<std::vector<double>> mu;
  double alpha0 = 0.0;
  double alpha_indiv = 0.0;

  bool operator==(const MixedDraw&) const = default;
};

MixedDraw snapshot(const MixedState& state);

struct DurationDraw {
  MixedDraw mix;
  std::vector<double> shapes;
  std::vector<double> rates;

  bool operator==(const DurationDraw&) const = default;
};

/// Layout of a block as fitted, enough to interpret its draws.
struct BlockInfo {
  /// Dataset covariate indices used for clustering.
  std::vector<int> covariates;
  /// Previous state appended as the last clustering covariate.
  bool previous_state = false;
  std::vector<int> cardinalities;
  int rows = 0;
  int outcomes = 0;
  int individuals = 0;
  bool fixed = true;
  bool random = true;

  int combinations() const;
  bool operator==(const BlockInfo&) const = default;
};

struct AcceptanceSummary {
  /// family name -> (accepted, proposed) after burn-in.
  std::map<std::string, std::pair<long long, long long>> rates;
  /// family name -> final proposal scale.
  std::map<std::string, double> tuning;

  bool operator==(const AcceptanceSummary&) const = default;
};

struct PosteriorSamples {
  ModelConfig config;
  /// The data as fitted (after discretization, when requested).
  SequenceDataset data;
  std::uint64_t seed = 0;
  int chain = 0;

  BlockInfo trans_info;
  std::vector<MixedDraw> trans_draws;
  /// Posterior mean of the individual-effect transition vectors, [individual][prev][cur].
  std::vector<double> trans_indiv_mean;
  /// Posterior mean of the individual fixed-effect weights, [individual][prev].
  std::vector<double> trans_pi_mean;
  /// Full state at the last kept iteration.
  TransitionState trans_last;

  bool has_duration = false;
  BlockInfo dur_info;
  std::vector<DurationDraw> dur_draws;
  /// [kept iteration][duration record] log mixture density.
  std::vector<std::vector<double>> loglik;
  /// Posterior mean of each record's mixture weights, [record][K].
  std::vector<double> dur_record_probs_mean;
  DurationState dur_last;

  AcceptanceSummary acceptance;
  /// Wall-clock seconds per phase.
  std::map<std::string, double> timing;

  std::size_t kept() const { return trans_draws.size(); }
};

struct FitOptions {
  /// Run record-level kernels with OpenMP.
  bool parallel_kernels = false;
  /// Check every state invariant after each sweep; a failure throws NumericalError.
  bool check_invariants = false;
  /// Called after each sweep with the 1-based iteration number.
  std::function<void(int, const TransitionState&, const DurationState*)> observer;
};

/// Runs one chain. Discretize rewrites the data first; GammaMixture adds the
/// duration sub-model. Identical inputs give identical outputs.
PosteriorSamples fit(const SequenceDataset& data, const ModelConfig& config, const FitOptions& options = {});

/// Runs `chains` chains with seeds derive_chain_seed(config.rng_seed, c);
/// `parallel_chains` runs them concurrently. Output order follows the chain index.
std::vector<PosteriorSamples> run_chains(const SequenceDataset& data, const ModelConfig& config, int chains,
                                         bool parallel_chains = true, const FitOptions& options = {});

/// Layout description of a fitted transition / duration block.
BlockInfo describe(const TransitionSampler& sampler);
BlockInfo describe(const DurationSampler& sampler);

}  // namespace bmrmm
