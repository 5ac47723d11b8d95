#pragma once

// Duration sub-model: gamma mixture kernels whose component weights follow
// the mixed-effects block with a single row and K outcomes.

#include <span>
#include <string>
#include <vector>

#include "bmrmm/datamodel.hpp"
#include "bmrmm/mixed_model.hpp"

namespace bmrmm {

struct ShapeApproximation {
  double shape = 1.0;
  double rate = 1.0;
  int iterations = 0;
};

/// log of the unnormalized full conditional of a kernel shape:
/// prior Ga(a, b) times n gamma likelihoods with fixed rate exp(log_beta).
double log_shape_conditional(double alpha, double n, double sum_log_tau, double log_beta, GammaPrior prior);

/// Gamma density approximating the shape full conditional. A fixed point
/// matching the first two log-density derivatives (stopped at 1e-8 relative
/// change in the shape, at most 10 iterations, else NumericalError) locates
/// the target; its mean and variance are then refined by Gauss-Hermite
/// quadrature on the log scale and the gamma is moment-matched to them.
ShapeApproximation approx_shape_conditional(double n, double sum_log_tau, double log_beta, GammaPrior prior);

/// Uncorrected fixed point of the derivative matching.
ShapeApproximation approx_shape_fixed_point(double n, double sum_log_tau, double log_beta, GammaPrior prior);

struct ComponentStats {
  std::vector<double> count;
  std::vector<double> sum;
  std::vector<double> sum_log;
};

struct DurationState {
  MixedState mix;
  std::vector<double> shapes;
  std::vector<double> rates;
  std::vector<int> assignment;
  ComponentStats stats;
};

struct DurationAcceptance {
  MixedAcceptance mix;
  std::vector<AcceptanceCounter> shapes;
};

class DurationSampler {
 public:
  DurationSampler(const SequenceDataset& data, const ModelConfig& config);

  const MixedSampler& block() const { return block_; }
  int components() const { return block_.layout().outcomes; }
  /// Dataset covariate indices used for clustering (previous state excluded).
  std::span<const int> covariates() const { return covariates_; }
  bool includes_previous_state() const { return prev_state_; }
  std::size_t size() const { return duration_.size(); }
  std::span<const double> durations() const { return duration_; }
  /// Observations with outcome set to the state's assignments.
  MixedObservations observations(const DurationState& state) const;
  /// Level combination of each record over covariates() (+ previous state).
  std::span<const int> level_combinations() const { return base_.level_combination; }

  DurationState initial_state(Rng& rng) const;

  void sample_assignments(DurationState& state, std::uint64_t key, ExecPolicy policy = {}) const;
  void update_shapes(DurationState& state, Rng& rng, std::vector<AcceptanceCounter>* acceptance = nullptr) const;
  void update_rates(DurationState& state, Rng& rng) const;
  void update_mixture(DurationState& state, const MixedTuning& tuning, MixedAcceptance& acceptance, Rng& rng,
                      ExecPolicy policy = {}) const;
  /// assignments -> shapes -> rates -> mixture weights.
  void sweep(DurationState& state, const MixedTuning& tuning, DurationAcceptance& acceptance, Rng& rng,
             ExecPolicy policy = {}) const;

  /// log mixture density of every record.
  void loglik(const DurationState& state, std::span<double> out, ExecPolicy policy = {}) const;
  /// Mixture weights of every record, [record][K].
  std::vector<double> record_probabilities(const DurationState& state, ExecPolicy policy = {}) const;

  ComponentStats compute_stats(std::span<const int> assignment) const;
  std::string check_invariants(const DurationState& state) const;

 private:
  kernels::MixtureInputs mixture_inputs(const DurationState& state, std::vector<int>& label_combination) const;

  std::vector<int> covariates_;
  bool prev_state_ = false;
  MixedSampler block_;
  MixedObservations base_;
  std::vector<double> duration_;
  std::vector<double> log_duration_;
  std::vector<GammaPrior> shape_priors_;
  std::vector<GammaPrior> rate_priors_;
  ShapeSampler shape_sampler_;
};

}  // namespace bmrmm
