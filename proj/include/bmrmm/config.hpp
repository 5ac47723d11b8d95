#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "bmrmm/special.hpp"

namespace bmrmm {

enum class DurationMode { Ignore, Discretize, GammaMixture };

struct DurationSpec {
  DurationMode mode = DurationMode::Ignore;
  /// Block length for Discretize.
  double unit = 0.0;
  /// Per-component prior shape parameters for the kernel shapes and rates.
  /// Their common length is the number of mixture components K.
  std::vector<double> shape_prior;
  std::vector<double> rate_prior;

  int components() const { return static_cast<int>(shape_prior.size()); }

  static DurationSpec ignore() { return {}; }
  static DurationSpec discretize(double unit);
  static DurationSpec gamma_mixture(std::vector<double> shape_prior, std::vector<double> rate_prior);
  /// K components with unit priors.
  static DurationSpec gamma_mixture(int components);

  /// Parses "ignore", "dirichlet:<unit>" or "gamma:<K>".
  static DurationSpec parse(const std::string& text);
  std::string to_string() const;
};

/// Priors of one hierarchical Dirichlet mixed-effects block.
struct HierarchyPriors {
  /// Symmetric Dirichlet concentration of the cluster probabilities mu_j.
  double cluster_concentration = 1.0;
  /// Concentration alpha_00 of the top-level Dirichlet on lambda_0.
  double top_concentration = 1.0;
  /// Base vector lambda_00; empty means uniform.
  std::vector<double> top_mean;
  GammaPrior alpha0{1.0, 1.0};
  GammaPrior alpha_indiv{1.0, 1.0};
  /// Beta prior of the fixed-effect weight pi_0.
  BetaPrior mixing{1.0, 1.0};
};

struct HyperParams {
  HierarchyPriors trans;
  HierarchyPriors dur;
  /// Rates of the gamma priors on kernel shapes and kernel rates. The prior
  /// shapes come from DurationSpec::shape_prior / rate_prior.
  double kernel_shape_prior_rate = 1.0;
  double kernel_rate_prior_rate = 1.0;
};

enum class ShapeSampler { MetropolisHastings, ApproximationOnly };

struct ModelConfig {
  int num_covariates = 1;
  std::vector<std::string> state_labels;
  std::vector<std::vector<std::string>> covariate_labels;
  bool sequence_column = false;

  bool fixed_effect = true;
  bool random_effect = true;
  /// 0-based covariate indices; nullopt selects all covariates.
  std::optional<std::vector<int>> trans_cov_index;
  std::optional<std::vector<int>> duration_cov_index;
  DurationSpec duration;
  bool duration_incl_prev_state = true;

  int simsize = 10000;
  /// nullopt means simsize / 2.
  std::optional<int> burnin;
  int thin = 1;
  std::uint64_t rng_seed = 1;
  /// Threads for record-level kernels; 0 keeps the OpenMP default, 1 runs serially.
  int threads = 1;
  ShapeSampler shape_sampler = ShapeSampler::MetropolisHastings;

  HyperParams hyper;

  int effective_burnin() const { return burnin ? *burnin : simsize / 2; }
  int kept_iterations() const { return (simsize - effective_burnin()) / thin; }
  std::vector<int> trans_covariates() const;
  std::vector<int> duration_covariates() const;

  /// Throws UsageError on invalid combinations.
  void validate() const;
};

/// Applies `key = value` pairs (lines, '#' comments) onto `config`.
void apply_config_text(ModelConfig& config, const std::string& text);
void apply_config_file(ModelConfig& config, const std::filesystem::path& path);
/// One setting; keys mirror ModelConfig field names.
void apply_config_value(ModelConfig& config, const std::string& key, const std::string& value);

/// Parses "1,2,3" (1-based) into 0-based indices.
std::vector<int> parse_index_list(const std::string& text);
std::vector<double> parse_double_list(const std::string& text);

}  // namespace bmrmm
