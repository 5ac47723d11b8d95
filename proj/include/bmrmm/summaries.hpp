#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bmrmm/engine.hpp"
#include "bmrmm/model_selection.hpp"

namespace bmrmm {

/// Posterior distribution of the number of clusters of each covariate.
struct GlobalTest {
  std::vector<std::string> covariates;
  /// [covariate][k - 1] = P(k clusters); length is the covariate's level count.
  std::vector<std::vector<double>> probs;
};

/// Distribution over cluster counts of block covariate `position`.
std::vector<double> cluster_count_distribution(std::span<const MixedDraw> draws, int position, int cardinality);

GlobalTest global_test(std::span<const MixedDraw> draws, const BlockInfo& info, std::vector<std::string> names);

struct LocalStatistic {
  double mean_abs_diff = 0.0;
  double null_prob = 0.0;
};

/// Mean of |diff| and fraction with |diff| <= delta. Throws UsageError for delta <= 0.
LocalStatistic local_statistic(std::span<const double> diffs, double delta);

struct LocalTestEntry {
  /// Position of the tested covariate in the transition block.
  int covariate = 0;
  int level_a = 0;
  int level_b = 0;
  /// Levels of all block covariates; the tested position holds -1.
  std::vector<int> others;
  int from = 0;
  int to = 0;
  LocalStatistic stat;
};

/// Local tests for one transition covariate over every unordered level pair,
/// every observed setting of the other covariates and every transition.
std::vector<LocalTestEntry> local_test(const PosteriorSamples& samples, int position, double delta);

struct TransitionSummary {
  int combinations = 0;
  int states = 0;
  /// [combination][previous][current]
  std::vector<double> mean;
  std::vector<double> sd;
};

/// Mean and sample sd (n - 1) of the covariate-only transition probabilities.
TransitionSummary transition_posterior_summary(const PosteriorSamples& samples);

struct MixProbsBlock {
  std::string covariate;
  std::vector<std::string> levels;
  /// [component][level]; NaN for levels without duration records.
  std::vector<std::vector<double>> probs;
};

struct DurationMixtureSummary {
  std::vector<double> shapes;
  std::vector<double> rates;
  std::vector<MixProbsBlock> probs;
};

/// Kernel parameters of the last kept iteration and, per clustering covariate
/// level, the average mixture weights of the matching duration records. With
/// `posterior_average` the weights are posterior means instead of the
/// last-iteration values.
DurationMixtureSummary duration_mixture_summary(const PosteriorSamples& samples, bool posterior_average = false);

struct SummaryOptions {
  double delta = 0.02;
  bool posterior_average_mix_probs = false;
};

struct FitSummary {
  double delta = 0.02;
  std::vector<std::string> state_labels;
  /// Display label of each transition covariate combination.
  std::vector<std::string> combination_labels;
  std::vector<std::string> trans_covariates;
  std::vector<std::vector<std::string>> trans_levels;
  GlobalTest trans_global;
  TransitionSummary trans_probs;
  std::vector<LocalTestEntry> trans_local;
  std::vector<double> trans_indiv_mean;
  bool has_duration = false;
  std::vector<std::string> dur_covariates;
  GlobalTest dur_global;
  DurationMixtureSummary dur_mix;
  std::optional<ModelScores> scores;
};

FitSummary summarize(const PosteriorSamples& samples, const SummaryOptions& options = {});

inline constexpr int kSummarySchemaVersion = 1;

/// Writes summary.json, one CSV per field and plot data under plots/; with
/// `render_svg` also static SVG figures.
void write_summary(const std::filesystem::path& dir, const FitSummary& summary, bool render_svg = false);

/// Display names of the block covariates of a fit.
std::vector<std::string> block_covariate_names(const PosteriorSamples& samples, const BlockInfo& info);

}  // namespace bmrmm
