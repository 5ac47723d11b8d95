#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "bmrmm/datamodel.hpp"

namespace bmrmm {

/// A fully specified generative model. Probability fields are indexed like
/// the sampler's: label combinations use the mixed radix of the covariate
/// cardinalities (first covariate fastest) and partitions map level -> label.
struct GenerativeSpec {
  int num_states = 2;
  std::vector<int> cardinalities;
  std::vector<std::string> state_labels;
  std::vector<std::string> covariate_names;
  std::vector<std::vector<std::string>> covariate_labels;

  int num_individuals = 1;
  int sequences_per_individual = 1;
  /// Transitions per sequence, drawn uniformly from [min_length, max_length].
  int min_length = 10;
  int max_length = 10;
  /// Covariates fixed per individual (balanced over individuals) instead of drawn per sequence.
  std::vector<bool> individual_level;
  /// Initial-state distribution; empty means uniform.
  std::vector<double> initial;

  std::vector<int> trans_covariates;
  std::vector<std::vector<int>> trans_partition;
  std::vector<double> trans_fixed;  // [label combo][prev][cur]
  std::vector<double> trans_indiv;  // [individual][prev][cur]
  std::vector<double> trans_pi;     // [individual][prev]

  bool durations = false;
  std::vector<double> shapes;
  std::vector<double> rates;
  std::vector<int> dur_covariates;
  bool dur_prev_state = false;
  /// One partition per duration covariate, then the previous state's when enabled.
  std::vector<std::vector<int>> dur_partition;
  std::vector<double> dur_fixed;  // [label combo][K]
  std::vector<double> dur_indiv;  // [individual][K]
  std::vector<double> dur_pi;     // [individual]

  std::uint64_t seed = 1;

  int components() const { return static_cast<int>(shapes.size()); }
  /// Throws UsageError if any field is inconsistent.
  void validate() const;
};

/// Draws a dataset from the generative model; equal inputs give equal datasets.
SequenceDataset simulate_dataset(const GenerativeSpec& spec);

/// Transition law P(cur | prev) of one individual at one covariate level vector.
std::vector<double> true_transition_row(const GenerativeSpec& spec, int individual, std::span<const int> covariates,
                                        int previous);

enum class DemoKind { Foxp2Like, AsthmaLike };

DemoKind parse_demo_kind(const std::string& text);
std::string to_string(DemoKind kind);

struct DemoSize {
  int individuals = 0;
  int sequences_per_individual = 0;
  int min_length = 0;
  int max_length = 0;
};

/// Default sizes: foxp2-like 25 individuals x 2 sequences of 80-120
/// transitions; asthma-like 150 individuals x 1 sequence of 5-25.
DemoSize default_demo_size(DemoKind kind);

struct DemoCorpus {
  GenerativeSpec spec;
  SequenceDataset data;
};

/// foxp2-like: states d/m/s/u, Genotype {F,W} per individual, Context {U,L,A}
/// per sequence. Context drives transitions ({U} vs {L,A}); genotype drives
/// durations. asthma-like: three states, binary Severity/BMI/Sex per
/// individual. Severity drives transitions; the previous state drives durations.
DemoCorpus make_demo_corpus(DemoKind kind, std::uint64_t seed, DemoSize size = {});

/// Ground-truth sidecar document.
std::string ground_truth_json(const GenerativeSpec& spec);

}  // namespace bmrmm
