#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "bmrmm/config.hpp"

namespace bmrmm {

inline constexpr int kMaxCovariates = 5;

/// One observed transition. Codes are 0-based internally; files use 1-based.
struct TransitionRecord {
  int sequence = 0;
  /// Dense individual index into SequenceDataset::individual_ids.
  int individual = 0;
  std::array<int, kMaxCovariates> covariates{};
  int previous_state = 0;
  int current_state = 0;
  /// Meaningful only when the dataset has durations.
  double duration = 0.0;

  bool operator==(const TransitionRecord&) const = default;
};

struct SequenceDataset {
  std::vector<TransitionRecord> records;
  int num_states = 0;
  int num_covariates = 0;
  std::vector<int> covariate_cardinalities;
  std::vector<std::int64_t> individual_ids;
  std::vector<std::string> state_labels;
  std::vector<std::vector<std::string>> covariate_labels;
  /// Column names from the file header (covariates only).
  std::vector<std::string> covariate_names;
  bool has_durations = false;

  int num_sequences() const;
  int num_individuals() const { return static_cast<int>(individual_ids.size()); }
  std::size_t size() const { return records.size(); }

  /// Throws DataError if any invariant fails.
  void validate() const;

  bool operator==(const SequenceDataset&) const = default;
};

struct ParseOptions {
  int num_covariates = 1;
  std::vector<std::string> state_labels;
  std::vector<std::vector<std::string>> covariate_labels;
  /// Leading explicit sequence-id column before Id.
  bool sequence_column = false;
  bool require_durations = false;

  static ParseOptions from_config(const ModelConfig& config);
};

SequenceDataset parse_dataset(const std::filesystem::path& path, const ParseOptions& options);
SequenceDataset parse_dataset(const std::filesystem::path& path, const ModelConfig& config);
SequenceDataset parse_dataset_text(const std::string& text, const ParseOptions& options);

/// Writes the dataset in the input format. With `sequence_column` the
/// sequence ids are written as a leading column so boundaries survive.
std::string serialize_dataset(const SequenceDataset& data, bool sequence_column = false);
void write_dataset(const std::filesystem::path& path, const SequenceDataset& data, bool sequence_column = false);

/// Exact floor(duration / unit) for positive finite doubles.
long long duration_blocks(double duration, double unit);

/// Replaces each duration by floor(duration/unit) instances of an extra state.
SequenceDataset discretize_durations(const SequenceDataset& data, double unit);

struct TransitionCounts {
  std::vector<int> covariates;     // 0-based covariate indices used
  std::vector<int> cardinalities;  // levels of each used covariate
  int num_states = 0;
  int num_individuals = 0;
  /// [combination][previous][current]; combination is mixed-radix over
  /// `cardinalities` with the first covariate varying fastest.
  std::vector<long long> by_combination;
  /// [individual][previous][current]
  std::vector<long long> by_individual;

  int combinations() const;
  long long at_combination(int combination, int previous, int current) const;
  long long at_individual(int individual, int previous, int current) const;
};

TransitionCounts transition_counts(const SequenceDataset& data, std::span<const int> covariates,
                                   bool fixed_effect = true);

/// Mixed-radix index of a level tuple (first entry fastest).
int combination_index(std::span<const int> levels, std::span<const int> cardinalities);
std::vector<int> combination_levels(int index, std::span<const int> cardinalities);

}  // namespace bmrmm
