#pragma once

// Record-level inner loops of the sampler. Each kernel has a serial
// reference implementation and an OpenMP implementation; both consume the
// same counter-addressed random stream, so their outputs are identical for
// every thread count.

#include <cstdint>
#include <span>
#include <vector>

namespace bmrmm::kernels {

enum class Exec { Serial, Parallel };

inline constexpr int kMaxComponents = 64;

/// Inputs of the fixed/random source-indicator draw.
struct AllocationInputs {
  std::span<const int> individual;
  std::span<const int> row;
  /// Cluster (label) combination of each record under the current partition.
  std::span<const int> label_combination;
  std::span<const int> outcome;
  std::span<const double> lambda_fixed;  // [label combo][row][outcome]
  std::span<const double> lambda_indiv;  // [individual][row][outcome]
  std::span<const double> pi0;           // [individual][row]
  int rows = 1;
  int outcomes = 1;
  std::uint64_t key = 0;
};

/// Writes 1 (fixed) or 0 (random) per record. Returns the number of records
/// whose two branch densities were both zero; those records are left as is.
std::size_t sample_allocations(const AllocationInputs& in, std::span<std::uint8_t> from_fixed, Exec exec,
                               int threads = 0);

struct CountInputs {
  std::span<const int> individual;
  std::span<const int> row;
  std::span<const int> level_combination;
  std::span<const int> outcome;
  std::span<const std::uint8_t> from_fixed;
  int rows = 1;
  int outcomes = 1;
  int level_combinations = 1;
  int individuals = 0;
};

struct AllocationCounts {
  std::vector<int> fixed_by_level;   // [level combo][row][outcome]
  std::vector<int> random_by_indiv;  // [individual][row][outcome]
  std::vector<int> fixed_alloc;      // [individual][row]
  std::vector<int> random_alloc;     // [individual][row]
};

AllocationCounts count_allocations(const CountInputs& in, Exec exec, int threads = 0);

/// Inputs shared by the gamma-mixture kernels (one row per duration record).
struct MixtureInputs {
  std::span<const double> duration;
  std::span<const double> log_duration;
  std::span<const int> individual;
  std::span<const int> label_combination;
  std::span<const double> lambda_fixed;  // [label combo][K]
  std::span<const double> lambda_indiv;  // [individual][K]
  std::span<const double> pi0;           // [individual]
  std::span<const double> shapes;
  std::span<const double> rates;
  bool fixed = true;
  bool random = true;
  int components = 1;
  std::uint64_t key = 0;
};

/// Draws each record's component with Pr(k) proportional to P(k) Ga(tau | shape_k, rate_k).
/// Returns the number of records whose weights were all zero.
std::size_t sample_assignments(const MixtureInputs& in, std::span<int> assignment, Exec exec, int threads = 0);

/// log of the mixture density at each record.
void mixture_loglik(const MixtureInputs& in, std::span<double> out, Exec exec, int threads = 0);

/// Per-record normalized mixture weights P(k), written [record][K].
void mixture_weights(const MixtureInputs& in, std::span<double> out, Exec exec, int threads = 0);

namespace serial {
std::size_t sample_allocations(const AllocationInputs& in, std::span<std::uint8_t> from_fixed);
AllocationCounts count_allocations(const CountInputs& in);
std::size_t sample_assignments(const MixtureInputs& in, std::span<int> assignment);
void mixture_loglik(const MixtureInputs& in, std::span<double> out);
void mixture_weights(const MixtureInputs& in, std::span<double> out);
}  // namespace serial

namespace parallel {
std::size_t sample_allocations(const AllocationInputs& in, std::span<std::uint8_t> from_fixed, int threads = 0);
AllocationCounts count_allocations(const CountInputs& in, int threads = 0);
std::size_t sample_assignments(const MixtureInputs& in, std::span<int> assignment, int threads = 0);
void mixture_loglik(const MixtureInputs& in, std::span<double> out, int threads = 0);
void mixture_weights(const MixtureInputs& in, std::span<double> out, int threads = 0);
}  // namespace parallel

}  // namespace bmrmm::kernels
