#pragma once
// Enumeration oracle for the collapsed cluster target.
//
// The prior mass of a partition is obtained by summing, over every labeling
// of d levels with labels in {0..d-1}, the Dirichlet-multinomial probability
// of that labeling, then grouping labelings by the partition they induce.
// Marginal likelihoods use products of Gamma ratios in long double.

#include <cmath>
#include <map>
#include <vector>

namespace oracle {

using Partition = std::vector<int>;  // canonical block index per level

inline Partition canonical(const std::vector<int>& labels) {
  std::map<int, int> seen;
  Partition out;
  for (int l : labels) {
    auto it = seen.find(l);
    if (it == seen.end()) it = seen.emplace(l, static_cast<int>(seen.size())).first;
    out.push_back(it->second);
  }
  return out;
}

/// All set partitions of d levels (restricted growth strings).
inline std::vector<Partition> all_partitions(int d) {
  std::vector<Partition> out;
  Partition cur(static_cast<std::size_t>(d), 0);
  auto rec = [&](auto&& self, int pos, int max_label) -> void {
    if (pos == d) {
      out.push_back(cur);
      return;
    }
    for (int l = 0; l <= max_label + 1; ++l) {
      cur[static_cast<std::size_t>(pos)] = l;
      self(self, pos + 1, std::max(max_label, l));
    }
  };
  if (d > 0) rec(rec, 1, 0);
  return out;
}

/// Prior mass of every partition of d levels, by brute force over d^d labelings.
inline std::map<Partition, long double> partition_prior(int d, long double alpha) {
  std::map<Partition, long double> mass;
  std::vector<int> labels(static_cast<std::size_t>(d), 0);
  long double total_labelings = std::pow(static_cast<long double>(d), d);
  for (long long code = 0; code < static_cast<long long>(total_labelings); ++code) {
    long long c = code;
    std::vector<int> counts(static_cast<std::size_t>(d), 0);
    for (int i = 0; i < d; ++i) {
      labels[static_cast<std::size_t>(i)] = static_cast<int>(c % d);
      ++counts[static_cast<std::size_t>(c % d)];
      c /= d;
    }
    // P(labels) = Gamma(d a) / Gamma(d a + d) * prod_h Gamma(a + m_h) / Gamma(a), as a rising-factorial ratio.
    long double p = 1.0L;
    for (int m : counts) {
      for (int t = 0; t < m; ++t) p *= (alpha + t);
    }
    for (int t = 0; t < d; ++t) p /= (d * alpha + t);
    mass[canonical(labels)] += p;
  }
  return mass;
}

/// log of prod_t Gamma(conc_t + n_t) / Gamma(conc_t) * Gamma(sum conc) / Gamma(sum conc + N),
/// via rising factorials.
inline long double log_dirmult(const std::vector<int>& counts, const std::vector<long double>& conc) {
  long double out = 0.0L, total_conc = 0.0L;
  int total = 0;
  for (std::size_t k = 0; k < counts.size(); ++k) {
    for (int t = 0; t < counts[k]; ++t) out += std::log(conc[k] + t);
    total_conc += conc[k];
    total += counts[k];
  }
  for (int t = 0; t < total; ++t) out -= std::log(total_conc + t);
  return out;
}

/// Collapsed marginal of a single-covariate block: counts[level][row][outcome].
inline long double log_marginal(const std::vector<std::vector<std::vector<int>>>& counts, const Partition& part,
                                const std::vector<std::vector<long double>>& conc) {
  const std::size_t rows = counts.front().size();
  const std::size_t outs = counts.front().front().size();
  int blocks = 0;
  for (int b : part) blocks = std::max(blocks, b + 1);
  long double out = 0.0L;
  for (int b = 0; b < blocks; ++b) {
    for (std::size_t r = 0; r < rows; ++r) {
      std::vector<int> agg(outs, 0);
      for (std::size_t l = 0; l < part.size(); ++l) {
        if (part[l] != b) continue;
        for (std::size_t k = 0; k < outs; ++k) agg[k] += counts[l][r][k];
      }
      out += log_dirmult(agg, conc[r]);
    }
  }
  return out;
}

}  // namespace oracle
