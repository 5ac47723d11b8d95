#pragma once

#include <vector>

#include "bmrmm/engine.hpp"

namespace bmrmm {

/// Log-likelihood matrix: one row per draw, one column per record.
using LoglikMatrix = std::vector<std::vector<double>>;

/// Log pseudo marginal likelihood; larger is better.
double lpml(const LoglikMatrix& loglik);

struct WaicParts {
  double lppd = 0.0;
  double p_waic = 0.0;
  double waic = 0.0;
};

/// Variance-penalized WAIC, -2 (lppd - p_waic); smaller is better.
WaicParts waic_parts(const LoglikMatrix& loglik);
double waic(const LoglikMatrix& loglik);

struct ModelScores {
  double lpml = 0.0;
  double waic = 0.0;
};

/// Scores of a fit with a gamma-mixture duration model. Throws UsageError otherwise.
ModelScores model_selection_scores(const PosteriorSamples& samples);

}  // namespace bmrmm
