#pragma once

// On-disk layout of a fit: one directory holding meta.json, timing.json,
// data.csv and one CSV table per parameter family. Everything except
// timing.json is a deterministic function of the data, config and seed.

#include <filesystem>
#include <string>

#include "bmrmm/engine.hpp"

namespace bmrmm {

inline constexpr int kStorageFormatVersion = 1;

void save_samples(const std::filesystem::path& dir, const PosteriorSamples& samples);
PosteriorSamples load_samples(const std::filesystem::path& dir);

/// Config as a JSON document, and back.
std::string config_to_json(const ModelConfig& config);
ModelConfig config_from_json(const std::string& text);

}  // namespace bmrmm
