#include "bmrmm/config.hpp"

#include <charconv>
#include <cmath>
#include <sstream>

#include "bmrmm/errors.hpp"
#include "bmrmm/table_io.hpp"

namespace bmrmm {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& text, const std::string& what) {
  double v = 0.0;
  const std::string t = trim(text);
  auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || ptr != t.data() + t.size()) throw UsageError("invalid number for " + what + ": '" + text + "'");
  return v;
}

long long to_int(const std::string& text, const std::string& what) {
  long long v = 0;
  const std::string t = trim(text);
  auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || ptr != t.data() + t.size()) throw UsageError("invalid integer for " + what + ": '" + text + "'");
  return v;
}

bool to_bool(const std::string& text, const std::string& what) {
  const std::string t = trim(text);
  if (t == "true" || t == "1" || t == "yes" || t == "on") return true;
  if (t == "false" || t == "0" || t == "no" || t == "off") return false;
  throw UsageError("invalid boolean for " + what + ": '" + text + "'");
}

std::vector<int> all_indices(int n) {
  std::vector<int> out(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = i;
  return out;
}

}  // namespace

DurationSpec DurationSpec::discretize(double unit) {
  DurationSpec s;
  s.mode = DurationMode::Discretize;
  s.unit = unit;
  return s;
}

DurationSpec DurationSpec::gamma_mixture(std::vector<double> shape_prior, std::vector<double> rate_prior) {
  DurationSpec s;
  s.mode = DurationMode::GammaMixture;
  s.shape_prior = std::move(shape_prior);
  s.rate_prior = std::move(rate_prior);
  return s;
}

DurationSpec DurationSpec::gamma_mixture(int components) {
  return gamma_mixture(std::vector<double>(static_cast<std::size_t>(std::max(components, 0)), 1.0),
                       std::vector<double>(static_cast<std::size_t>(std::max(components, 0)), 1.0));
}

DurationSpec DurationSpec::parse(const std::string& text) {
  const std::string t = trim(text);
  if (t.empty() || t == "ignore" || t == "none") return ignore();
  const auto colon = t.find(':');
  const std::string kind = t.substr(0, colon);
  const std::string arg = colon == std::string::npos ? std::string() : t.substr(colon + 1);
  if (kind == "dirichlet" || kind == "mixDirichlet") {
    if (arg.empty()) throw UsageError("dirichlet duration mode needs a unit, e.g. dirichlet:5");
    return discretize(to_double(arg, "duration unit"));
  }
  if (kind == "gamma" || kind == "mixgamma") {
    if (arg.empty()) throw UsageError("gamma duration mode needs a component count, e.g. gamma:4");
    const long long k = to_int(arg, "mixture components");
    if (k < 1) throw UsageError("mixture components must be >= 1");
    return gamma_mixture(static_cast<int>(k));
  }
  throw UsageError("unknown duration distribution '" + text + "' (expected ignore|dirichlet:<unit>|gamma:<K>)");
}

std::string DurationSpec::to_string() const {
  switch (mode) {
    case DurationMode::Ignore:
      return "ignore";
    case DurationMode::Discretize:
      return "dirichlet:" + format_double(unit);
    case DurationMode::GammaMixture:
      return "gamma:" + std::to_string(components());
  }
  return "ignore";
}

std::vector<int> ModelConfig::trans_covariates() const {
  return trans_cov_index ? *trans_cov_index : all_indices(num_covariates);
}

std::vector<int> ModelConfig::duration_covariates() const {
  return duration_cov_index ? *duration_cov_index : all_indices(num_covariates);
}

void ModelConfig::validate() const {
  if (num_covariates < 1 || num_covariates > 5) throw UsageError("num_covariates must be between 1 and 5");
  if (!fixed_effect && !random_effect) throw UsageError("fixed_effect and random_effect cannot both be off");
  auto check_subset = [this](const std::vector<int>& idx, const char* what) {
    for (std::size_t a = 0; a < idx.size(); ++a) {
      if (idx[a] < 0 || idx[a] >= num_covariates) throw UsageError(std::string(what) + " index out of range");
      for (std::size_t b = 0; b < a; ++b) {
        if (idx[a] == idx[b]) throw UsageError(std::string(what) + " has duplicate indices");
      }
    }
  };
  check_subset(trans_covariates(), "trans_cov_index");
  check_subset(duration_covariates(), "duration_cov_index");
  if (fixed_effect && trans_covariates().empty()) {
    throw UsageError("trans_cov_index may be empty only when fixed_effect is off");
  }
  if (simsize < 1) throw UsageError("simsize must be positive");
  const int b = effective_burnin();
  if (b < 0 || b >= simsize) throw UsageError("burnin must satisfy 0 <= burnin < simsize");
  if (thin < 1) throw UsageError("thin must be >= 1");
  if (duration.mode == DurationMode::Discretize && !(duration.unit > 0.0 && std::isfinite(duration.unit))) {
    throw UsageError("discretization unit must be positive");
  }
  if (duration.mode == DurationMode::GammaMixture) {
    if (duration.shape_prior.size() != duration.rate_prior.size()) {
      throw UsageError("shape and rate prior vectors must have the same length");
    }
    if (duration.shape_prior.empty()) throw UsageError("gamma mixture needs at least one component");
    for (std::size_t k = 0; k < duration.shape_prior.size(); ++k) {
      if (!(duration.shape_prior[k] > 0.0) || !(duration.rate_prior[k] > 0.0)) {
        throw UsageError("kernel prior parameters must be positive");
      }
    }
  }
  for (const HierarchyPriors* h : {&hyper.trans, &hyper.dur}) {
    if (!(h->cluster_concentration > 0.0) || !(h->top_concentration > 0.0) || !(h->alpha0.shape > 0.0) ||
        !(h->alpha0.rate > 0.0) || !(h->alpha_indiv.shape > 0.0) || !(h->alpha_indiv.rate > 0.0) ||
        !(h->mixing.a > 0.0) || !(h->mixing.b > 0.0)) {
      throw UsageError("all hyperparameters must be strictly positive");
    }
    double total = 0.0;
    for (double v : h->top_mean) {
      if (!(v > 0.0)) throw UsageError("top_mean entries must be positive");
      total += v;
    }
    if (!h->top_mean.empty() && std::abs(total - 1.0) > 1e-9) throw UsageError("top_mean must sum to 1");
  }
  if (!(hyper.kernel_shape_prior_rate > 0.0) || !(hyper.kernel_rate_prior_rate > 0.0)) {
    throw UsageError("kernel prior rates must be positive");
  }
}

std::vector<int> parse_index_list(const std::string& text) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (trim(item).empty()) continue;
    const long long v = to_int(item, "index list");
    if (v < 1) throw UsageError("indices are 1-based: '" + text + "'");
    out.push_back(static_cast<int>(v - 1));
  }
  return out;
}

std::vector<double> parse_double_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (trim(item).empty()) continue;
    out.push_back(to_double(item, "number list"));
  }
  return out;
}

void apply_config_value(ModelConfig& config, const std::string& raw_key, const std::string& value) {
  const std::string key = trim(raw_key);
  HierarchyPriors* h = key.rfind("trans.", 0) == 0 ? &config.hyper.trans
                       : key.rfind("dur.", 0) == 0 ? &config.hyper.dur
                                                   : nullptr;
  if (key == "num_cov" || key == "num_covariates") {
    config.num_covariates = static_cast<int>(to_int(value, key));
  } else if (key == "fixed_effect") {
    config.fixed_effect = to_bool(value, key);
  } else if (key == "random_effect") {
    config.random_effect = to_bool(value, key);
  } else if (key == "trans_cov_index") {
    config.trans_cov_index = parse_index_list(value);
  } else if (key == "duration_cov_index") {
    config.duration_cov_index = parse_index_list(value);
  } else if (key == "duration_distr") {
    config.duration = DurationSpec::parse(value);
  } else if (key == "shape_prior") {
    config.duration.shape_prior = parse_double_list(value);
  } else if (key == "rate_prior") {
    config.duration.rate_prior = parse_double_list(value);
  } else if (key == "duration_incl_prev_state") {
    config.duration_incl_prev_state = to_bool(value, key);
  } else if (key == "simsize") {
    config.simsize = static_cast<int>(to_int(value, key));
  } else if (key == "burnin") {
    config.burnin = static_cast<int>(to_int(value, key));
  } else if (key == "thin") {
    config.thin = static_cast<int>(to_int(value, key));
  } else if (key == "seed" || key == "rng_seed") {
    config.rng_seed = static_cast<std::uint64_t>(to_int(value, key));
  } else if (key == "threads") {
    config.threads = static_cast<int>(to_int(value, key));
  } else if (key == "shape_sampler") {
    const std::string v = trim(value);
    if (v == "mh") config.shape_sampler = ShapeSampler::MetropolisHastings;
    else if (v == "approx") config.shape_sampler = ShapeSampler::ApproximationOnly;
    else throw UsageError("shape_sampler must be mh or approx");
  } else if (key == "state_labels") {
    std::vector<std::string> labels;
    for (auto& s : split_csv_line(value)) labels.push_back(s);
    config.state_labels = labels;
  } else if (key == "covariate_labels") {
    // One group per covariate, groups separated by ';'.
    config.covariate_labels.clear();
    std::stringstream groups(value);
    std::string group;
    while (std::getline(groups, group, ';')) config.covariate_labels.push_back(split_csv_line(group));
  } else if (key == "sequence_column") {
    config.sequence_column = to_bool(value, key);
  } else if (key == "kernel_shape_prior_rate") {
    config.hyper.kernel_shape_prior_rate = to_double(value, key);
  } else if (key == "kernel_rate_prior_rate") {
    config.hyper.kernel_rate_prior_rate = to_double(value, key);
  } else if (h != nullptr) {
    const std::string field = key.substr(key.find('.') + 1);
    if (field == "cluster_concentration") h->cluster_concentration = to_double(value, key);
    else if (field == "top_concentration") h->top_concentration = to_double(value, key);
    else if (field == "top_mean") h->top_mean = parse_double_list(value);
    else if (field == "alpha0_shape") h->alpha0.shape = to_double(value, key);
    else if (field == "alpha0_rate") h->alpha0.rate = to_double(value, key);
    else if (field == "alpha_indiv_shape") h->alpha_indiv.shape = to_double(value, key);
    else if (field == "alpha_indiv_rate") h->alpha_indiv.rate = to_double(value, key);
    else if (field == "mixing_a") h->mixing.a = to_double(value, key);
    else if (field == "mixing_b") h->mixing.b = to_double(value, key);
    else throw UsageError("unknown config key '" + key + "'");
  } else {
    throw UsageError("unknown config key '" + key + "'");
  }
}

void apply_config_text(ModelConfig& config, const std::string& text) {
  std::stringstream ss(text);
  std::string line;
  int lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    if (trim(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw UsageError("config line " + std::to_string(lineno) + ": expected key = value");
    apply_config_value(config, line.substr(0, eq), line.substr(eq + 1));
  }
}

void apply_config_file(ModelConfig& config, const std::filesystem::path& path) {
  apply_config_text(config, read_text_file(path));
}

}  // namespace bmrmm
