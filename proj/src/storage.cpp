#include "bmrmm/storage.hpp"

#include <json.hpp>

#include "bmrmm/errors.hpp"
#include "bmrmm/table_io.hpp"

namespace bmrmm {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json priors_to_json(const HierarchyPriors& h) {
  return json{{"cluster_concentration", h.cluster_concentration},
              {"top_concentration", h.top_concentration},
              {"top_mean", h.top_mean},
              {"alpha0", {h.alpha0.shape, h.alpha0.rate}},
              {"alpha_indiv", {h.alpha_indiv.shape, h.alpha_indiv.rate}},
              {"mixing", {h.mixing.a, h.mixing.b}}};
}

HierarchyPriors priors_from_json(const json& j) {
  HierarchyPriors h;
  h.cluster_concentration = j.at("cluster_concentration").get<double>();
  h.top_concentration = j.at("top_concentration").get<double>();
  h.top_mean = j.at("top_mean").get<std::vector<double>>();
  h.alpha0 = {j.at("alpha0")[0].get<double>(), j.at("alpha0")[1].get<double>()};
  h.alpha_indiv = {j.at("alpha_indiv")[0].get<double>(), j.at("alpha_indiv")[1].get<double>()};
  h.mixing = {j.at("mixing")[0].get<double>(), j.at("mixing")[1].get<double>()};
  return h;
}

json config_json(const ModelConfig& c) {
  json j;
  j["num_covariates"] = c.num_covariates;
  j["state_labels"] = c.state_labels;
  j["covariate_labels"] = c.covariate_labels;
  j["sequence_column"] = c.sequence_column;
  j["fixed_effect"] = c.fixed_effect;
  j["random_effect"] = c.random_effect;
  j["trans_cov_index"] = c.trans_cov_index ? json(*c.trans_cov_index) : json(nullptr);
  j["duration_cov_index"] = c.duration_cov_index ? json(*c.duration_cov_index) : json(nullptr);
  const char* mode = c.duration.mode == DurationMode::Ignore       ? "ignore"
                     : c.duration.mode == DurationMode::Discretize ? "discretize"
                                                                   : "gamma_mixture";
  j["duration"] = {{"mode", mode},
                   {"unit", c.duration.unit},
                   {"shape_prior", c.duration.shape_prior},
                   {"rate_prior", c.duration.rate_prior}};
  j["duration_incl_prev_state"] = c.duration_incl_prev_state;
  j["simsize"] = c.simsize;
  j["burnin"] = c.effective_burnin();
  j["thin"] = c.thin;
  j["rng_seed"] = c.rng_seed;
  j["shape_sampler"] = c.shape_sampler == ShapeSampler::MetropolisHastings ? "mh" : "approx";
  j["hyper"] = {{"trans", priors_to_json(c.hyper.trans)},
                {"dur", priors_to_json(c.hyper.dur)},
                {"kernel_shape_prior_rate", c.hyper.kernel_shape_prior_rate},
                {"kernel_rate_prior_rate", c.hyper.kernel_rate_prior_rate}};
  return j;
}

ModelConfig config_of(const json& j) {
  ModelConfig c;
  c.num_covariates = j.at("num_covariates").get<int>();
  c.state_labels = j.at("state_labels").get<std::vector<std::string>>();
  c.covariate_labels = j.at("covariate_labels").get<std::vector<std::vector<std::string>>>();
  c.sequence_column = j.at("sequence_column").get<bool>();
  c.fixed_effect = j.at("fixed_effect").get<bool>();
  c.random_effect = j.at("random_effect").get<bool>();
  if (!j.at("trans_cov_index").is_null()) c.trans_cov_index = j["trans_cov_index"].get<std::vector<int>>();
  if (!j.at("duration_cov_index").is_null()) c.duration_cov_index = j["duration_cov_index"].get<std::vector<int>>();
  const json& d = j.at("duration");
  const std::string mode = d.at("mode").get<std::string>();
  c.duration.mode = mode == "ignore"       ? DurationMode::Ignore
                    : mode == "discretize" ? DurationMode::Discretize
                                           : DurationMode::GammaMixture;
  c.duration.unit = d.at("unit").get<double>();
  c.duration.shape_prior = d.at("shape_prior").get<std::vector<double>>();
  c.duration.rate_prior = d.at("rate_prior").get<std::vector<double>>();
  c.duration_incl_prev_state = j.at("duration_incl_prev_state").get<bool>();
  c.simsize = j.at("simsize").get<int>();
  c.burnin = j.at("burnin").get<int>();
  c.thin = j.at("thin").get<int>();
  c.rng_seed = j.at("rng_seed").get<std::uint64_t>();
  c.shape_sampler = j.at("shape_sampler").get<std::string>() == "mh" ? ShapeSampler::MetropolisHastings
                                                                     : ShapeSampler::ApproximationOnly;
  const json& h = j.at("hyper");
  c.hyper.trans = priors_from_json(h.at("trans"));
  c.hyper.dur = priors_from_json(h.at("dur"));
  c.hyper.kernel_shape_prior_rate = h.at("kernel_shape_prior_rate").get<double>();
  c.hyper.kernel_rate_prior_rate = h.at("kernel_rate_prior_rate").get<double>();
  return c;
}

json info_json(const BlockInfo& b) {
  return json{{"covariates", b.covariates},     {"previous_state", b.previous_state},
              {"cardinalities", b.cardinalities}, {"rows", b.rows},
              {"outcomes", b.outcomes},         {"individuals", b.individuals},
              {"fixed", b.fixed},               {"random", b.random}};
}

BlockInfo info_of(const json& j) {
  BlockInfo b;
  b.covariates = j.at("covariates").get<std::vector<int>>();
  b.previous_state = j.at("previous_state").get<bool>();
  b.cardinalities = j.at("cardinalities").get<std::vector<int>>();
  b.rows = j.at("rows").get<int>();
  b.outcomes = j.at("outcomes").get<int>();
  b.individuals = j.at("individuals").get<int>();
  b.fixed = j.at("fixed").get<bool>();
  b.random = j.at("random").get<bool>();
  return b;
}

json mixed_state_json(const MixedState& s) {
  return json{{"lambda_fixed", s.lambda_fixed}, {"lambda_indiv", s.lambda_indiv}, {"lambda0", s.lambda0},
              {"pi0", s.pi0},                   {"labels", s.labels},             {"mu", s.mu},
              {"alpha0", s.alpha0},             {"alpha_indiv", s.alpha_indiv},   {"from_fixed", s.from_fixed}};
}

MixedState mixed_state_of(const json& j) {
  MixedState s;
  s.lambda_fixed = j.at("lambda_fixed").get<std::vector<double>>();
  s.lambda_indiv = j.at("lambda_indiv").get<std::vector<double>>();
  s.lambda0 = j.at("lambda0").get<std::vector<double>>();
  s.pi0 = j.at("pi0").get<std::vector<double>>();
  s.labels = j.at("labels").get<std::vector<std::vector<int>>>();
  s.mu = j.at("mu").get<std::vector<std::vector<double>>>();
  s.alpha0 = j.at("alpha0").get<double>();
  s.alpha_indiv = j.at("alpha_indiv").get<double>();
  s.from_fixed = j.at("from_fixed").get<std::vector<std::uint8_t>>();
  return s;
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

json read_json(const fs::path& path) {
  try {
    return json::parse(read_text_file(path));
  } catch (const json::exception& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

// Every table starts with a 1-based row-index column so tables with no
// parameter columns still record their row count.
void write_table(const fs::path& path, const std::string& index_name, std::vector<std::string> columns,
                 const std::vector<std::vector<double>>& rows) {
  NumericTable t;
  t.header.push_back(index_name);
  for (auto& c : columns) t.header.push_back(std::move(c));
  t.rows.reserve(rows.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    std::vector<double> row;
    row.reserve(rows[r].size() + 1);
    row.push_back(static_cast<double>(r + 1));
    row.insert(row.end(), rows[r].begin(), rows[r].end());
    t.rows.push_back(std::move(row));
  }
  write_numeric_csv(path, t);
}

std::vector<std::vector<double>> read_table(const fs::path& path, std::size_t expected_columns) {
  NumericTable t = read_numeric_csv(path);
  if (t.header.size() != expected_columns + 1) {
    throw DataError(path.string() + ": expected " + std::to_string(expected_columns + 1) + " columns, found " +
                    std::to_string(t.header.size()));
  }
  std::vector<std::vector<double>> rows;
  rows.reserve(t.rows.size());
  for (auto& r : t.rows) rows.emplace_back(r.begin() + 1, r.end());
  return rows;
}

std::vector<std::string> cell_names(const BlockInfo& b) {
  std::vector<std::string> out;
  for (int c = 0; c < b.combinations(); ++c) {
    for (int r = 0; r < b.rows; ++r) {
      for (int o = 0; o < b.outcomes; ++o) {
        out.push_back("c" + std::to_string(c + 1) + ".r" + std::to_string(r + 1) + ".o" + std::to_string(o + 1));
      }
    }
  }
  return out;
}

std::vector<std::string> row_names(int rows, int outcomes) {
  std::vector<std::string> out;
  for (int r = 0; r < rows; ++r) {
    for (int o = 0; o < outcomes; ++o) out.push_back("r" + std::to_string(r + 1) + ".o" + std::to_string(o + 1));
  }
  return out;
}

std::vector<std::string> level_names(const BlockInfo& b, const char* tag) {
  std::vector<std::string> out;
  for (std::size_t j = 0; j < b.cardinalities.size(); ++j) {
    for (int l = 0; l < b.cardinalities[j]; ++l) {
      out.push_back("cov" + std::to_string(j + 1) + "." + tag + std::to_string(l + 1));
    }
  }
  return out;
}

void save_block(const fs::path& dir, const std::string& prefix, const BlockInfo& info,
                const std::vector<const MixedDraw*>& draws) {
  std::vector<std::vector<double>> clusters, mu, fixed, lambda0, conc;
  for (const MixedDraw* d : draws) {
    std::vector<double> c, m;
    for (std::size_t j = 0; j < d->labels.size(); ++j) {
      for (int l : d->labels[j]) c.push_back(l + 1);
      m.insert(m.end(), d->mu[j].begin(), d->mu[j].end());
    }
    clusters.push_back(std::move(c));
    mu.push_back(std::move(m));
    fixed.push_back(d->lambda_fixed);
    lambda0.push_back(d->lambda0);
    conc.push_back({d->alpha0, d->alpha_indiv});
  }
  write_table(dir / (prefix + "_clusters.csv"), "iteration", level_names(info, "level"), clusters);
  write_table(dir / (prefix + "_mu.csv"), "iteration", level_names(info, "cluster"), mu);
  write_table(dir / (prefix + "_lambda_fixed.csv"), "iteration", cell_names(info), fixed);
  write_table(dir / (prefix + "_lambda0.csv"), "iteration", row_names(info.rows, info.outcomes), lambda0);
  write_table(dir / (prefix + "_concentrations.csv"), "iteration", {"alpha0", "alpha_indiv"}, conc);
}

std::vector<MixedDraw> load_block(const fs::path& dir, const std::string& prefix, const BlockInfo& info,
                                  std::size_t kept) {
  std::size_t n_levels = 0;
  for (int c : info.cardinalities) n_levels += static_cast<std::size_t>(c);
  const auto clusters = read_table(dir / (prefix + "_clusters.csv"), n_levels);
  const auto mu = read_table(dir / (prefix + "_mu.csv"), n_levels);
  const auto fixed = read_table(dir / (prefix + "_lambda_fixed.csv"), cell_names(info).size());
  const auto lambda0 = read_table(dir / (prefix + "_lambda0.csv"),
                                  static_cast<std::size_t>(info.rows) * static_cast<std::size_t>(info.outcomes));
  const auto conc = read_table(dir / (prefix + "_concentrations.csv"), 2);
  for (const auto* t : {&clusters, &mu, &fixed, &lambda0, &conc}) {
    if (t->size() != kept) throw DataError(prefix + " tables do not have " + std::to_string(kept) + " rows");
  }
  std::vector<MixedDraw> out(kept);
  for (std::size_t m = 0; m < kept; ++m) {
    MixedDraw& d = out[m];
    std::size_t pos = 0;
    for (int card : info.cardinalities) {
      std::vector<int> labels;
      std::vector<double> probs;
      for (int l = 0; l < card; ++l, ++pos) {
        labels.push_back(static_cast<int>(clusters[m][pos]) - 1);
        probs.push_back(mu[m][pos]);
      }
      d.labels.push_back(std::move(labels));
      d.mu.push_back(std::move(probs));
    }
    d.lambda_fixed = fixed[m];
    d.lambda0 = lambda0[m];
    d.alpha0 = conc[m][0];
    d.alpha_indiv = conc[m][1];
  }
  return out;
}

std::vector<std::vector<double>> chunk(const std::vector<double>& flat, std::size_t width) {
  std::vector<std::vector<double>> out;
  if (width == 0) return out;
  for (std::size_t b = 0; b < flat.size(); b += width) out.emplace_back(flat.begin() + b, flat.begin() + b + width);
  return out;
}

std::vector<double> flatten(const std::vector<std::vector<double>>& rows) {
  std::vector<double> out;
  for (const auto& r : rows) out.insert(out.end(), r.begin(), r.end());
  return out;
}

std::vector<std::string> numbered(const std::string& stem, std::size_t n) {
  std::vector<std::string> out;
  for (std::size_t k = 1; k <= n; ++k) out.push_back(stem + std::to_string(k));
  return out;
}

}  // namespace

std::string config_to_json(const ModelConfig& config) { return dump(config_json(config)); }

ModelConfig config_from_json(const std::string& text) {
  try {
    return config_of(json::parse(text));
  } catch (const json::exception& e) {
    throw DataError(std::string("invalid config document: ") + e.what());
  }
}

void save_samples(const fs::path& dir, const PosteriorSamples& s) {
  fs::create_directories(dir);
  const SequenceDataset& d = s.data;

  json meta;
  meta["format"] = "bmrmm-posterior";
  meta["format_version"] = kStorageFormatVersion;
  meta["seed"] = s.seed;
  meta["chain"] = s.chain;
  meta["kept_iterations"] = s.kept();
  meta["has_duration"] = s.has_duration;
  meta["config"] = config_json(s.config);
  meta["data"] = {{"num_states", d.num_states},
                  {"num_covariates", d.num_covariates},
                  {"covariate_cardinalities", d.covariate_cardinalities},
                  {"state_labels", d.state_labels},
                  {"covariate_labels", d.covariate_labels},
                  {"num_records", d.size()},
                  {"num_sequences", d.num_sequences()},
                  {"num_individuals", d.num_individuals()},
                  {"has_durations", d.has_durations}};
  meta["trans_info"] = info_json(s.trans_info);
  if (s.has_duration) meta["dur_info"] = info_json(s.dur_info);
  json acc = json::object();
  for (const auto& [name, v] : s.acceptance.rates) {
    acc[name] = {{"accepted", v.first},
                 {"proposed", v.second},
                 {"rate", v.second ? static_cast<double>(v.first) / static_cast<double>(v.second) : 0.0}};
  }
  meta["acceptance"] = acc;
  meta["tuning"] = s.acceptance.tuning;
  write_text_file(dir / "meta.json", dump(meta));
  // Execution details vary between otherwise identical runs and stay out of meta.json.
  write_text_file(dir / "timing.json", dump(json{{"seconds", s.timing}, {"threads", s.config.threads}}));
  write_dataset(dir / "data.csv", d, true);

  std::vector<const MixedDraw*> trans;
  for (const auto& t : s.trans_draws) trans.push_back(&t);
  save_block(dir, "trans", s.trans_info, trans);
  const auto indiv_cells = static_cast<std::size_t>(s.trans_info.rows) * static_cast<std::size_t>(s.trans_info.outcomes);
  write_table(dir / "trans_indiv_mean.csv", "individual", row_names(s.trans_info.rows, s.trans_info.outcomes),
              chunk(s.trans_indiv_mean, indiv_cells));
  write_table(dir / "trans_pi_mean.csv", "individual", numbered("r", static_cast<std::size_t>(s.trans_info.rows)),
              chunk(s.trans_pi_mean, static_cast<std::size_t>(s.trans_info.rows)));
  write_text_file(dir / "trans_last_state.json", dump(mixed_state_json(s.trans_last)));

  if (!s.has_duration) return;
  std::vector<const MixedDraw*> dur;
  std::vector<std::vector<double>> shapes, rates;
  for (const auto& t : s.dur_draws) {
    dur.push_back(&t.mix);
    shapes.push_back(t.shapes);
    rates.push_back(t.rates);
  }
  const auto K = static_cast<std::size_t>(s.dur_info.outcomes);
  save_block(dir, "dur", s.dur_info, dur);
  write_table(dir / "dur_shapes.csv", "iteration", numbered("comp", K), shapes);
  write_table(dir / "dur_rates.csv", "iteration", numbered("comp", K), rates);
  write_table(dir / "dur_loglik.csv", "iteration", numbered("rec", d.size()), s.loglik);
  write_table(dir / "dur_record_probs_mean.csv", "record", numbered("comp", K), chunk(s.dur_record_probs_mean, K));
  json last = mixed_state_json(s.dur_last.mix);
  last["shapes"] = s.dur_last.shapes;
  last["rates"] = s.dur_last.rates;
  last["assignment"] = s.dur_last.assignment;
  write_text_file(dir / "dur_last_state.json", dump(last));
}

PosteriorSamples load_samples(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw DataError(dir.string() + " is not a fit directory");
  const json meta = read_json(dir / "meta.json");
  try {
    if (meta.at("format_version").get<int>() != kStorageFormatVersion) {
      throw DataError(dir.string() + ": unsupported format version " + meta["format_version"].dump());
    }
    PosteriorSamples s;
    s.config = config_of(meta.at("config"));
    s.seed = meta.at("seed").get<std::uint64_t>();
    s.chain = meta.at("chain").get<int>();
    s.has_duration = meta.at("has_duration").get<bool>();
    const auto kept = meta.at("kept_iterations").get<std::size_t>();
    const json& dm = meta.at("data");
    ParseOptions opts;
    opts.num_covariates = dm.at("num_covariates").get<int>();
    opts.state_labels = dm.at("state_labels").get<std::vector<std::string>>();
    opts.covariate_labels = dm.at("covariate_labels").get<std::vector<std::vector<std::string>>>();
    opts.sequence_column = true;
    s.data = parse_dataset(dir / "data.csv", opts);
    const json timing = read_json(dir / "timing.json");
    s.timing = timing.at("seconds").get<std::map<std::string, double>>();
    s.config.threads = timing.value("threads", 1);
    for (const auto& [name, v] : meta.at("acceptance").items()) {
      s.acceptance.rates[name] = {v.at("accepted").get<long long>(), v.at("proposed").get<long long>()};
    }
    s.acceptance.tuning = meta.at("tuning").get<std::map<std::string, double>>();

    s.trans_info = info_of(meta.at("trans_info"));
    s.trans_draws = load_block(dir, "trans", s.trans_info, kept);
    const auto cells = static_cast<std::size_t>(s.trans_info.rows) * static_cast<std::size_t>(s.trans_info.outcomes);
    s.trans_indiv_mean = flatten(read_table(dir / "trans_indiv_mean.csv", cells));
    s.trans_pi_mean = flatten(read_table(dir / "trans_pi_mean.csv", static_cast<std::size_t>(s.trans_info.rows)));
    s.trans_last = mixed_state_of(read_json(dir / "trans_last_state.json"));

    if (s.has_duration) {
      s.dur_info = info_of(meta.at("dur_info"));
      const auto K = static_cast<std::size_t>(s.dur_info.outcomes);
      const auto mix = load_block(dir, "dur", s.dur_info, kept);
      const auto shapes = read_table(dir / "dur_shapes.csv", K);
      const auto rates = read_table(dir / "dur_rates.csv", K);
      if (shapes.size() != kept || rates.size() != kept) throw DataError("kernel tables have the wrong row count");
      for (std::size_t m = 0; m < kept; ++m) s.dur_draws.push_back(DurationDraw{mix[m], shapes[m], rates[m]});
      s.loglik = read_table(dir / "dur_loglik.csv", s.data.size());
      if (s.loglik.size() != kept) throw DataError("dur_loglik.csv has the wrong row count");
      s.dur_record_probs_mean = flatten(read_table(dir / "dur_record_probs_mean.csv", K));
      const json last = read_json(dir / "dur_last_state.json");
      s.dur_last.mix = mixed_state_of(last);
      s.dur_last.shapes = last.at("shapes").get<std::vector<double>>();
      s.dur_last.rates = last.at("rates").get<std::vector<double>>();
      s.dur_last.assignment = last.at("assignment").get<std::vector<int>>();
    }
    return s;
  } catch (const json::exception& e) {
    throw DataError(dir.string() + "/meta.json: " + e.what());
  }
}

}  // namespace bmrmm
