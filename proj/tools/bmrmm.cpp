// bmrmm: fit, summarize, diagnose, score and simulate Markov (renewal)
// mixed models from the command line.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "bmrmm/config.hpp"
#include "bmrmm/datamodel.hpp"
#include "bmrmm/diagnostics.hpp"
#include "bmrmm/engine.hpp"
#include "bmrmm/errors.hpp"
#include "bmrmm/model_selection.hpp"
#include "bmrmm/simulate.hpp"
#include "bmrmm/storage.hpp"
#include "bmrmm/summaries.hpp"
#include "bmrmm/svg.hpp"
#include "bmrmm/table_io.hpp"

namespace fs = std::filesystem;
using namespace bmrmm;

namespace {

fs::path output_root() {
  const char* env = std::getenv("BMRMM_OUTPUT_ROOT");
  return env && *env ? fs::path(env) : fs::path("bmrmm-out");
}

std::vector<std::vector<std::string>> parse_label_groups(const std::string& text) {
  std::vector<std::vector<std::string>> out;
  std::stringstream ss(text);
  std::string group;
  while (std::getline(ss, group, ';')) out.push_back(split_csv_line(group));
  return out;
}

std::vector<int> parse_int_list(const std::string& text) {
  std::vector<int> out;
  for (double v : parse_double_list(text)) {
    if (v != static_cast<int>(v)) throw UsageError("expected integers in '" + text + "'");
    out.push_back(static_cast<int>(v));
  }
  return out;
}

struct FitArgs {
  std::string data;
  std::string config_file;
  std::optional<int> num_cov;
  std::string trans_cov_index;
  std::string duration_cov_index;
  std::string duration_distr;
  std::string shape_prior;
  std::string rate_prior;
  bool no_fixed = false;
  bool no_random = false;
  bool no_prev_state = false;
  std::optional<int> simsize;
  std::optional<int> burnin;
  std::optional<int> thin;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  std::string state_labels;
  std::string cov_labels;
  bool sequence_column = false;
  std::string shape_sampler;
  int chains = 1;
  bool serial_chains = false;
  std::string out;
};

int cmd_fit(const FitArgs& a) {
  ModelConfig cfg;
  if (!a.config_file.empty()) apply_config_file(cfg, a.config_file);
  if (a.num_cov) cfg.num_covariates = *a.num_cov;
  if (!a.trans_cov_index.empty()) cfg.trans_cov_index = parse_index_list(a.trans_cov_index);
  if (!a.duration_cov_index.empty()) cfg.duration_cov_index = parse_index_list(a.duration_cov_index);
  if (!a.duration_distr.empty()) cfg.duration = DurationSpec::parse(a.duration_distr);
  if (!a.shape_prior.empty()) cfg.duration.shape_prior = parse_double_list(a.shape_prior);
  if (!a.rate_prior.empty()) cfg.duration.rate_prior = parse_double_list(a.rate_prior);
  if (a.no_fixed) cfg.fixed_effect = false;
  if (a.no_random) cfg.random_effect = false;
  if (a.no_prev_state) cfg.duration_incl_prev_state = false;
  if (a.simsize) cfg.simsize = *a.simsize;
  if (a.burnin) cfg.burnin = *a.burnin;
  if (a.thin) cfg.thin = *a.thin;
  if (a.seed) cfg.rng_seed = *a.seed;
  if (a.threads) cfg.threads = *a.threads;
  if (!a.state_labels.empty()) cfg.state_labels = split_csv_line(a.state_labels);
  if (!a.cov_labels.empty()) cfg.covariate_labels = parse_label_groups(a.cov_labels);
  if (a.sequence_column) cfg.sequence_column = true;
  if (!a.shape_sampler.empty()) apply_config_value(cfg, "shape_sampler", a.shape_sampler);
  if (a.chains < 1) throw UsageError("--chains must be at least 1");
  cfg.validate();

  const SequenceDataset data = parse_dataset(a.data, cfg);
  const fs::path out = a.out.empty() ? output_root() / ("fit-seed" + std::to_string(cfg.rng_seed)) : fs::path(a.out);

  if (a.chains == 1) {
    const PosteriorSamples s = fit(data, cfg);
    save_samples(out, s);
    std::cout << "wrote " << s.kept() << " kept iterations to " << out.string() << "\n";
    return 0;
  }
  const auto runs = run_chains(data, cfg, a.chains, !a.serial_chains);
  for (const auto& s : runs) {
    const fs::path dir = out / ("chain" + std::to_string(s.chain + 1));
    save_samples(dir, s);
    std::cout << "wrote " << s.kept() << " kept iterations to " << dir.string() << "\n";
  }
  return 0;
}

struct SummaryArgs {
  std::string fit;
  std::string out;
  double delta = 0.02;
  bool svg = false;
  bool average = false;
};

int cmd_summary(const SummaryArgs& a) {
  const PosteriorSamples s = load_samples(a.fit);
  SummaryOptions opt;
  opt.delta = a.delta;
  opt.posterior_average_mix_probs = a.average;
  const FitSummary f = summarize(s, opt);
  const fs::path out = a.out.empty() ? fs::path(a.fit).parent_path() / (fs::path(a.fit).filename().string() + "-summary")
                                     : fs::path(a.out);
  write_summary(out, f, a.svg);

  std::cout << "transition global test (posterior P(#clusters = k))\n";
  for (std::size_t j = 0; j < f.trans_global.covariates.size(); ++j) {
    std::cout << "  " << f.trans_global.covariates[j] << ":";
    for (double p : f.trans_global.probs[j]) std::cout << ' ' << format_double(p);
    std::cout << "\n";
  }
  if (f.has_duration) {
    std::cout << "duration global test\n";
    for (std::size_t j = 0; j < f.dur_global.covariates.size(); ++j) {
      std::cout << "  " << f.dur_global.covariates[j] << ":";
      for (double p : f.dur_global.probs[j]) std::cout << ' ' << format_double(p);
      std::cout << "\n";
    }
  }
  std::cout << "summary written to " << out.string() << "\n";
  return 0;
}

struct DiagArgs {
  std::string fit;
  std::string out;
  std::vector<std::string> transitions;
  std::string cov_comb;
  std::vector<int> components;
  std::optional<int> max_lag;
  bool svg = false;
};

int cmd_diag(const DiagArgs& a) {
  const PosteriorSamples s = load_samples(a.fit);
  std::vector<TraceSelector> selectors;
  std::vector<int> comb = a.cov_comb.empty() ? std::vector<int>(s.trans_info.cardinalities.size(), 1)
                                             : parse_int_list(a.cov_comb);
  for (const auto& t : a.transitions) {
    const auto ft = parse_int_list(t);
    if (ft.size() != 2) throw UsageError("--transition expects 'from,to', got '" + t + "'");
    selectors.push_back(TraceSelector::transition(comb, ft[0], ft[1]));
  }
  std::vector<int> components = a.components;
  if (selectors.empty() && components.empty()) {
    selectors.push_back(TraceSelector::transition(comb, 1, 1));
    if (s.has_duration) {
      for (int k = 1; k <= s.config.duration.components(); ++k) components.push_back(k);
    }
  }
  if (!components.empty() && !s.has_duration) throw UsageError("--component needs a fit with a gamma-mixture duration model");
  for (int k : components) {
    selectors.push_back(TraceSelector::shape(k));
    selectors.push_back(TraceSelector::rate(k));
  }

  NumericTable traces{{"iteration"}, {}};
  std::vector<std::vector<double>> series;
  for (const auto& sel : selectors) {
    traces.header.push_back(sel.name());
    series.push_back(trace(s, sel));
  }
  const std::size_t n = series.front().size();
  if (n < 2) throw UsageError("diagnostics need at least two kept iterations");
  for (std::size_t t = 0; t < n; ++t) {
    std::vector<double> row{static_cast<double>(t + 1)};
    for (const auto& x : series) row.push_back(x[t]);
    traces.rows.push_back(std::move(row));
  }
  NumericTable acfs{{"lag"}, {}};
  std::vector<std::vector<double>> acf_values;
  for (std::size_t i = 0; i < series.size(); ++i) {
    acfs.header.push_back(traces.header[i + 1]);
    acf_values.push_back(acf(series[i], a.max_lag));
  }
  for (std::size_t h = 0; h < acf_values.front().size(); ++h) {
    std::vector<double> row{static_cast<double>(h)};
    for (const auto& r : acf_values) row.push_back(r[h]);
    acfs.rows.push_back(std::move(row));
  }

  const fs::path out = a.out.empty() ? fs::path(a.fit).parent_path() / (fs::path(a.fit).filename().string() + "-diag")
                                     : fs::path(a.out);
  fs::create_directories(out);
  write_numeric_csv(out / "trace.csv", traces);
  write_numeric_csv(out / "acf.csv", acfs);
  if (a.svg) {
    for (std::size_t i = 0; i < series.size(); ++i) {
      const std::string name = traces.header[i + 1];
      write_text_file(out / ("trace_" + name + ".svg"), svg::line_plot("trace " + name, series[i]));
      write_text_file(out / ("acf_" + name + ".svg"), svg::line_plot("acf " + name, acf_values[i]));
    }
  }
  std::cout << "wrote " << series.size() << " trace/acf series to " << out.string() << "\n";
  return 0;
}

int cmd_select(const std::string& fit_dir) {
  const PosteriorSamples s = load_samples(fit_dir);
  const ModelScores sc = model_selection_scores(s);
  std::cout << "LPML " << format_double(sc.lpml) << "\n";
  std::cout << "WAIC " << format_double(sc.waic) << "\n";
  return 0;
}

struct SimulateArgs {
  std::string kind = "foxp2-like";
  std::uint64_t seed = 1;
  std::string out;
  int individuals = 0;
  int sequences = 0;
  int min_length = 0;
  int max_length = 0;
};

int cmd_simulate(const SimulateArgs& a) {
  const DemoKind kind = parse_demo_kind(a.kind);
  const DemoCorpus c = make_demo_corpus(kind, a.seed, {a.individuals, a.sequences, a.min_length, a.max_length});
  const fs::path out = a.out.empty() ? output_root() / (to_string(kind) + "-seed" + std::to_string(a.seed))
                                     : fs::path(a.out);
  fs::create_directories(out);
  write_dataset(out / "data.csv", c.data, true);
  write_text_file(out / "truth.json", ground_truth_json(c.spec));

  std::string conf = "# settings matching data.csv\n";
  conf += "num_covariates = " + std::to_string(c.data.num_covariates) + "\n";
  conf += "sequence_column = true\n";
  std::string states, covs;
  for (std::size_t k = 0; k < c.data.state_labels.size(); ++k) states += (k ? "," : "") + c.data.state_labels[k];
  for (std::size_t j = 0; j < c.data.covariate_labels.size(); ++j) {
    if (j) covs += ";";
    for (std::size_t l = 0; l < c.data.covariate_labels[j].size(); ++l) {
      covs += (l ? "," : "") + c.data.covariate_labels[j][l];
    }
  }
  conf += "state_labels = " + states + "\n";
  conf += "covariate_labels = " + covs + "\n";
  write_text_file(out / "data.conf", conf);
  std::cout << "wrote " << c.data.size() << " transitions in " << c.data.num_sequences() << " sequences to "
            << out.string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bayesian Markov (renewal) mixed models for categorical sequences"};
  app.require_subcommand(1);

  FitArgs fa;
  auto* fit_cmd = app.add_subcommand("fit", "Run the MCMC sampler and store the posterior draws");
  fit_cmd->add_option("--data", fa.data, "Input CSV")->required()->check(CLI::ExistingFile);
  fit_cmd->add_option("--config", fa.config_file, "key = value settings file; flags override it")
      ->check(CLI::ExistingFile);
  fit_cmd->add_option("--num-cov", fa.num_cov, "Number of covariate columns");
  fit_cmd->add_option("--trans-cov-index", fa.trans_cov_index, "1-based covariates clustered for transitions");
  fit_cmd->add_option("--duration-cov-index", fa.duration_cov_index, "1-based covariates clustered for durations");
  fit_cmd->add_option("--duration-distr", fa.duration_distr, "ignore | dirichlet:<unit> | gamma:<K>");
  fit_cmd->add_option("--shape-prior", fa.shape_prior, "Gamma-prior shapes of the kernel shapes, e.g. 1,1");
  fit_cmd->add_option("--rate-prior", fa.rate_prior, "Gamma-prior shapes of the kernel rates, e.g. 1,1");
  fit_cmd->add_flag("--no-fixed-effect", fa.no_fixed, "Drop the covariate-driven component");
  fit_cmd->add_flag("--no-random-effect", fa.no_random, "Drop the individual component");
  fit_cmd->add_flag("--no-duration-prev-state", fa.no_prev_state, "Do not cluster durations by previous state");
  fit_cmd->add_option("--simsize", fa.simsize, "Total sweeps (default 10000)");
  fit_cmd->add_option("--burnin", fa.burnin, "Burn-in sweeps (default simsize/2)");
  fit_cmd->add_option("--thin", fa.thin, "Keep every n-th sweep after burn-in");
  fit_cmd->add_option("--seed", fa.seed, "Root random seed");
  fit_cmd->add_option("--threads", fa.threads, "OpenMP threads for record kernels (0 = default)");
  fit_cmd->add_option("--state-labels", fa.state_labels, "Comma-separated state names");
  fit_cmd->add_option("--cov-labels", fa.cov_labels, "Level names, e.g. 'F,W;U,L,A'");
  fit_cmd->add_flag("--sequence-column", fa.sequence_column, "Input has a leading sequence-id column");
  fit_cmd->add_option("--shape-sampler", fa.shape_sampler, "mh | approx");
  fit_cmd->add_option("--chains", fa.chains, "Independent chains, stored as <out>/chain<c>");
  fit_cmd->add_flag("--serial-chains", fa.serial_chains, "Run chains one after another");
  fit_cmd->add_option("--out", fa.out, "Output directory");

  SummaryArgs sa;
  auto* sum_cmd = app.add_subcommand("summary", "Global and local tests, posterior tables and plot data");
  sum_cmd->add_option("--fit", sa.fit, "Fit directory")->required()->check(CLI::ExistingDirectory);
  sum_cmd->add_option("--out", sa.out, "Output directory (default <fit>-summary)");
  sum_cmd->add_option("--delta", sa.delta, "Local-test threshold")->capture_default_str();
  sum_cmd->add_flag("--svg", sa.svg, "Also render SVG figures");
  sum_cmd->add_flag("--mix-probs-average", sa.average, "Posterior-average mixture probabilities");

  DiagArgs da;
  auto* diag_cmd = app.add_subcommand("diag", "Trace and autocorrelation tables");
  diag_cmd->add_option("--fit", da.fit, "Fit directory")->required()->check(CLI::ExistingDirectory);
  diag_cmd->add_option("--out", da.out, "Output directory (default <fit>-diag)");
  diag_cmd->add_option("--transition", da.transitions, "from,to (1-based); repeatable");
  diag_cmd->add_option("--cov-comb", da.cov_comb, "Covariate levels, e.g. 1,2");
  diag_cmd->add_option("--component", da.components, "Gamma component; repeatable");
  diag_cmd->add_option("--max-lag", da.max_lag, "Largest ACF lag");
  diag_cmd->add_flag("--svg", da.svg, "Also render SVG figures");

  std::string select_fit;
  auto* sel_cmd = app.add_subcommand("select", "Print LPML and WAIC of a gamma-mixture fit");
  sel_cmd->add_option("--fit", select_fit, "Fit directory")->required()->check(CLI::ExistingDirectory);

  SimulateArgs ma;
  auto* sim_cmd = app.add_subcommand("simulate", "Write a synthetic demo corpus with its ground truth");
  sim_cmd->add_option("--kind", ma.kind, "foxp2-like | asthma-like")->capture_default_str();
  sim_cmd->add_option("--seed", ma.seed, "Seed")->capture_default_str();
  sim_cmd->add_option("--out", ma.out, "Output directory");
  sim_cmd->add_option("--individuals", ma.individuals, "Override the number of individuals");
  sim_cmd->add_option("--sequences", ma.sequences, "Override sequences per individual");
  sim_cmd->add_option("--min-length", ma.min_length, "Override the shortest sequence length");
  sim_cmd->add_option("--max-length", ma.max_length, "Override the longest sequence length");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*fit_cmd) return cmd_fit(fa);
    if (*sum_cmd) return cmd_summary(sa);
    if (*diag_cmd) return cmd_diag(da);
    if (*sel_cmd) return cmd_select(select_fit);
    if (*sim_cmd) return cmd_simulate(ma);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 2;
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
