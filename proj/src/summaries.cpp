#include "bmrmm/summaries.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include <json.hpp>

#include "bmrmm/dur_sampler.hpp"
#include "bmrmm/errors.hpp"
#include "bmrmm/svg.hpp"
#include "bmrmm/table_io.hpp"

namespace bmrmm {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

int label_combination(const MixedDraw& draw, std::span<const int> levels, std::span<const int> cards) {
  int lc = 0, stride = 1;
  for (std::size_t j = 0; j < levels.size(); ++j) {
    lc += draw.labels[j][static_cast<std::size_t>(levels[j])] * stride;
    stride *= cards[j];
  }
  return lc;
}

std::vector<int> record_levels(const TransitionRecord& rec, const BlockInfo& info) {
  std::vector<int> levels;
  for (int j : info.covariates) levels.push_back(rec.covariates[static_cast<std::size_t>(j)]);
  if (info.previous_state) levels.push_back(rec.previous_state);
  return levels;
}

std::vector<std::string> level_labels(const PosteriorSamples& s, const BlockInfo& info, std::size_t position) {
  if (position < info.covariates.size()) {
    return s.data.covariate_labels[static_cast<std::size_t>(info.covariates[position])];
  }
  return s.data.state_labels;
}

std::string join(const std::vector<std::string>& parts, const std::string& sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

std::string cell(double v) { return std::isfinite(v) ? format_double(v) : std::string("NA"); }

// File-name-safe version of a label.
std::string slug(const std::string& s) {
  std::string out;
  for (char c : s) out += std::isalnum(static_cast<unsigned char>(c)) ? c : '_';
  return out;
}

}  // namespace

std::vector<std::string> block_covariate_names(const PosteriorSamples& s, const BlockInfo& info) {
  std::vector<std::string> out;
  for (int j : info.covariates) {
    const auto idx = static_cast<std::size_t>(j);
    out.push_back(idx < s.data.covariate_names.size() ? s.data.covariate_names[idx] : "Covariate" + std::to_string(j + 1));
  }
  if (info.previous_state) out.push_back("Prev_State");
  return out;
}

std::vector<double> cluster_count_distribution(std::span<const MixedDraw> draws, int position, int cardinality) {
  std::vector<double> out(static_cast<std::size_t>(cardinality), 0.0);
  if (draws.empty()) return out;
  for (const auto& d : draws) {
    const int k = count_clusters(d.labels[static_cast<std::size_t>(position)]);
    out[static_cast<std::size_t>(k - 1)] += 1.0;
  }
  for (double& v : out) v /= static_cast<double>(draws.size());
  return out;
}

GlobalTest global_test(std::span<const MixedDraw> draws, const BlockInfo& info, std::vector<std::string> names) {
  GlobalTest g;
  g.covariates = std::move(names);
  for (std::size_t j = 0; j < info.cardinalities.size(); ++j) {
    g.probs.push_back(cluster_count_distribution(draws, static_cast<int>(j), info.cardinalities[j]));
  }
  return g;
}

LocalStatistic local_statistic(std::span<const double> diffs, double delta) {
  if (!(delta > 0.0)) throw UsageError("delta must be positive");
  LocalStatistic s;
  if (diffs.empty()) return s;
  std::size_t null_count = 0;
  for (double d : diffs) {
    s.mean_abs_diff += std::abs(d);
    if (std::abs(d) <= delta) ++null_count;
  }
  s.mean_abs_diff /= static_cast<double>(diffs.size());
  s.null_prob = static_cast<double>(null_count) / static_cast<double>(diffs.size());
  return s;
}

std::vector<LocalTestEntry> local_test(const PosteriorSamples& s, int position, double delta) {
  if (!(delta > 0.0)) throw UsageError("delta must be positive");
  const BlockInfo& info = s.trans_info;
  if (!info.fixed) throw UsageError("local tests need the fixed effect");
  if (position < 0 || static_cast<std::size_t>(position) >= info.cardinalities.size()) {
    throw UsageError("covariate position out of range");
  }
  const auto pos = static_cast<std::size_t>(position);
  std::set<std::vector<int>> settings;
  for (const auto& rec : s.data.records) {
    auto levels = record_levels(rec, info);
    levels[pos] = -1;
    settings.insert(levels);
  }
  const int d = info.outcomes;
  const int dj = info.cardinalities[pos];
  std::vector<LocalTestEntry> out;
  std::vector<double> diffs(s.trans_draws.size());
  for (int a = 0; a < dj; ++a) {
    for (int b = a + 1; b < dj; ++b) {
      for (const auto& others : settings) {
        std::vector<int> la = others, lb = others;
        la[pos] = a;
        lb[pos] = b;
        for (int from = 0; from < d; ++from) {
          for (int to = 0; to < d; ++to) {
            for (std::size_t m = 0; m < s.trans_draws.size(); ++m) {
              const MixedDraw& draw = s.trans_draws[m];
              const int ca = label_combination(draw, la, info.cardinalities);
              const int cb = label_combination(draw, lb, info.cardinalities);
              auto at = [&](int c) {
                return draw.lambda_fixed[(static_cast<std::size_t>(c) * static_cast<std::size_t>(d) +
                                          static_cast<std::size_t>(from)) *
                                             static_cast<std::size_t>(d) +
                                         static_cast<std::size_t>(to)];
              };
              diffs[m] = ca == cb ? 0.0 : at(ca) - at(cb);
            }
            out.push_back(LocalTestEntry{position, a, b, others, from, to, local_statistic(diffs, delta)});
          }
        }
      }
    }
  }
  return out;
}

TransitionSummary transition_posterior_summary(const PosteriorSamples& s) {
  const BlockInfo& info = s.trans_info;
  TransitionSummary t;
  t.combinations = info.combinations();
  t.states = info.outcomes;
  if (!info.fixed || s.trans_draws.empty()) return t;
  const auto d = static_cast<std::size_t>(info.outcomes);
  const std::size_t cells = static_cast<std::size_t>(t.combinations) * d * d;
  t.mean.assign(cells, 0.0);
  t.sd.assign(cells, 0.0);
  std::vector<double> m2(cells, 0.0);
  // Welford updates per cell.
  for (std::size_t m = 0; m < s.trans_draws.size(); ++m) {
    const MixedDraw& draw = s.trans_draws[m];
    for (int c = 0; c < t.combinations; ++c) {
      const auto levels = combination_levels(c, info.cardinalities);
      const auto lc = static_cast<std::size_t>(label_combination(draw, levels, info.cardinalities));
      for (std::size_t k = 0; k < d * d; ++k) {
        const std::size_t idx = static_cast<std::size_t>(c) * d * d + k;
        const double v = draw.lambda_fixed[lc * d * d + k];
        const double delta = v - t.mean[idx];
        t.mean[idx] += delta / static_cast<double>(m + 1);
        m2[idx] += delta * (v - t.mean[idx]);
      }
    }
  }
  const double n = static_cast<double>(s.trans_draws.size());
  for (std::size_t k = 0; k < cells; ++k) t.sd[k] = n > 1.0 ? std::sqrt(m2[k] / (n - 1.0)) : 0.0;
  return t;
}

DurationMixtureSummary duration_mixture_summary(const PosteriorSamples& s, bool posterior_average) {
  if (!s.has_duration) throw UsageError("duration model required");
  DurationMixtureSummary out;
  out.shapes = s.dur_last.shapes;
  out.rates = s.dur_last.rates;
  const BlockInfo& info = s.dur_info;
  const auto K = static_cast<std::size_t>(info.outcomes);
  std::vector<double> weights;
  if (posterior_average) {
    weights = s.dur_record_probs_mean;
  } else {
    const DurationSampler sampler(s.data, s.config);
    weights = sampler.record_probabilities(s.dur_last);
  }
  const auto names = block_covariate_names(s, info);
  for (std::size_t j = 0; j < info.cardinalities.size(); ++j) {
    MixProbsBlock block;
    block.covariate = names[j];
    block.levels = level_labels(s, info, j);
    const auto L = static_cast<std::size_t>(info.cardinalities[j]);
    std::vector<std::vector<double>> sums(K, std::vector<double>(L, 0.0));
    std::vector<double> counts(L, 0.0);
    for (std::size_t n = 0; n < s.data.size(); ++n) {
      const auto levels = record_levels(s.data.records[n], info);
      const auto w = static_cast<std::size_t>(levels[j]);
      counts[w] += 1.0;
      for (std::size_t k = 0; k < K; ++k) sums[k][w] += weights[n * K + k];
    }
    for (std::size_t k = 0; k < K; ++k) {
      for (std::size_t w = 0; w < L; ++w) {
        sums[k][w] = counts[w] > 0.0 ? sums[k][w] / counts[w] : std::numeric_limits<double>::quiet_NaN();
      }
    }
    block.probs = std::move(sums);
    out.probs.push_back(std::move(block));
  }
  return out;
}

FitSummary summarize(const PosteriorSamples& s, const SummaryOptions& options) {
  if (!(options.delta > 0.0)) throw UsageError("delta must be positive");
  FitSummary f;
  f.delta = options.delta;
  f.state_labels = s.data.state_labels;
  const BlockInfo& ti = s.trans_info;
  f.trans_covariates = block_covariate_names(s, ti);
  for (std::size_t j = 0; j < ti.cardinalities.size(); ++j) f.trans_levels.push_back(level_labels(s, ti, j));
  for (int c = 0; c < ti.combinations(); ++c) {
    const auto levels = combination_levels(c, ti.cardinalities);
    std::vector<std::string> parts;
    for (std::size_t j = 0; j < levels.size(); ++j) {
      parts.push_back(level_labels(s, ti, j)[static_cast<std::size_t>(levels[j])]);
    }
    f.combination_labels.push_back(parts.empty() ? std::string("all") : join(parts, "."));
  }
  if (ti.fixed) {
    f.trans_global = global_test(s.trans_draws, ti, f.trans_covariates);
    for (std::size_t j = 0; j < ti.cardinalities.size(); ++j) {
      auto entries = local_test(s, static_cast<int>(j), options.delta);
      f.trans_local.insert(f.trans_local.end(), entries.begin(), entries.end());
    }
  }
  f.trans_probs = transition_posterior_summary(s);
  f.trans_indiv_mean = s.trans_indiv_mean;
  if (s.has_duration) {
    f.has_duration = true;
    f.dur_covariates = block_covariate_names(s, s.dur_info);
    std::vector<MixedDraw> mix;
    mix.reserve(s.dur_draws.size());
    for (const auto& d : s.dur_draws) mix.push_back(d.mix);
    if (s.dur_info.fixed) f.dur_global = global_test(mix, s.dur_info, f.dur_covariates);
    f.dur_mix = duration_mixture_summary(s, options.posterior_average_mix_probs);
    if (!s.loglik.empty()) f.scores = model_selection_scores(s);
  }
  return f;
}

namespace {

TextTable global_table(const GlobalTest& g) {
  TextTable t;
  t.header.push_back("num_clusters");
  for (const auto& c : g.covariates) t.header.push_back(c);
  std::size_t rows = 0;
  for (const auto& p : g.probs) rows = std::max(rows, p.size());
  for (std::size_t k = 0; k < rows; ++k) {
    std::vector<std::string> row{std::to_string(k + 1)};
    for (const auto& p : g.probs) row.push_back(format_double(k < p.size() ? p[k] : 0.0));
    t.rows.push_back(std::move(row));
  }
  return t;
}

json global_json(const GlobalTest& g) {
  json j = json::object();
  for (std::size_t c = 0; c < g.covariates.size(); ++c) j[g.covariates[c]] = g.probs[c];
  return j;
}

std::string others_label(const FitSummary& f, const LocalTestEntry& e, const std::vector<std::vector<std::string>>& labels) {
  std::vector<std::string> parts;
  for (std::size_t j = 0; j < e.others.size(); ++j) {
    if (e.others[j] < 0) continue;
    parts.push_back(f.trans_covariates[j] + "=" + labels[j][static_cast<std::size_t>(e.others[j])]);
  }
  return parts.empty() ? std::string("none") : join(parts, ";");
}

}  // namespace

void write_summary(const fs::path& dir, const FitSummary& f, bool render_svg) {
  fs::create_directories(dir / "plots");
  const auto d = static_cast<std::size_t>(f.trans_probs.states);

  const auto& trans_levels = f.trans_levels;

  json doc;
  doc["schema"] = "bmrmm-summary";
  doc["schema_version"] = kSummarySchemaVersion;
  doc["delta"] = f.delta;
  doc["state_labels"] = f.state_labels;
  json trans;
  trans["covariates"] = f.trans_covariates;
  trans["combinations"] = f.combination_labels;
  trans["global"] = global_json(f.trans_global);
  trans["probs_mean"] = f.trans_probs.mean;
  trans["probs_sd"] = f.trans_probs.sd;
  trans["indiv_mean"] = f.trans_indiv_mean;
  json local = json::array();
  for (const auto& e : f.trans_local) {
    local.push_back({{"covariate", f.trans_covariates[static_cast<std::size_t>(e.covariate)]},
                     {"level_a", e.level_a + 1},
                     {"level_b", e.level_b + 1},
                     {"others", e.others},
                     {"from", e.from + 1},
                     {"to", e.to + 1},
                     {"mean_abs_diff", e.stat.mean_abs_diff},
                     {"null_prob", e.stat.null_prob}});
  }
  trans["local"] = local;
  doc["trans"] = trans;
  if (f.has_duration) {
    json dur;
    dur["covariates"] = f.dur_covariates;
    dur["global"] = global_json(f.dur_global);
    dur["mix_params"] = {{"shape", f.dur_mix.shapes}, {"rate", f.dur_mix.rates}};
    json probs = json::object();
    for (const auto& b : f.dur_mix.probs) {
      json comps = json::array();
      for (const auto& row : b.probs) {
        json r = json::array();
        for (double v : row) r.push_back(number_or_null(v));
        comps.push_back(r);
      }
      probs[b.covariate] = {{"levels", b.levels}, {"probs", comps}};
    }
    dur["mix_probs"] = probs;
    doc["duration"] = dur;
  }
  if (f.scores) doc["model_selection"] = {{"lpml", f.scores->lpml}, {"waic", f.scores->waic}};
  write_text_file(dir / "summary.json", doc.dump(2) + "\n");

  // Flat tables.
  if (!f.trans_global.covariates.empty()) {
    write_csv(dir / "trans_global.csv", global_table(f.trans_global));
    write_csv(dir / "plots" / "global_trans.csv", global_table(f.trans_global));
  }
  if (!f.trans_probs.mean.empty()) {
    for (const auto& [name, values] : {std::pair{"mean", &f.trans_probs.mean}, std::pair{"sd", &f.trans_probs.sd}}) {
      TextTable t;
      t.header = {"combination", "previous"};
      for (const auto& s : f.state_labels) t.header.push_back(s);
      for (std::size_t c = 0; c < f.combination_labels.size(); ++c) {
        TextTable heat;
        heat.header = t.header;
        heat.header.erase(heat.header.begin());
        std::vector<std::vector<double>> matrix(d, std::vector<double>(d));
        for (std::size_t r = 0; r < d; ++r) {
          std::vector<std::string> row{f.combination_labels[c], f.state_labels[r]};
          std::vector<std::string> hrow{f.state_labels[r]};
          for (std::size_t y = 0; y < d; ++y) {
            const double v = (*values)[(c * d + r) * d + y];
            matrix[r][y] = v;
            row.push_back(format_double(v));
            hrow.push_back(format_double(v));
          }
          t.rows.push_back(std::move(row));
          heat.rows.push_back(std::move(hrow));
        }
        const std::string stem = std::string("heatmap_") + name + "_" + slug(f.combination_labels[c]);
        write_csv(dir / "plots" / (stem + ".csv"), heat);
        if (render_svg) {
          write_text_file(dir / "plots" / (stem + ".svg"),
                          svg::heatmap(std::string("Posterior ") + name + ", " + f.combination_labels[c], f.state_labels,
                                       f.state_labels, matrix));
        }
      }
      write_csv(dir / (std::string("trans_probs_") + name + ".csv"), t);
    }
  }
  if (!f.trans_local.empty()) {
    TextTable t;
    t.header = {"covariate", "level_a", "level_b", "others", "from", "to", "mean_abs_diff", "null_prob"};
    for (const auto& e : f.trans_local) {
      const auto j = static_cast<std::size_t>(e.covariate);
      t.rows.push_back({f.trans_covariates[j], trans_levels[j][static_cast<std::size_t>(e.level_a)],
                        trans_levels[j][static_cast<std::size_t>(e.level_b)], others_label(f, e, trans_levels),
                        f.state_labels[static_cast<std::size_t>(e.from)], f.state_labels[static_cast<std::size_t>(e.to)],
                        format_double(e.stat.mean_abs_diff), format_double(e.stat.null_prob)});
    }
    write_csv(dir / "trans_local.csv", t);
    // One heatmap per tested pair and setting: rows previous state, columns current state.
    std::size_t i = 0;
    while (i < f.trans_local.size()) {
      const auto& head = f.trans_local[i];
      const auto j = static_cast<std::size_t>(head.covariate);
      std::vector<std::vector<double>> diff(d, std::vector<double>(d)), null_p(d, std::vector<double>(d));
      for (std::size_t k = 0; k < d * d; ++k, ++i) {
        const auto& e = f.trans_local[i];
        diff[static_cast<std::size_t>(e.from)][static_cast<std::size_t>(e.to)] = e.stat.mean_abs_diff;
        null_p[static_cast<std::size_t>(e.from)][static_cast<std::size_t>(e.to)] = e.stat.null_prob;
      }
      const std::string stem = "local_" + slug(f.trans_covariates[j]) + "_" +
                               slug(trans_levels[j][static_cast<std::size_t>(head.level_a)]) + "_vs_" +
                               slug(trans_levels[j][static_cast<std::size_t>(head.level_b)]) + "_" +
                               slug(others_label(f, head, trans_levels));
      TextTable heat;
      heat.header = {"previous", "to", "mean_abs_diff", "null_prob"};
      for (std::size_t r = 0; r < d; ++r) {
        for (std::size_t y = 0; y < d; ++y) {
          heat.rows.push_back({f.state_labels[r], f.state_labels[y], format_double(diff[r][y]), format_double(null_p[r][y])});
        }
      }
      write_csv(dir / "plots" / (stem + ".csv"), heat);
      if (render_svg) {
        write_text_file(dir / "plots" / (stem + ".svg"),
                        svg::heatmap("Null probability, " + f.trans_covariates[j], f.state_labels, f.state_labels, null_p));
      }
    }
  }
  if (render_svg && !f.trans_global.covariates.empty()) {
    write_text_file(dir / "plots" / "global_trans.svg", svg::bar_groups("Transitions: number of clusters",
                                                                        f.trans_global.covariates, f.trans_global.probs));
  }
  if (!f.has_duration) return;
  if (!f.dur_global.covariates.empty()) {
    write_csv(dir / "dur_global.csv", global_table(f.dur_global));
    write_csv(dir / "plots" / "global_dur.csv", global_table(f.dur_global));
    if (render_svg) {
      write_text_file(dir / "plots" / "global_dur.svg",
                      svg::bar_groups("Durations: number of clusters", f.dur_global.covariates, f.dur_global.probs));
    }
  }
  TextTable params;
  params.header = {"component", "shape", "rate"};
  for (std::size_t k = 0; k < f.dur_mix.shapes.size(); ++k) {
    params.rows.push_back({std::to_string(k + 1), format_double(f.dur_mix.shapes[k]), format_double(f.dur_mix.rates[k])});
  }
  write_csv(dir / "dur_mix_params.csv", params);
  TextTable probs;
  probs.header = {"covariate", "component", "level", "prob"};
  for (const auto& b : f.dur_mix.probs) {
    for (std::size_t k = 0; k < b.probs.size(); ++k) {
      for (std::size_t w = 0; w < b.levels.size(); ++w) {
        probs.rows.push_back({b.covariate, std::to_string(k + 1), b.levels[w], cell(b.probs[k][w])});
      }
    }
  }
  write_csv(dir / "dur_mix_probs.csv", probs);
}

}  // namespace bmrmm
