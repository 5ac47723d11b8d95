#include "bmrmm/engine.hpp"

#include <omp.h>

#include <chrono>
#include <exception>
#include <optional>

#include "bmrmm/errors.hpp"

namespace bmrmm {

namespace {

constexpr int kAdaptInterval = 50;
constexpr double kTargetLow = 0.2;
constexpr double kTargetHigh = 0.5;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

// Rescales one proposal from its acceptance over the last window.
class Adapter {
 public:
  void adapt(const AcceptanceCounter& total, double& scale, bool larger_is_bolder) {
    const long long a = total.accepted - last_.accepted;
    const long long p = total.proposed - last_.proposed;
    last_ = total;
    if (p == 0) return;
    const double rate = static_cast<double>(a) / static_cast<double>(p);
    double factor = 1.0;
    if (rate < kTargetLow) factor = 0.7;
    else if (rate > kTargetHigh) factor = 1.0 / 0.7;
    scale = larger_is_bolder ? scale * factor : scale / factor;
  }

 private:
  AcceptanceCounter last_;
};

struct BlockAdapter {
  Adapter lambda0, alpha0, alpha_indiv;

  void adapt(const MixedAcceptance& acc, MixedTuning& tuning) {
    // A larger Dirichlet concentration gives smaller lambda0 moves.
    lambda0.adapt(acc.lambda0, tuning.lambda0_concentration, false);
    alpha0.adapt(acc.alpha0, tuning.alpha0_step, true);
    alpha_indiv.adapt(acc.alpha_indiv, tuning.alpha_indiv_step, true);
  }
};

void record_block(AcceptanceSummary& out, const std::string& prefix, const MixedAcceptance& acc,
                  const MixedTuning& tuning) {
  out.rates[prefix + ".lambda0"] = {acc.lambda0.accepted, acc.lambda0.proposed};
  out.rates[prefix + ".alpha0"] = {acc.alpha0.accepted, acc.alpha0.proposed};
  out.rates[prefix + ".alpha_indiv"] = {acc.alpha_indiv.accepted, acc.alpha_indiv.proposed};
  out.rates[prefix + ".clusters"] = {acc.clusters.accepted, acc.clusters.proposed};
  out.tuning[prefix + ".lambda0_concentration"] = tuning.lambda0_concentration;
  out.tuning[prefix + ".alpha0_step"] = tuning.alpha0_step;
  out.tuning[prefix + ".alpha_indiv_step"] = tuning.alpha_indiv_step;
}

void add_into(std::vector<double>& into, std::span<const double> from) {
  if (into.empty()) into.assign(from.size(), 0.0);
  for (std::size_t k = 0; k < into.size(); ++k) into[k] += from[k];
}

}  // namespace

MixedDraw snapshot(const MixedState& state) {
  return MixedDraw{state.lambda_fixed, state.lambda0, state.labels, state.mu, state.alpha0, state.alpha_indiv};
}

int BlockInfo::combinations() const {
  int n = 1;
  for (int c : cardinalities) n *= c;
  return n;
}

BlockInfo describe(const TransitionSampler& sampler) {
  const auto& l = sampler.block().layout();
  return BlockInfo{{sampler.covariates().begin(), sampler.covariates().end()},
                   false,
                   l.cardinalities,
                   l.rows,
                   l.outcomes,
                   l.individuals,
                   sampler.block().flags().fixed,
                   sampler.block().flags().random};
}

BlockInfo describe(const DurationSampler& sampler) {
  const auto& l = sampler.block().layout();
  return BlockInfo{{sampler.covariates().begin(), sampler.covariates().end()},
                   sampler.includes_previous_state(),
                   l.cardinalities,
                   l.rows,
                   l.outcomes,
                   l.individuals,
                   sampler.block().flags().fixed,
                   sampler.block().flags().random};
}

PosteriorSamples fit(const SequenceDataset& data, const ModelConfig& config, const FitOptions& options) {
  const auto start = Clock::now();
  config.validate();
  data.validate();
  if (config.num_covariates != data.num_covariates) {
    throw UsageError("config expects " + std::to_string(config.num_covariates) + " covariates but the data has " +
                     std::to_string(data.num_covariates));
  }

  PosteriorSamples out;
  out.config = config;
  out.seed = config.rng_seed;
  if (config.duration.mode == DurationMode::Discretize) {
    out.data = discretize_durations(data, config.duration.unit);
  } else {
    if (config.duration.mode == DurationMode::GammaMixture && !data.has_durations) {
      throw DataError("duration mixture requested but the data has no duration column");
    }
    out.data = data;
  }
  const SequenceDataset& work = out.data;

  const ExecPolicy policy{options.parallel_kernels || config.threads != 1 ? kernels::Exec::Parallel
                                                                          : kernels::Exec::Serial,
                          config.threads};
  Rng rng(config.rng_seed);

  const TransitionSampler trans(work, config);
  out.trans_info = describe(trans);
  TransitionState ts = trans.initial_state(rng);
  MixedTuning trans_tuning = trans.block().default_tuning();
  MixedAcceptance trans_acc;
  BlockAdapter trans_adapter;

  std::optional<DurationSampler> dur;
  DurationState ds;
  MixedTuning dur_tuning;
  DurationAcceptance dur_acc;
  BlockAdapter dur_adapter;
  if (config.duration.mode == DurationMode::GammaMixture) {
    dur.emplace(work, config);
    out.has_duration = true;
    out.dur_info = describe(*dur);
    ds = dur->initial_state(rng);
    dur_tuning = dur->block().default_tuning();
  }
  out.timing["initialize"] = seconds_since(start);

  const int burnin = config.effective_burnin();
  const int kept = config.kept_iterations();
  out.trans_draws.reserve(static_cast<std::size_t>(kept));
  if (dur) {
    out.dur_draws.reserve(static_cast<std::size_t>(kept));
    out.loglik.reserve(static_cast<std::size_t>(kept));
  }

  auto verify = [&](int iteration) {
    std::string err = trans.block().check_invariants(ts);
    if (err.empty() && dur) err = dur->check_invariants(ds);
    if (!err.empty()) {
      throw NumericalError("invariant violated after iteration " + std::to_string(iteration) + ": " + err);
    }
  };

  const auto sampling = Clock::now();
  for (int t = 1; t <= config.simsize; ++t) {
    trans.sweep(ts, trans_tuning, trans_acc, rng, policy);
    if (dur) dur->sweep(ds, dur_tuning, dur_acc, rng, policy);
    if (options.check_invariants) verify(t);
    if (options.observer) options.observer(t, ts, dur ? &ds : nullptr);

    if (t <= burnin && t % kAdaptInterval == 0) {
      trans_adapter.adapt(trans_acc, trans_tuning);
      if (dur) dur_adapter.adapt(dur_acc.mix, dur_tuning);
    }
    if (t == burnin) {
      trans_acc = {};
      dur_acc = {};
      out.timing["burnin"] = seconds_since(sampling);
    }
    if (t <= burnin || (t - burnin) % config.thin != 0) continue;
    if (static_cast<int>(out.trans_draws.size()) == kept) continue;

    out.trans_draws.push_back(snapshot(ts));
    if (trans.block().flags().random) {
      add_into(out.trans_indiv_mean, ts.lambda_indiv);
      if (trans.block().flags().fixed) add_into(out.trans_pi_mean, ts.pi0);
    }
    if (dur) {
      out.dur_draws.push_back(DurationDraw{snapshot(ds.mix), ds.shapes, ds.rates});
      std::vector<double> ll(dur->size());
      dur->loglik(ds, ll, policy);
      out.loglik.push_back(std::move(ll));
      add_into(out.dur_record_probs_mean, dur->record_probabilities(ds, policy));
    }
    if (static_cast<int>(out.trans_draws.size()) == kept) {
      out.trans_last = ts;
      if (dur) out.dur_last = ds;
    }
  }
  out.timing["sampling"] = seconds_since(sampling);

  const auto n_kept = static_cast<double>(out.trans_draws.size());
  if (n_kept > 0) {
    for (double& v : out.trans_indiv_mean) v /= n_kept;
    for (double& v : out.trans_pi_mean) v /= n_kept;
    for (double& v : out.dur_record_probs_mean) v /= n_kept;
  }
  if (kept == 0) {
    out.trans_last = std::move(ts);
    if (dur) out.dur_last = std::move(ds);
  }
  record_block(out.acceptance, "trans", trans_acc, trans_tuning);
  if (dur) {
    record_block(out.acceptance, "dur", dur_acc.mix, dur_tuning);
    for (std::size_t k = 0; k < dur_acc.shapes.size(); ++k) {
      out.acceptance.rates["dur.shape." + std::to_string(k + 1)] = {dur_acc.shapes[k].accepted,
                                                                   dur_acc.shapes[k].proposed};
    }
  }
  out.timing["total"] = seconds_since(start);
  return out;
}

std::vector<PosteriorSamples> run_chains(const SequenceDataset& data, const ModelConfig& config, int chains,
                                         bool parallel_chains, const FitOptions& options) {
  if (chains < 1) throw UsageError("number of chains must be at least 1");
  config.validate();
  std::vector<PosteriorSamples> out(static_cast<std::size_t>(chains));
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(chains));
#pragma omp parallel for schedule(dynamic) if (parallel_chains && chains > 1)
  for (int c = 0; c < chains; ++c) {
    try {
      ModelConfig chain_config = config;
      chain_config.rng_seed = derive_chain_seed(config.rng_seed, static_cast<std::uint64_t>(c));
      out[static_cast<std::size_t>(c)] = fit(data, chain_config, options);
      out[static_cast<std::size_t>(c)].chain = c;
    } catch (...) {
      errors[static_cast<std::size_t>(c)] = std::current_exception();
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

}  // namespace bmrmm
