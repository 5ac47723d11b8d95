#include "bmrmm/diagnostics.hpp"

#include <algorithm>

#include "bmrmm/errors.hpp"

namespace bmrmm {

TraceSelector TraceSelector::transition(std::vector<int> cov_comb, int from, int to) {
  TraceSelector s;
  s.cov_comb = std::move(cov_comb);
  s.from = from;
  s.to = to;
  return s;
}

TraceSelector TraceSelector::shape(int component) {
  TraceSelector s;
  s.kind = Kind::KernelShape;
  s.component = component;
  return s;
}

TraceSelector TraceSelector::rate(int component) {
  TraceSelector s;
  s.kind = Kind::KernelRate;
  s.component = component;
  return s;
}

std::string TraceSelector::name() const {
  if (kind == Kind::KernelShape) return "shape.comp" + std::to_string(component);
  if (kind == Kind::KernelRate) return "rate.comp" + std::to_string(component);
  std::string out = "trans";
  for (int l : cov_comb) out += "." + std::to_string(l);
  return out + "." + std::to_string(from) + "to" + std::to_string(to);
}

std::vector<double> trace(const PosteriorSamples& samples, const TraceSelector& sel) {
  std::vector<double> out;
  if (sel.kind != TraceSelector::Kind::Transition) {
    if (!samples.has_duration) throw UsageError("kernel selectors need a gamma-mixture duration fit");
    const int K = samples.dur_info.outcomes;
    if (sel.component < 1 || sel.component > K) {
      throw UsageError("component " + std::to_string(sel.component) + " out of range 1.." + std::to_string(K));
    }
    const auto k = static_cast<std::size_t>(sel.component - 1);
    for (const auto& d : samples.dur_draws) {
      out.push_back(sel.kind == TraceSelector::Kind::KernelShape ? d.shapes[k] : d.rates[k]);
    }
    return out;
  }
  const BlockInfo& info = samples.trans_info;
  if (!info.fixed) throw UsageError("transition traces need the fixed effect");
  if (sel.cov_comb.size() != info.cardinalities.size()) {
    throw UsageError("cov-comb needs " + std::to_string(info.cardinalities.size()) + " levels");
  }
  for (std::size_t j = 0; j < sel.cov_comb.size(); ++j) {
    if (sel.cov_comb[j] < 1 || sel.cov_comb[j] > info.cardinalities[j]) {
      throw UsageError("cov-comb level " + std::to_string(sel.cov_comb[j]) + " out of range for covariate " +
                       std::to_string(j + 1));
    }
  }
  const int d = info.outcomes;
  if (sel.from < 1 || sel.from > d || sel.to < 1 || sel.to > d) {
    throw UsageError("transition states must lie in 1.." + std::to_string(d));
  }
  for (const auto& draw : samples.trans_draws) {
    int lc = 0, stride = 1;
    for (std::size_t j = 0; j < sel.cov_comb.size(); ++j) {
      lc += draw.labels[j][static_cast<std::size_t>(sel.cov_comb[j] - 1)] * stride;
      stride *= info.cardinalities[j];
    }
    const auto idx = (static_cast<std::size_t>(lc) * static_cast<std::size_t>(d) + static_cast<std::size_t>(sel.from - 1)) *
                         static_cast<std::size_t>(d) +
                     static_cast<std::size_t>(sel.to - 1);
    out.push_back(draw.lambda_fixed[idx]);
  }
  return out;
}

std::vector<double> acf(std::span<const double> x, std::optional<int> max_lag) {
  const std::size_t n = x.size();
  if (n < 2) throw UsageError("autocorrelation needs at least two values");
  const int lag_cap = static_cast<int>(n) - 1;
  const int L = max_lag ? *max_lag : std::min(50, lag_cap);
  if (L < 0 || L > lag_cap) throw UsageError("max_lag must lie in 0.." + std::to_string(lag_cap));
  if (std::all_of(x.begin(), x.end(), [&](double v) { return v == x[0]; })) {
    throw NumericalError("autocorrelation of a constant series is undefined");
  }
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= static_cast<double>(n);
  double c0 = 0.0;
  for (double v : x) c0 += (v - mean) * (v - mean);
  if (!(c0 > 0.0)) throw NumericalError("autocorrelation of a constant series is undefined");
  std::vector<double> out(static_cast<std::size_t>(L) + 1);
  out[0] = 1.0;
  for (int h = 1; h <= L; ++h) {
    double c = 0.0;
    for (std::size_t t = 0; t + static_cast<std::size_t>(h) < n; ++t) {
      c += (x[t] - mean) * (x[t + static_cast<std::size_t>(h)] - mean);
    }
    out[static_cast<std::size_t>(h)] = c / c0;
  }
  return out;
}

}  // namespace bmrmm
