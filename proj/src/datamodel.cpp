#include "bmrmm/datamodel.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <sstream>

#include "bmrmm/errors.hpp"
#include "bmrmm/table_io.hpp"

namespace bmrmm {

namespace {

std::string where(std::size_t row, const std::string& column) {
  // Data rows are numbered from 1; the header is line 1 of the file.
  return "row " + std::to_string(row + 1) + " (line " + std::to_string(row + 2) + "), column '" + column + "'";
}

int parse_code(const std::string& cell, std::size_t row, const std::string& column) {
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
  if (ec != std::errc() || ptr != cell.data() + cell.size() || !std::isfinite(value)) {
    throw DataError(where(row, column) + ": '" + cell + "' is not a number");
  }
  if (value != std::floor(value)) throw DataError(where(row, column) + ": code '" + cell + "' is not an integer");
  if (value < 1.0) throw DataError(where(row, column) + ": code '" + cell + "' must be a positive integer");
  if (value > 1e6) throw DataError(where(row, column) + ": code '" + cell + "' is implausibly large");
  return static_cast<int>(value);
}

std::int64_t parse_id(const std::string& cell, std::size_t row, const std::string& column) {
  std::int64_t value = 0;
  auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
  if (ec != std::errc() || ptr != cell.data() + cell.size()) {
    double d = 0.0;
    auto [p2, e2] = std::from_chars(cell.data(), cell.data() + cell.size(), d);
    if (e2 != std::errc() || p2 != cell.data() + cell.size() || d != std::floor(d)) {
      throw DataError(where(row, column) + ": '" + cell + "' is not an integer id");
    }
    value = static_cast<std::int64_t>(d);
  }
  return value;
}

double parse_duration(const std::string& cell, std::size_t row, const std::string& column) {
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
  if (ec != std::errc() || ptr != cell.data() + cell.size()) {
    throw DataError(where(row, column) + ": '" + cell + "' is not a number");
  }
  if (!std::isfinite(value) || !(value > 0.0)) {
    throw DataError(where(row, column) + ": duration must be a positive finite number, got '" + cell + "'");
  }
  return value;
}

std::vector<std::string> numeral_labels(int n) {
  std::vector<std::string> out;
  for (int i = 1; i <= n; ++i) out.push_back(std::to_string(i));
  return out;
}

SequenceDataset parse_table(const TextTable& table, const ParseOptions& options) {
  const int p = options.num_covariates;
  if (p < 1 || p > kMaxCovariates) {
    throw DataError("number of covariates must be between 1 and 5, got " + std::to_string(p));
  }
  const std::size_t lead = options.sequence_column ? 1 : 0;
  const std::size_t base_cols = lead + 1 + static_cast<std::size_t>(p) + 2;
  const std::size_t ncol = table.header.size();
  if (ncol != base_cols && ncol != base_cols + 1) {
    throw DataError("expected " + std::to_string(base_cols) + " or " + std::to_string(base_cols + 1) +
                    " columns (Id, " + std::to_string(p) + " covariates, previous state, current state"
                    "[, duration]), found " + std::to_string(ncol));
  }
  const bool has_dur = ncol == base_cols + 1;
  if (options.require_durations && !has_dur) {
    throw DataError("the configured duration handling needs a duration column, but the file has none");
  }

  SequenceDataset data;
  data.num_covariates = p;
  data.has_durations = has_dur;
  for (int j = 0; j < p; ++j) data.covariate_names.push_back(table.header[lead + 1 + static_cast<std::size_t>(j)]);

  std::map<std::int64_t, int> individual_index;
  std::vector<int> max_cov(static_cast<std::size_t>(p), 0);
  int max_state = 0;
  std::int64_t last_seq_id = 0;
  data.records.reserve(table.rows.size());

  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    if (row.size() != ncol) {
      throw DataError("row " + std::to_string(r + 1) + " (line " + std::to_string(r + 2) + "): expected " +
                      std::to_string(ncol) + " fields, found " + std::to_string(row.size()));
    }
    TransitionRecord rec;
    const std::int64_t id = parse_id(row[lead], r, table.header[lead]);
    auto [it, inserted] = individual_index.emplace(id, static_cast<int>(data.individual_ids.size()));
    if (inserted) data.individual_ids.push_back(id);
    rec.individual = it->second;
    for (int j = 0; j < p; ++j) {
      const std::size_t c = lead + 1 + static_cast<std::size_t>(j);
      const int code = parse_code(row[c], r, table.header[c]);
      rec.covariates[static_cast<std::size_t>(j)] = code - 1;
      max_cov[static_cast<std::size_t>(j)] = std::max(max_cov[static_cast<std::size_t>(j)], code);
    }
    const std::size_t pc = lead + 1 + static_cast<std::size_t>(p);
    rec.previous_state = parse_code(row[pc], r, table.header[pc]) - 1;
    rec.current_state = parse_code(row[pc + 1], r, table.header[pc + 1]) - 1;
    max_state = std::max({max_state, rec.previous_state + 1, rec.current_state + 1});
    if (has_dur) rec.duration = parse_duration(row[pc + 2], r, table.header[pc + 2]);

    if (options.sequence_column) {
      const std::int64_t seq_id = parse_id(row[0], r, table.header[0]);
      const bool fresh = data.records.empty() || seq_id != last_seq_id;
      if (!fresh) {
        const TransitionRecord& prev = data.records.back();
        if (prev.individual != rec.individual) {
          throw DataError(where(r, table.header[0]) + ": individual changes inside a sequence");
        }
        if (prev.current_state != rec.previous_state) {
          throw DataError(where(r, table.header[pc]) + ": previous state does not continue the sequence");
        }
      }
      rec.sequence = fresh ? (data.records.empty() ? 0 : data.records.back().sequence + 1) : data.records.back().sequence;
      last_seq_id = seq_id;
    } else {
      const bool fresh = data.records.empty() || data.records.back().individual != rec.individual ||
                         data.records.back().current_state != rec.previous_state;
      rec.sequence = data.records.empty() ? 0 : data.records.back().sequence + (fresh ? 1 : 0);
    }
    data.records.push_back(rec);
  }
  if (data.records.empty()) throw DataError("dataset has no rows");

  data.num_states = max_state;
  if (!options.state_labels.empty()) {
    if (static_cast<int>(options.state_labels.size()) < max_state) {
      throw DataError("state labels list " + std::to_string(options.state_labels.size()) +
                      " names but state code " + std::to_string(max_state) + " occurs");
    }
    data.num_states = static_cast<int>(options.state_labels.size());
    data.state_labels = options.state_labels;
  } else {
    data.state_labels = numeral_labels(max_state);
  }
  for (int j = 0; j < p; ++j) {
    int card = max_cov[static_cast<std::size_t>(j)];
    std::vector<std::string> labels;
    if (static_cast<std::size_t>(j) < options.covariate_labels.size() &&
        !options.covariate_labels[static_cast<std::size_t>(j)].empty()) {
      labels = options.covariate_labels[static_cast<std::size_t>(j)];
      if (static_cast<int>(labels.size()) < card) {
        throw DataError("covariate " + std::to_string(j + 1) + " has code " + std::to_string(card) + " but only " +
                        std::to_string(labels.size()) + " labels");
      }
      card = static_cast<int>(labels.size());
    } else {
      labels = numeral_labels(card);
    }
    data.covariate_cardinalities.push_back(card);
    data.covariate_labels.push_back(std::move(labels));
  }
  data.validate();
  return data;
}

}  // namespace

int SequenceDataset::num_sequences() const { return records.empty() ? 0 : records.back().sequence + 1; }

void SequenceDataset::validate() const {
  if (num_covariates < 1 || num_covariates > kMaxCovariates) {
    throw DataError("number of covariates must be between 1 and 5");
  }
  if (static_cast<int>(covariate_cardinalities.size()) != num_covariates) {
    throw DataError("covariate cardinalities do not match the covariate count");
  }
  for (std::size_t r = 0; r < records.size(); ++r) {
    const auto& rec = records[r];
    if (rec.previous_state < 0 || rec.previous_state >= num_states || rec.current_state < 0 ||
        rec.current_state >= num_states) {
      throw DataError("record " + std::to_string(r + 1) + ": state code out of range");
    }
    for (int j = 0; j < num_covariates; ++j) {
      const int v = rec.covariates[static_cast<std::size_t>(j)];
      if (v < 0 || v >= covariate_cardinalities[static_cast<std::size_t>(j)]) {
        throw DataError("record " + std::to_string(r + 1) + ": covariate " + std::to_string(j + 1) + " out of range");
      }
    }
    if (rec.individual < 0 || rec.individual >= num_individuals()) {
      throw DataError("record " + std::to_string(r + 1) + ": individual out of range");
    }
    if (has_durations && (!std::isfinite(rec.duration) || !(rec.duration > 0.0))) {
      throw DataError("record " + std::to_string(r + 1) + ": duration must be positive and finite");
    }
    if (r > 0 && records[r - 1].sequence == rec.sequence) {
      if (records[r - 1].current_state != rec.previous_state) {
        throw DataError("record " + std::to_string(r + 1) + ": breaks state continuity within its sequence");
      }
      if (records[r - 1].individual != rec.individual) {
        throw DataError("record " + std::to_string(r + 1) + ": individual changes within its sequence");
      }
    }
    if (r > 0 && rec.sequence != records[r - 1].sequence && rec.sequence != records[r - 1].sequence + 1) {
      throw DataError("record " + std::to_string(r + 1) + ": sequence ids must be consecutive");
    }
  }
}

ParseOptions ParseOptions::from_config(const ModelConfig& config) {
  ParseOptions o;
  o.num_covariates = config.num_covariates;
  o.state_labels = config.state_labels;
  o.covariate_labels = config.covariate_labels;
  o.sequence_column = config.sequence_column;
  o.require_durations = config.duration.mode != DurationMode::Ignore;
  return o;
}

SequenceDataset parse_dataset(const std::filesystem::path& path, const ParseOptions& options) {
  try {
    return parse_table(read_csv(path), options);
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

SequenceDataset parse_dataset(const std::filesystem::path& path, const ModelConfig& config) {
  return parse_dataset(path, ParseOptions::from_config(config));
}

SequenceDataset parse_dataset_text(const std::string& text, const ParseOptions& options) {
  TextTable table;
  std::stringstream ss(text);
  std::string line;
  bool header = false;
  while (std::getline(ss, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    if (!header) {
      table.header = split_csv_line(line);
      header = true;
    } else {
      table.rows.push_back(split_csv_line(line));
    }
  }
  if (!header) throw DataError("empty input");
  return parse_table(table, options);
}

std::string serialize_dataset(const SequenceDataset& data, bool sequence_column) {
  std::string out;
  if (sequence_column) out += "Sequence,";
  out += "Id";
  for (int j = 0; j < data.num_covariates; ++j) {
    out += ',';
    out += static_cast<std::size_t>(j) < data.covariate_names.size() ? data.covariate_names[static_cast<std::size_t>(j)]
                                                                      : "Covariate" + std::to_string(j + 1);
  }
  out += ",Prev_State,Cur_State";
  if (data.has_durations) out += ",Duration";
  out += '\n';
  for (const auto& rec : data.records) {
    if (sequence_column) out += std::to_string(rec.sequence + 1) + ',';
    out += std::to_string(data.individual_ids[static_cast<std::size_t>(rec.individual)]);
    for (int j = 0; j < data.num_covariates; ++j) {
      out += ',' + std::to_string(rec.covariates[static_cast<std::size_t>(j)] + 1);
    }
    out += ',' + std::to_string(rec.previous_state + 1) + ',' + std::to_string(rec.current_state + 1);
    if (data.has_durations) out += ',' + format_double(rec.duration);
    out += '\n';
  }
  return out;
}

void write_dataset(const std::filesystem::path& path, const SequenceDataset& data, bool sequence_column) {
  write_text_file(path, serialize_dataset(data, sequence_column));
}

long long duration_blocks(double duration, double unit) {
  if (!(unit > 0.0) || !std::isfinite(unit)) throw UsageError("discretization unit must be positive");
  if (!(duration > 0.0) || !std::isfinite(duration)) throw DataError("duration must be positive and finite");
  double n = std::floor(duration / unit);
  // fma evaluates n*unit - duration with a single rounding, so its sign is exact.
  while (std::fma(n + 1.0, unit, -duration) <= 0.0) n += 1.0;
  while (n > 0.0 && std::fma(n, unit, -duration) > 0.0) n -= 1.0;
  return static_cast<long long>(n);
}

SequenceDataset discretize_durations(const SequenceDataset& data, double unit) {
  if (!(unit > 0.0) || !std::isfinite(unit)) throw UsageError("discretization unit must be positive");
  if (!data.has_durations) throw DataError("dataset has no durations to discretize");
  SequenceDataset out = data;
  out.records.clear();
  out.has_durations = false;
  const int dur_state = data.num_states;
  out.num_states = data.num_states + 1;
  out.state_labels.push_back("dur.state");
  for (const auto& rec : data.records) {
    const long long blocks = duration_blocks(rec.duration, unit);
    TransitionRecord base = rec;
    base.duration = 0.0;
    if (blocks == 0) {
      out.records.push_back(base);
      continue;
    }
    TransitionRecord step = base;
    step.current_state = dur_state;
    out.records.push_back(step);
    step.previous_state = dur_state;
    for (long long b = 1; b < blocks; ++b) out.records.push_back(step);
    step.current_state = rec.current_state;
    out.records.push_back(step);
  }
  return out;
}

int combination_index(std::span<const int> levels, std::span<const int> cardinalities) {
  int index = 0;
  int stride = 1;
  for (std::size_t j = 0; j < cardinalities.size(); ++j) {
    index += levels[j] * stride;
    stride *= cardinalities[j];
  }
  return index;
}

std::vector<int> combination_levels(int index, std::span<const int> cardinalities) {
  std::vector<int> levels(cardinalities.size());
  for (std::size_t j = 0; j < cardinalities.size(); ++j) {
    levels[j] = index % cardinalities[j];
    index /= cardinalities[j];
  }
  return levels;
}

int TransitionCounts::combinations() const {
  int n = 1;
  for (int c : cardinalities) n *= c;
  return n;
}

long long TransitionCounts::at_combination(int combination, int previous, int current) const {
  return by_combination[(static_cast<std::size_t>(combination) * static_cast<std::size_t>(num_states) +
                         static_cast<std::size_t>(previous)) *
                            static_cast<std::size_t>(num_states) +
                        static_cast<std::size_t>(current)];
}

long long TransitionCounts::at_individual(int individual, int previous, int current) const {
  return by_individual[(static_cast<std::size_t>(individual) * static_cast<std::size_t>(num_states) +
                        static_cast<std::size_t>(previous)) *
                           static_cast<std::size_t>(num_states) +
                       static_cast<std::size_t>(current)];
}

TransitionCounts transition_counts(const SequenceDataset& data, std::span<const int> covariates, bool fixed_effect) {
  if (covariates.empty() && fixed_effect) {
    throw UsageError("an empty covariate subset is only allowed when the fixed effect is off");
  }
  TransitionCounts counts;
  counts.covariates.assign(covariates.begin(), covariates.end());
  for (int j : covariates) {
    if (j < 0 || j >= data.num_covariates) throw UsageError("covariate index out of range");
    counts.cardinalities.push_back(data.covariate_cardinalities[static_cast<std::size_t>(j)]);
  }
  counts.num_states = data.num_states;
  counts.num_individuals = data.num_individuals();
  const std::size_t d = static_cast<std::size_t>(data.num_states);
  counts.by_combination.assign(static_cast<std::size_t>(counts.combinations()) * d * d, 0);
  counts.by_individual.assign(static_cast<std::size_t>(counts.num_individuals) * d * d, 0);
  std::vector<int> levels(covariates.size());
  for (const auto& rec : data.records) {
    for (std::size_t j = 0; j < covariates.size(); ++j) {
      levels[j] = rec.covariates[static_cast<std::size_t>(covariates[j])];
    }
    const auto combo = static_cast<std::size_t>(combination_index(levels, counts.cardinalities));
    const auto prev = static_cast<std::size_t>(rec.previous_state);
    const auto cur = static_cast<std::size_t>(rec.current_state);
    ++counts.by_combination[(combo * d + prev) * d + cur];
    ++counts.by_individual[(static_cast<std::size_t>(rec.individual) * d + prev) * d + cur];
  }
  return counts;
}

}  // namespace bmrmm
