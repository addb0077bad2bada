/*
 * Copyright 2026 The Crosscloud FL Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#pragma once

// Experiment sweeps over strategies, one swept parameter and seeds, with a
// metrics CSV as the output contract.

#include <algorithm>
#include <chrono>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "ccfl/config.hpp"
#include "ccfl/data.hpp"
#include "ccfl/error.hpp"
#include "ccfl/federation.hpp"
#include "ccfl/membership.hpp"
#include "ccfl/random.hpp"

namespace ccfl {

inline constexpr const char* kMetricsColumns[] = {
    "strategy",         "sweep_param_name",  "sweep_param_value",
    "seed",             "rounds_to_target",  "final_accuracy",
    "privacy_score",    "membership_advantage", "wall_millis_total",
    "simulated_millis_total", "comm_bytes_total", "status"};

// Columns measured on the host clock; everything else is deterministic.
inline constexpr const char* kWallClockColumns[] = {"wall_millis_total"};

inline constexpr const char* kRoundLogColumns[] = {
    "round_index",   "train_accuracy", "test_accuracy",       "mean_local_loss",
    "wall_millis",   "simulated_millis", "simulated_comm_bytes"};

struct MetricsRow {
  Strategy strategy = Strategy::kFedAvg;
  std::string sweep_param_name;
  double sweep_param_value = 0.0;
  std::uint64_t seed = 0;
  int rounds_to_target = -1;  // -1: never reached
  double final_accuracy = 0.0;
  double privacy_score = 0.0;
  double membership_advantage = 0.0;
  double wall_millis_total = 0.0;
  double simulated_millis_total = 0.0;
  std::uint64_t comm_bytes_total = 0;
  std::string status = "ok";

  bool ok() const { return status == "ok"; }
};

struct ExperimentData {
  std::vector<LabeledDataset> shards;
  LabeledDataset test;
};

namespace sweep_detail {

enum : std::uint64_t { kTagData = 11, kTagSplit = 12, kTagPartition = 13 };

inline std::string Real(double v) { return detail::FormatDouble(v); }

// Keeps free text CSV-safe.
inline std::string Sanitize(std::string s) {
  for (char& c : s) {
    if (c == ',' || c == '\n' || c == '\r' || c == '"') c = ';';
  }
  return s;
}

}  // namespace sweep_detail

inline ExperimentData BuildExperimentData(const ExperimentConfig& cfg, std::uint64_t seed) {
  LabeledDataset all;
  if (cfg.source == DataSource::kSynthetic) {
    SyntheticSpec spec;
    spec.kind = cfg.synthetic_kind;
    spec.dim = cfg.dim;
    spec.samples = cfg.samples;
    spec.separation = cfg.separation;
    spec.sigma = cfg.sigma;
    spec.seed = DeriveSeed(seed, {sweep_detail::kTagData});
    all = Generate(spec);
  } else {
    const LabeledDataset loaded = LoadCsv(cfg.csv_path, cfg.label_column);
    // Shuffle so the held-out split does not depend on file order.
    std::vector<std::size_t> order(loaded.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(DeriveSeed(seed, {sweep_detail::kTagSplit}));
    std::shuffle(order.begin(), order.end(), rng);
    all = loaded.Subset(order);
  }
  TrainTestSplit split = SplitTrainTest(all, cfg.test_fraction);
  PartitionScheme scheme{cfg.partition, cfg.nodes, cfg.alpha};
  return {Partition(split.train, scheme, DeriveSeed(seed, {sweep_detail::kTagPartition})),
          std::move(split.test)};
}

// Federation settings for one sweep cell. Strategy-specific sections are
// attached only where the strategy uses them.
inline FederationConfig MakeFederationConfig(const ExperimentConfig& cfg, Strategy strategy,
                                             std::size_t input_dim, std::uint64_t seed) {
  FederationConfig f;
  f.nodes = cfg.nodes;
  f.max_rounds = cfg.max_rounds;
  f.target_accuracy = cfg.target_accuracy;
  f.strategy = strategy;
  f.hidden_units = cfg.hidden_units;
  f.train.learning_rate = cfg.learning_rate;
  f.train.local_epochs = cfg.local_epochs;
  f.train.batch_size = cfg.batch_size;
  f.he_scale_bits = cfg.he_scale_bits;
  f.smc_scale_bits = cfg.smc_scale_bits;
  f.seed = seed;
  f.topology = CloudTopology(cfg.clouds, CloudLink{cfg.link_bytes_per_ms, cfg.link_latency_ms},
                             CloudLink{cfg.intra_bytes_per_ms, cfg.intra_latency_ms});
  if (strategy == Strategy::kDpFl) {
    f.dp = DpConfig{cfg.epsilon, cfg.delta, cfg.clip_norm, std::max(cfg.max_rounds, 1)};
  }
  if (UsesEncryption(strategy)) f.he_bits = cfg.he_bits;
  if (strategy == Strategy::kOurs) {
    FeatureExtractorSpec fx;
    fx.kind = cfg.extractor_kind;
    fx.seed = cfg.extractor_seed;
    fx.input_dim = input_dim;
    fx.output_dim = cfg.extractor_kind == ExtractorKind::kIdentity ? input_dim
                                                                    : cfg.extractor_output_dim;
    fx.gamma = cfg.extractor_gamma;
    f.extractor = fx;
  }
  return f;
}

inline ExperimentConfig ApplySweepValue(ExperimentConfig cfg, double value) {
  switch (cfg.sweep) {
    case SweepKind::kSingle: break;
    case SweepKind::kPrivacy: cfg.epsilon = value; break;
    case SweepKind::kHidden: cfg.hidden_units = static_cast<std::size_t>(value); break;
    case SweepKind::kLearningRate: cfg.learning_rate = value; break;
  }
  return cfg;
}

struct CellOutcome {
  MetricsRow row;
  TrainingResult training;
};

// One (strategy, value, seed) cell. Failures land in row.status.
inline CellOutcome RunCell(const ExperimentConfig& base, Strategy strategy, double value,
                           std::uint64_t seed) {
  const ExperimentConfig cfg = ApplySweepValue(base, value);
  CellOutcome out;
  MetricsRow& row = out.row;
  row.strategy = strategy;
  row.sweep_param_name = std::string(SweepParamName(cfg.sweep));
  row.sweep_param_value = cfg.sweep == SweepKind::kSingle ? 0.0 : value;
  row.seed = seed;
  const auto start = std::chrono::steady_clock::now();
  try {
    ExperimentData data = BuildExperimentData(cfg, seed);
    const std::size_t dim = data.test.dim();
    Federation fed(MakeFederationConfig(cfg, strategy, dim, seed), std::move(data.shards),
                   std::move(data.test));
    out.training = RunTraining(fed);
    const TrainingResult& tr = out.training;
    row.rounds_to_target = tr.rounds_to_target.value_or(-1);
    row.final_accuracy = tr.history.empty() ? Accuracy(fed.global(), fed.test_set())
                                            : tr.history.back().test_accuracy;
    const MembershipReport mia =
        MembershipAdvantage(fed.global(), fed.nodes().front().data, fed.test_set());
    row.membership_advantage = mia.advantage;
    row.privacy_score = mia.privacy_score;
    for (const RoundRecord& r : tr.history) {
      row.simulated_millis_total += r.simulated_millis;
      row.comm_bytes_total += r.simulated_comm_bytes;
    }
  } catch (const Error& e) {
    row.status = "error: " + sweep_detail::Sanitize(e.what());
  }
  row.wall_millis_total =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return out;
}

// Rows in canonical (strategy, value, seed) order as listed in the config.
inline std::vector<MetricsRow> RunSweepRows(const ExperimentConfig& cfg) {
  std::vector<MetricsRow> rows;
  for (Strategy s : cfg.strategies) {
    for (double v : cfg.SweepValues()) {
      for (std::uint64_t seed : cfg.seeds) rows.push_back(RunCell(cfg, s, v, seed).row);
    }
  }
  return rows;
}

inline void WriteMetricsCsv(std::ostream& out, const std::vector<MetricsRow>& rows) {
  using sweep_detail::Real;
  bool first = true;
  for (const char* col : kMetricsColumns) {
    out << (first ? "" : ",") << col;
    first = false;
  }
  out << '\n';
  for (const MetricsRow& r : rows) {
    out << StrategyName(r.strategy) << ',' << r.sweep_param_name << ','
        << Real(r.sweep_param_value) << ',' << r.seed << ',' << r.rounds_to_target << ','
        << Real(r.final_accuracy) << ',' << Real(r.privacy_score) << ','
        << Real(r.membership_advantage) << ',' << Real(r.wall_millis_total) << ','
        << Real(r.simulated_millis_total) << ',' << r.comm_bytes_total << ','
        << sweep_detail::Sanitize(r.status) << '\n';
  }
}

inline void WriteRoundLog(std::ostream& out, const std::vector<RoundRecord>& history) {
  using sweep_detail::Real;
  bool first = true;
  for (const char* col : kRoundLogColumns) {
    out << (first ? "" : ",") << col;
    first = false;
  }
  out << '\n';
  for (const RoundRecord& r : history) {
    out << r.round_index << ',' << Real(r.train_accuracy) << ',' << Real(r.test_accuracy) << ','
        << Real(r.mean_local_loss) << ',' << Real(r.wall_millis) << ','
        << Real(r.simulated_millis) << ',' << r.simulated_comm_bytes << '\n';
  }
}

// Writes to a sibling temporary file and renames it over `path`.
inline void WriteFileAtomically(const std::string& path, const std::string& contents) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    Require(out.good(), ErrorCode::kIo, "cannot write " + tmp);
    out << contents;
    out.flush();
    Require(out.good(), ErrorCode::kIo, "write to " + tmp + " failed");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  Require(!ec, ErrorCode::kIo, "cannot rename " + tmp + " to " + path + ": " + ec.message());
}

struct SweepResult {
  std::vector<MetricsRow> rows;
  bool all_ok = true;
};

inline SweepResult RunSweep(const ExperimentConfig& cfg) {
  SweepResult r;
  r.rows = RunSweepRows(cfg);
  for (const MetricsRow& row : r.rows) r.all_ok = r.all_ok && row.ok();
  std::ostringstream csv;
  WriteMetricsCsv(csv, r.rows);
  WriteFileAtomically(cfg.output, csv.str());
  return r;
}

}  // namespace ccfl
