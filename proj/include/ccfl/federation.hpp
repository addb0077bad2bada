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

// Federated training rounds across simulated clouds.
//
// One round: broadcast the global parameters, train locally on every node,
// pass each update through the strategy's privacy transform, aggregate as a
// sample-weighted mean, and evaluate. Node results are always combined in
// ascending node_id order.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "ccfl/dp.hpp"
#include "ccfl/error.hpp"
#include "ccfl/features.hpp"
#include "ccfl/model.hpp"
#include "ccfl/paillier.hpp"
#include "ccfl/random.hpp"
#include "ccfl/secure_agg.hpp"
#include "ccfl/smc.hpp"

namespace ccfl {

enum class Strategy { kFedAvg, kDpFl, kSmcFl, kHeFl, kOurs };

inline constexpr Strategy kAllStrategies[] = {Strategy::kFedAvg, Strategy::kDpFl,
                                              Strategy::kSmcFl, Strategy::kHeFl,
                                              Strategy::kOurs};

inline std::string_view StrategyName(Strategy s) {
  switch (s) {
    case Strategy::kFedAvg: return "fedavg";
    case Strategy::kDpFl: return "dp-fl";
    case Strategy::kSmcFl: return "smc-fl";
    case Strategy::kHeFl: return "he-fl";
    case Strategy::kOurs: return "ours";
  }
  return "unknown";
}

inline std::optional<Strategy> ParseStrategy(std::string_view name) {
  for (Strategy s : kAllStrategies) {
    if (StrategyName(s) == name) return s;
  }
  return std::nullopt;
}

inline bool UsesEncryption(Strategy s) { return s == Strategy::kHeFl || s == Strategy::kOurs; }

// ---------------------------------------------------------------------------
// Topology (accounting only)

struct CloudLink {
  double bytes_per_ms = 125000.0;  // ~1 Gbit/s
  double latency_ms = 20.0;

  bool operator==(const CloudLink&) const = default;
};

class CloudTopology {
 public:
  CloudTopology() : CloudTopology({"cloud-a", "cloud-b", "cloud-c"}) {}
  explicit CloudTopology(std::vector<std::string> clouds, CloudLink inter = {},
                         CloudLink intra = {1250000.0, 0.5})
      : clouds_(std::move(clouds)), inter_(inter), intra_(intra) {
    Validate();
  }

  const std::vector<std::string>& clouds() const { return clouds_; }
  const std::string& aggregator_cloud() const { return clouds_.front(); }
  const CloudLink& inter_link() const { return inter_; }
  const CloudLink& intra_link() const { return intra_; }

  // Links are symmetric: (a, b) and (b, a) name the same link.
  void SetLink(const std::string& a, const std::string& b, CloudLink link) {
    Require(Contains(a) && Contains(b), ErrorCode::kInvalidInput, "unknown cloud in link");
    CheckLink(link);
    overrides_[Key(a, b)] = link;
  }

  const CloudLink& Link(const std::string& a, const std::string& b) const {
    if (auto it = overrides_.find(Key(a, b)); it != overrides_.end()) return it->second;
    return a == b ? intra_ : inter_;
  }

  double TransferMillis(const std::string& a, const std::string& b, std::uint64_t bytes) const {
    const CloudLink& l = Link(a, b);
    return l.latency_ms + static_cast<double>(bytes) / l.bytes_per_ms;
  }

  const std::string& CloudForNode(std::size_t node_id) const {
    return clouds_[node_id % clouds_.size()];
  }

 private:
  static std::pair<std::string, std::string> Key(const std::string& a, const std::string& b) {
    return a < b ? std::pair{a, b} : std::pair{b, a};
  }
  static void CheckLink(const CloudLink& l) {
    Require(l.bytes_per_ms > 0 && l.latency_ms >= 0, ErrorCode::kInvalidInput,
            "link rate must be positive and latency non-negative");
  }
  bool Contains(const std::string& c) const {
    return std::find(clouds_.begin(), clouds_.end(), c) != clouds_.end();
  }
  void Validate() const {
    Require(!clouds_.empty(), ErrorCode::kInvalidInput, "topology needs at least one cloud");
    CheckLink(inter_);
    CheckLink(intra_);
  }

  std::vector<std::string> clouds_;
  CloudLink inter_;
  CloudLink intra_;
  std::map<std::pair<std::string, std::string>, CloudLink> overrides_;
};

// Deterministic cost model for simulated time. Units are milliseconds.
struct CostModel {
  double train_ms_per_sample_param = 2e-6;
  double he_encrypt_ms_at_512 = 0.05;  // per element, scales with (bits/512)^3
  double smc_share_ms_per_element = 1e-4;

  double HeElementMillis(std::size_t bits) const {
    const double r = static_cast<double>(bits) / 512.0;
    return he_encrypt_ms_at_512 * r * r * r;
  }
};

// ---------------------------------------------------------------------------
// Configuration and state

struct FederationConfig {
  std::size_t nodes = 5;
  int max_rounds = 200;
  double target_accuracy = 0.85;
  Strategy strategy = Strategy::kFedAvg;
  std::size_t hidden_units = 16;
  TrainConfig train;
  std::optional<DpConfig> dp;
  std::optional<int> he_bits;
  std::optional<FeatureExtractorSpec> extractor;
  int he_scale_bits = kDefaultHeScaleBits;
  int smc_scale_bits = kDefaultSmcScaleBits;
  std::uint64_t seed = 0;
  CloudTopology topology;
  CostModel cost;

  // Strategy-specific sections must be present exactly when required.
  void Validate() const {
    Require(nodes >= 1, ErrorCode::kInvalidInput, "node count must be positive");
    Require(max_rounds >= 0, ErrorCode::kInvalidInput, "max_rounds must be non-negative");
    Require(target_accuracy >= 0 && target_accuracy <= 1, ErrorCode::kInvalidInput,
            "target_accuracy must lie in [0, 1]");
    train.Validate();
    const bool want_dp = strategy == Strategy::kDpFl;
    const bool want_he = UsesEncryption(strategy);
    const bool want_fx = strategy == Strategy::kOurs;
    const std::string name(StrategyName(strategy));
    Require(dp.has_value() == want_dp, ErrorCode::kInvalidInput,
            name + (want_dp ? " requires" : " does not take") + " a dp section");
    Require(he_bits.has_value() == want_he, ErrorCode::kInvalidInput,
            name + (want_he ? " requires" : " does not take") + " he_bits");
    Require(extractor.has_value() == want_fx, ErrorCode::kInvalidInput,
            name + (want_fx ? " requires" : " does not take") + " an extractor");
    if (dp) dp->Validate();
    if (he_bits) {
      Require(IsAllowedKeyBits(*he_bits), ErrorCode::kInvalidInput,
              "he_bits must be one of 256, 512, 1024, 2048");
    }
    Require(strategy != Strategy::kSmcFl || nodes >= 2, ErrorCode::kInvalidInput,
            "smc-fl needs at least two nodes");
    Require(he_scale_bits >= 1 && he_scale_bits <= 62, ErrorCode::kInvalidInput,
            "he_scale_bits must lie in [1, 62]");
    Require(smc_scale_bits >= 1 && smc_scale_bits <= 40, ErrorCode::kInvalidInput,
            "smc_scale_bits must lie in [1, 40]");
  }
};

struct NodeState {
  std::size_t node_id = 0;
  std::string cloud_id;
  LabeledDataset data;
  ModelParams params;
  std::uint64_t seed = 0;
};

struct RoundRecord {
  int round_index = 0;
  ModelParams global_params;
  double train_accuracy = 0.0;
  double test_accuracy = 0.0;
  double mean_local_loss = 0.0;
  // Measured; excluded from determinism checks.
  double wall_millis = 0.0;
  double simulated_millis = 0.0;
  std::uint64_t simulated_comm_bytes = 0;
};

// ---------------------------------------------------------------------------
// Aggregation

struct NodeUpdate {
  std::size_t node_id = 0;
  ModelParams params;
  std::uint64_t sample_count = 0;
};

// Sample-weighted mean sum_i (N_i / N) w_i over updates sorted by node_id.
// The sum is anchored at the lowest-id update, w_0 + sum_i (N_i/N)(w_i - w_0),
// so identical updates reproduce themselves bit for bit.
inline ModelParams FedAvgAggregate(std::span<const NodeUpdate> updates) {
  Require(!updates.empty(), ErrorCode::kInvalidInput, "no updates to aggregate");
  std::vector<const NodeUpdate*> order;
  for (const NodeUpdate& u : updates) order.push_back(&u);
  std::stable_sort(order.begin(), order.end(),
                   [](const NodeUpdate* a, const NodeUpdate* b) { return a->node_id < b->node_id; });
  const ModelArch arch = order.front()->params.arch;
  std::uint64_t total = 0;
  for (const NodeUpdate* u : order) {
    Require(u->params.arch == arch, ErrorCode::kInvalidInput, "architecture mismatch");
    Require(u->params.values.size() == arch.ParamCount(), ErrorCode::kInvalidInput,
            "parameter length mismatch");
    Require(u->sample_count >= 1, ErrorCode::kInvalidInput, "sample count must be positive");
    total += u->sample_count;
  }
  const std::vector<double>& anchor = order.front()->params.values;
  std::vector<double> acc(anchor.size(), 0.0);
  for (const NodeUpdate* u : order) {
    const double weight = static_cast<double>(u->sample_count) / static_cast<double>(total);
    for (std::size_t i = 0; i < acc.size(); ++i) {
      acc[i] += weight * (u->params.values[i] - anchor[i]);
    }
  }
  ModelParams out{arch, anchor};
  for (std::size_t i = 0; i < acc.size(); ++i) out.values[i] += acc[i];
  return out;
}

// ---------------------------------------------------------------------------
// Migration

struct MigrationResult {
  ModelParams w_prime;
  DeltaVector delta;
};

// Fine-tunes w on the target node's data; w' is materialized as w + dw.
inline MigrationResult MigrateAndFinetune(const ModelParams& w, const NodeState& target,
                                          const TrainConfig& ft) {
  const TrainResult tuned = LocalTrain(w, target.data, ft);
  MigrationResult r;
  r.delta = ParamDelta(w, tuned.params);
  r.w_prime = ApplyDelta(w, r.delta);
  return r;
}

inline MigrationResult MigrateAndFinetune(const ModelParams& w, const NodeState& target,
                                          const TrainConfig& ft,
                                          const FeatureExtractor& extractor) {
  NodeState augmented = target;
  augmented.data = extractor.Augment(target.data);
  return MigrateAndFinetune(w, augmented, ft);
}

// ---------------------------------------------------------------------------
// Federation

namespace detail {

enum SeedTag : std::uint64_t {
  kTagInit = 1,
  kTagKeygen = 2,
  kTagNode = 3,
  kTagTrain = 4,
  kTagDpNoise = 5,
  kTagEncrypt = 6,
  kTagShare = 7,
};

inline LabeledDataset Concatenate(std::span<const LabeledDataset> parts) {
  LabeledDataset out;
  for (const auto& p : parts) {
    for (const Sample& s : p) out.Add(s);
  }
  return out;
}

}  // namespace detail

class Federation {
 public:
  Federation(FederationConfig cfg, std::vector<LabeledDataset> shards, LabeledDataset test)
      : cfg_(std::move(cfg)) {
    cfg_.Validate();
    Require(shards.size() == cfg_.nodes, ErrorCode::kInvalidInput,
            "expected " + std::to_string(cfg_.nodes) + " shards, got " +
                std::to_string(shards.size()));
    Require(!test.empty(), ErrorCode::kInvalidInput, "test set is empty");
    const std::size_t raw_dim = test.dim();
    for (std::size_t i = 0; i < shards.size(); ++i) {
      Require(!shards[i].empty(), ErrorCode::kInvalidInput,
              "shard " + std::to_string(i) + " is empty");
      Require(shards[i].dim() == raw_dim, ErrorCode::kInvalidInput,
              "shard " + std::to_string(i) + " has a different feature dimension");
    }
    if (cfg_.extractor) {
      Require(cfg_.extractor->input_dim == raw_dim, ErrorCode::kInvalidInput,
              "extractor input_dim does not match the data");
      extractor_.emplace(*cfg_.extractor);
      for (auto& s : shards) s = extractor_->Augment(s);
      test = extractor_->Augment(test);
    }
    arch_ = ModelArch{extractor_ ? extractor_->output_dim() : raw_dim, cfg_.hidden_units};
    global_ = ModelParams::Init(arch_, DeriveSeed(cfg_.seed, {detail::kTagInit}));
    for (std::size_t i = 0; i < shards.size(); ++i) {
      NodeState n;
      n.node_id = i;
      n.cloud_id = cfg_.topology.CloudForNode(i);
      n.data = std::move(shards[i]);
      n.params = global_;
      n.seed = DeriveSeed(cfg_.seed, {detail::kTagNode, i});
      total_samples_ += n.data.size();
      nodes_.push_back(std::move(n));
    }
    test_ = std::move(test);
    train_union_ = detail::Concatenate(Shards());
    if (cfg_.he_bits) {
      keys_.emplace(GenerateKeypair(*cfg_.he_bits, DeriveSeed(cfg_.seed, {detail::kTagKeygen})));
      codec_.emplace(keys_->pub.n, cfg_.he_scale_bits);
    }
  }

  const FederationConfig& config() const { return cfg_; }
  const ModelArch& arch() const { return arch_; }
  const ModelParams& global() const { return global_; }
  const std::vector<NodeState>& nodes() const { return nodes_; }
  const LabeledDataset& test_set() const { return test_; }
  const LabeledDataset& train_set() const { return train_union_; }
  const std::optional<FeatureExtractor>& extractor() const { return extractor_; }
  const std::optional<PaillierKeypair>& keys() const { return keys_; }
  int rounds_completed() const { return round_; }
  // Updates as submitted for aggregation in the latest round, in plaintext.
  const std::vector<NodeUpdate>& last_updates() const { return last_updates_; }

  RoundRecord RunRound() {
    const auto wall_start = std::chrono::steady_clock::now();
    const int t = ++round_;
    const std::size_t p = arch_.ParamCount();
    const std::uint64_t plain_bytes = 8 * static_cast<std::uint64_t>(p);

    std::vector<NodeUpdate> updates;
    updates.reserve(nodes_.size());
    std::vector<double> node_compute_ms(nodes_.size(), 0.0);
    std::vector<std::uint64_t> upload_bytes(nodes_.size(), plain_bytes);
    double loss_sum = 0.0;

    for (NodeState& node : nodes_) {
      const std::size_t id = node.node_id;
      try {
        TrainConfig tc = cfg_.train;
        tc.rng_seed = DeriveSeed(node.seed, {detail::kTagTrain, static_cast<std::uint64_t>(t)});
        TrainResult tr = LocalTrain(global_, node.data, tc);
        loss_sum += tr.final_loss;
        node.params = std::move(tr.params);
        node_compute_ms[id] = cfg_.cost.train_ms_per_sample_param *
                              static_cast<double>(node.data.size()) *
                              static_cast<double>(std::max(cfg_.train.local_epochs, 1)) *
                              static_cast<double>(p);
        ModelParams sent = node.params;
        if (cfg_.strategy == Strategy::kDpFl) {
          Rng noise(DeriveSeed(node.seed, {detail::kTagDpNoise, static_cast<std::uint64_t>(t)}));
          const DeltaVector raw = ParamDelta(global_, node.params);
          const DeltaVector noised{DpPrivatize(raw.values, *cfg_.dp, noise)};
          sent = ApplyDelta(global_, noised);
        }
        updates.push_back(NodeUpdate{id, std::move(sent), node.data.size()});
      } catch (const RoundFailure&) {
        throw;
      } catch (const Error& e) {
        throw RoundFailure(t, static_cast<std::int64_t>(id), e.code(), e.what());
      }
    }

    double aggregator_ms = 0.0;
    try {
      switch (cfg_.strategy) {
        case Strategy::kFedAvg:
        case Strategy::kDpFl:
          global_ = FedAvgAggregate(updates);
          break;
        case Strategy::kSmcFl:
          global_ = AggregateShared(updates, t, node_compute_ms, upload_bytes);
          break;
        case Strategy::kHeFl:
        case Strategy::kOurs:
          global_ = AggregateEncryptedUpdates(updates, t, node_compute_ms, upload_bytes,
                                              aggregator_ms);
          break;
      }
    } catch (const RoundFailure&) {
      throw;
    } catch (const Error& e) {
      throw RoundFailure(t, -1, e.code(), e.what());
    }
    if (!global_.AllFinite()) {
      throw RoundFailure(t, -1, ErrorCode::kNumericFailure, "aggregated parameters not finite");
    }
    last_updates_ = std::move(updates);

    RoundRecord rec;
    rec.round_index = t;
    rec.global_params = global_;
    rec.train_accuracy = Accuracy(global_, train_union_);
    rec.test_accuracy = Accuracy(global_, test_);
    rec.mean_local_loss = loss_sum / static_cast<double>(nodes_.size());
    const std::string& hub = cfg_.topology.aggregator_cloud();
    double slowest = 0.0;
    for (const NodeState& node : nodes_) {
      const std::size_t id = node.node_id;
      const double ms = cfg_.topology.TransferMillis(hub, node.cloud_id, plain_bytes) +
                        node_compute_ms[id] +
                        cfg_.topology.TransferMillis(node.cloud_id, hub, upload_bytes[id]);
      slowest = std::max(slowest, ms);
      rec.simulated_comm_bytes += plain_bytes + upload_bytes[id];
    }
    rec.simulated_millis = slowest + aggregator_ms;
    rec.wall_millis = std::chrono::duration<double, std::milli>(
                          std::chrono::steady_clock::now() - wall_start)
                          .count();
    return rec;
  }

  // Fine-tunes the current global model on `target`, applying the shared
  // extractor first when the federation uses one.
  MigrationResult Migrate(const NodeState& target, const TrainConfig& ft) const {
    if (extractor_) return MigrateAndFinetune(global_, target, ft, *extractor_);
    return MigrateAndFinetune(global_, target, ft);
  }

 private:
  std::vector<LabeledDataset> Shards() const {
    std::vector<LabeledDataset> out;
    for (const auto& n : nodes_) out.push_back(n.data);
    return out;
  }

  static double MaxAbs(const ModelParams& w) {
    double m = 0.0;
    for (double v : w.values) m = std::max(m, std::fabs(v));
    return m;
  }

  // Every node shares N_i * w_i among all K nodes; the recovered sum is
  // divided by N.
  ModelParams AggregateShared(const std::vector<NodeUpdate>& updates, int t,
                              std::vector<double>& node_ms,
                              std::vector<std::uint64_t>& upload) {
    const std::size_t k = nodes_.size();
    const double limit = std::ldexp(static_cast<double>(kFieldPrime / 2), -cfg_.smc_scale_bits);
    double bound = 0.0;
    std::vector<ShareBundle> bundles;
    for (const NodeUpdate& u : updates) {
      const auto n_i = static_cast<double>(u.sample_count);
      bound += n_i * MaxAbs(u.params);
      if (bound >= limit) {
        throw RoundFailure(t, static_cast<std::int64_t>(u.node_id), ErrorCode::kRange,
                           "weighted sum exceeds the secret-sharing field range");
      }
      std::vector<double> scaled = u.params.values;
      for (double& v : scaled) v *= n_i;
      Rng rng(DeriveSeed(nodes_[u.node_id].seed, {detail::kTagShare, static_cast<std::uint64_t>(t)}));
      bundles.push_back(Share(scaled, cfg_.smc_scale_bits, k, rng));
      node_ms[u.node_id] += cfg_.cost.smc_share_ms_per_element *
                            static_cast<double>(k * scaled.size());
      // K - 1 shares to peers plus the node's partial total to the aggregator.
      upload[u.node_id] = static_cast<std::uint64_t>(k) * 8 * scaled.size();
    }
    const std::vector<double> sum = ReconstructSum(bundles, cfg_.smc_scale_bits);
    ModelParams out{arch_, std::vector<double>(sum.size())};
    for (std::size_t i = 0; i < sum.size(); ++i) {
      out.values[i] = sum[i] / static_cast<double>(total_samples_);
    }
    return out;
  }

  ModelParams AggregateEncryptedUpdates(const std::vector<NodeUpdate>& updates, int t,
                                        std::vector<double>& node_ms,
                                        std::vector<std::uint64_t>& upload,
                                        double& aggregator_ms) {
    const PaillierPublicKey& pk = keys_->pub;
    const double limit = std::ldexp(BigInt(pk.n / 2).get_d(), -cfg_.he_scale_bits);
    double bound = 0.0;
    std::vector<WeightedCipherUpdate> encrypted;
    const double element_ms = cfg_.cost.HeElementMillis(pk.bits());
    for (const NodeUpdate& u : updates) {
      bound += static_cast<double>(u.sample_count) * MaxAbs(u.params);
      if (bound >= limit) {
        throw RoundFailure(t, static_cast<std::int64_t>(u.node_id), ErrorCode::kRange,
                           "weighted sum exceeds the plaintext range of the key");
      }
      Rng rng(DeriveSeed(nodes_[u.node_id].seed, {detail::kTagEncrypt, static_cast<std::uint64_t>(t)}));
      try {
        encrypted.push_back({EncryptParams(pk, *codec_, u.params, rng), u.sample_count});
      } catch (const Error& e) {
        throw RoundFailure(t, static_cast<std::int64_t>(u.node_id), e.code(), e.what());
      }
      node_ms[u.node_id] += element_ms * static_cast<double>(u.params.values.size());
      upload[u.node_id] = SerializeCipherVector(encrypted.back().update).size();
    }
    const EncryptedAggregate agg = AggregateEncrypted(pk, encrypted);
    // Scalar multiplications for every node plus one decryption per element.
    aggregator_ms = element_ms * static_cast<double>(arch_.ParamCount()) *
                    static_cast<double>(updates.size() + 1);
    return DecryptParams(keys_->priv, pk, *codec_, agg.sum, agg.total_samples, arch_);
  }

  FederationConfig cfg_;
  ModelArch arch_;
  ModelParams global_;
  std::vector<NodeState> nodes_;
  LabeledDataset test_;
  LabeledDataset train_union_;
  std::optional<FeatureExtractor> extractor_;
  std::optional<PaillierKeypair> keys_;
  std::optional<FixedPointCodec> codec_;
  std::uint64_t total_samples_ = 0;
  int round_ = 0;
  std::vector<NodeUpdate> last_updates_;
};

struct TrainingResult {
  std::vector<RoundRecord> history;
  // First round whose test accuracy reached the target.
  std::optional<int> rounds_to_target;
  ModelParams final_params;
  // Linear composition: rounds run times per-round epsilon (0 without DP).
  double total_epsilon = 0.0;
};

inline TrainingResult RunTraining(Federation& fed) {
  TrainingResult r;
  const FederationConfig& cfg = fed.config();
  for (int t = 0; t < cfg.max_rounds; ++t) {
    r.history.push_back(fed.RunRound());
    if (r.history.back().test_accuracy >= cfg.target_accuracy) {
      r.rounds_to_target = r.history.back().round_index;
      break;
    }
  }
  r.final_params = fed.global();
  if (cfg.dp) {
    DpConfig used = *cfg.dp;
    used.rounds = static_cast<int>(r.history.size());
    r.total_epsilon = r.history.empty() ? 0.0 : used.TotalEpsilon();
  }
  return r;
}

inline TrainingResult RunTraining(const FederationConfig& cfg, std::vector<LabeledDataset> shards,
                                  const LabeledDataset& test) {
  Federation fed(cfg, std::move(shards), test);
  return RunTraining(fed);
}

}  // namespace ccfl
