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

// Model parameterization, prediction, loss and mini-batch SGD for the local
// training step of every node.
//
// Two architectures share one flat parameter layout:
//   hidden_units == 0: logistic regression, values = [w_0..w_{d-1}, b].
//   hidden_units == h: one tanh hidden layer followed by a sigmoid output.
//     values = h blocks of [W_j0..W_j(d-1), b_j], then [v_0..v_{h-1}, c].

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ccfl/error.hpp"
#include "ccfl/random.hpp"

namespace ccfl {

// Probabilities are clamped to [kProbClamp, 1 - kProbClamp] before log.
inline constexpr double kProbClamp = 1e-12;

struct ModelArch {
  std::size_t input_dim = 1;
  std::size_t hidden_units = 0;

  std::size_t ParamCount() const {
    if (hidden_units == 0) return input_dim + 1;
    return hidden_units * (input_dim + 1) + (hidden_units + 1);
  }

  bool operator==(const ModelArch&) const = default;
};

struct ModelParams {
  ModelArch arch;
  std::vector<double> values;

  static ModelParams Zeros(const ModelArch& arch) {
    return ModelParams{arch, std::vector<double>(arch.ParamCount(), 0.0)};
  }

  // Weights uniform in [-0.5, 0.5] / sqrt(fan_in); biases zero.
  static ModelParams Init(const ModelArch& arch, std::uint64_t seed) {
    Require(arch.input_dim > 0, ErrorCode::kInvalidInput,
            "input_dim must be positive");
    ModelParams p = Zeros(arch);
    Rng rng(seed);
    std::uniform_real_distribution<double> unit(-0.5, 0.5);
    const std::size_t d = arch.input_dim;
    if (arch.hidden_units == 0) {
      const double s = 1.0 / std::sqrt(static_cast<double>(d));
      for (std::size_t i = 0; i < d; ++i) p.values[i] = unit(rng) * s;
      return p;
    }
    const std::size_t h = arch.hidden_units;
    const double s_in = 1.0 / std::sqrt(static_cast<double>(d));
    for (std::size_t j = 0; j < h; ++j) {
      for (std::size_t i = 0; i < d; ++i) p.values[j * (d + 1) + i] = unit(rng) * s_in;
    }
    const double s_out = 1.0 / std::sqrt(static_cast<double>(h));
    const std::size_t out = h * (d + 1);
    for (std::size_t j = 0; j < h; ++j) p.values[out + j] = unit(rng) * s_out;
    return p;
  }

  bool AllFinite() const {
    return std::all_of(values.begin(), values.end(),
                       [](double v) { return std::isfinite(v); });
  }

  bool operator==(const ModelParams&) const = default;
};

// w' = w + dw: the delta keeps its own type so deltas and parameters are not mixed up.
struct DeltaVector {
  std::vector<double> values;

  bool operator==(const DeltaVector&) const = default;
};

struct Sample {
  std::vector<double> features;
  int label = 0;

  bool operator==(const Sample&) const = default;
};

class LabeledDataset {
 public:
  LabeledDataset() = default;
  explicit LabeledDataset(std::vector<Sample> samples) {
    for (auto& s : samples) Add(std::move(s));
  }

  void Add(Sample s) {
    Require(s.label == 0 || s.label == 1, ErrorCode::kInvalidInput,
            "label must be 0 or 1, got " + std::to_string(s.label));
    if (!samples_.empty()) {
      Require(s.features.size() == dim(), ErrorCode::kInvalidInput,
              "feature length " + std::to_string(s.features.size()) +
                  " differs from dataset dimension " + std::to_string(dim()));
    }
    samples_.push_back(std::move(s));
  }

  std::size_t size() const { return samples_.size(); }
  bool empty() const { return samples_.empty(); }
  std::size_t dim() const { return samples_.empty() ? 0 : samples_.front().features.size(); }
  const Sample& operator[](std::size_t i) const { return samples_[i]; }
  const std::vector<Sample>& samples() const { return samples_; }
  auto begin() const { return samples_.begin(); }
  auto end() const { return samples_.end(); }

  LabeledDataset Subset(std::span<const std::size_t> indices) const {
    LabeledDataset out;
    out.samples_.reserve(indices.size());
    for (std::size_t i : indices) out.samples_.push_back(samples_.at(i));
    return out;
  }

  std::size_t CountLabel(int label) const {
    return static_cast<std::size_t>(std::count_if(
        samples_.begin(), samples_.end(),
        [label](const Sample& s) { return s.label == label; }));
  }

  bool operator==(const LabeledDataset&) const = default;

 private:
  std::vector<Sample> samples_;
};

struct TrainConfig {
  double learning_rate = 0.05;
  int local_epochs = 1;
  std::size_t batch_size = 32;
  std::uint64_t rng_seed = 0;

  // learning_rate 0 and local_epochs 0 are accepted as explicit no-op runs.
  void Validate() const {
    Require(std::isfinite(learning_rate) && learning_rate >= 0.0 &&
                learning_rate <= 1.0,
            ErrorCode::kInvalidInput, "learning_rate must lie in [0, 1]");
    Require(local_epochs >= 0, ErrorCode::kInvalidInput,
            "local_epochs must be non-negative");
    Require(batch_size >= 1, ErrorCode::kInvalidInput,
            "batch_size must be positive");
  }
};

namespace detail {

inline double Sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

inline void CheckFeatures(const ModelArch& arch, std::span<const double> x) {
  Require(x.size() == arch.input_dim, ErrorCode::kInvalidInput,
          "feature length " + std::to_string(x.size()) +
              " does not match input_dim " + std::to_string(arch.input_dim));
}

inline void CheckParams(const ModelParams& p) {
  Require(p.values.size() == p.arch.ParamCount(), ErrorCode::kInvalidInput,
          "parameter vector length does not match architecture");
}

// Forward pass; fills `hidden` with tanh activations when the model has a
// hidden layer. Returns the unclamped output probability.
inline double Forward(const ModelParams& p, std::span<const double> x,
                      std::vector<double>& hidden) {
  const std::size_t d = p.arch.input_dim;
  const std::vector<double>& v = p.values;
  if (p.arch.hidden_units == 0) {
    double z = v[d];
    for (std::size_t i = 0; i < d; ++i) z += v[i] * x[i];
    return Sigmoid(z);
  }
  const std::size_t h = p.arch.hidden_units;
  hidden.resize(h);
  for (std::size_t j = 0; j < h; ++j) {
    const double* row = v.data() + j * (d + 1);
    double a = row[d];
    for (std::size_t i = 0; i < d; ++i) a += row[i] * x[i];
    hidden[j] = std::tanh(a);
  }
  const double* out = v.data() + h * (d + 1);
  double z = out[h];
  for (std::size_t j = 0; j < h; ++j) z += out[j] * hidden[j];
  return Sigmoid(z);
}

inline double ClampProb(double p) {
  return std::clamp(p, kProbClamp, 1.0 - kProbClamp);
}

inline double CrossEntropy(double prob, int label) {
  const double q = ClampProb(prob);
  return label == 1 ? -std::log(q) : -std::log(1.0 - q);
}

// Adds the gradient of one sample's loss, scaled by `weight`, into `grad`.
inline void AccumulateGradient(const ModelParams& p, const Sample& s,
                               double weight, std::vector<double>& hidden,
                               std::vector<double>& grad) {
  const std::size_t d = p.arch.input_dim;
  const double prob = Forward(p, s.features, hidden);
  // d(loss)/d(logit) of the unclamped cross-entropy.
  const double err = (prob - static_cast<double>(s.label)) * weight;
  const std::vector<double>& x = s.features;
  if (p.arch.hidden_units == 0) {
    for (std::size_t i = 0; i < d; ++i) grad[i] += err * x[i];
    grad[d] += err;
    return;
  }
  const std::size_t h = p.arch.hidden_units;
  const std::size_t out = h * (d + 1);
  for (std::size_t j = 0; j < h; ++j) {
    grad[out + j] += err * hidden[j];
    const double da = err * p.values[out + j] * (1.0 - hidden[j] * hidden[j]);
    double* row = grad.data() + j * (d + 1);
    for (std::size_t i = 0; i < d; ++i) row[i] += da * x[i];
    row[d] += da;
  }
  grad[out + h] += err;
}

}  // namespace detail

inline double Predict(const ModelParams& params, std::span<const double> features) {
  detail::CheckParams(params);
  detail::CheckFeatures(params.arch, features);
  std::vector<double> hidden;
  return detail::Forward(params, features, hidden);
}

inline double SampleLoss(const ModelParams& params, const Sample& s) {
  return detail::CrossEntropy(Predict(params, s.features), s.label);
}

// Mean binary cross-entropy over the dataset.
inline double DatasetLoss(const ModelParams& params, const LabeledDataset& data) {
  Require(!data.empty(), ErrorCode::kInvalidInput, "dataset is empty");
  detail::CheckParams(params);
  std::vector<double> hidden;
  double total = 0.0;
  for (const Sample& s : data) {
    detail::CheckFeatures(params.arch, s.features);
    total += detail::CrossEntropy(detail::Forward(params, s.features, hidden), s.label);
  }
  return total / static_cast<double>(data.size());
}

inline double Accuracy(const ModelParams& params, const LabeledDataset& data) {
  Require(!data.empty(), ErrorCode::kInvalidInput, "dataset is empty");
  detail::CheckParams(params);
  std::vector<double> hidden;
  std::size_t correct = 0;
  for (const Sample& s : data) {
    detail::CheckFeatures(params.arch, s.features);
    const int predicted = detail::Forward(params, s.features, hidden) >= 0.5 ? 1 : 0;
    if (predicted == s.label) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(data.size());
}

// Mean gradient of the cross-entropy loss over `batch`.
inline std::vector<double> Gradient(const ModelParams& params,
                                    const LabeledDataset& batch) {
  Require(!batch.empty(), ErrorCode::kInvalidInput, "batch is empty");
  detail::CheckParams(params);
  std::vector<double> grad(params.values.size(), 0.0);
  std::vector<double> hidden;
  const double w = 1.0 / static_cast<double>(batch.size());
  for (const Sample& s : batch) {
    detail::CheckFeatures(params.arch, s.features);
    detail::AccumulateGradient(params, s, w, hidden, grad);
  }
  return grad;
}

struct TrainResult {
  ModelParams params;
  double final_loss = 0.0;
  // Full-dataset loss after each epoch.
  std::vector<double> epoch_losses;
};

// Mini-batch SGD. Each epoch reshuffles the sample order with an engine
// seeded from cfg.rng_seed; the last batch of an epoch may be short.
inline TrainResult LocalTrain(const ModelParams& params, const LabeledDataset& data,
                              const TrainConfig& cfg) {
  Require(!data.empty(), ErrorCode::kInvalidInput, "training dataset is empty");
  cfg.Validate();
  detail::CheckParams(params);
  Require(params.AllFinite(), ErrorCode::kInvalidInput,
          "initial parameters are not finite");
  Require(data.dim() == params.arch.input_dim, ErrorCode::kInvalidInput,
          "dataset dimension " + std::to_string(data.dim()) +
              " does not match input_dim " + std::to_string(params.arch.input_dim));

  TrainResult result{params, 0.0, {}};
  std::vector<double>& w = result.params.values;
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(cfg.rng_seed);
  std::vector<double> grad(w.size());
  std::vector<double> hidden;

  for (int epoch = 0; epoch < cfg.local_epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t stop = std::min(order.size(), start + cfg.batch_size);
      const double weight = 1.0 / static_cast<double>(stop - start);
      std::fill(grad.begin(), grad.end(), 0.0);
      for (std::size_t k = start; k < stop; ++k) {
        detail::AccumulateGradient(result.params, data[order[k]], weight, hidden, grad);
      }
      for (std::size_t i = 0; i < w.size(); ++i) {
        if (!std::isfinite(grad[i])) {
          Fail(ErrorCode::kNumericFailure,
               "non-finite gradient at epoch " + std::to_string(epoch) +
                   ", coordinate " + std::to_string(i));
        }
        w[i] -= cfg.learning_rate * grad[i];
      }
    }
    result.epoch_losses.push_back(DatasetLoss(result.params, data));
  }
  if (!result.params.AllFinite()) {
    Fail(ErrorCode::kNumericFailure, "parameters diverged during local training");
  }
  result.final_loss = result.epoch_losses.empty() ? DatasetLoss(result.params, data)
                                                  : result.epoch_losses.back();
  return result;
}

inline DeltaVector ParamDelta(const ModelParams& before, const ModelParams& after) {
  Require(before.arch == after.arch, ErrorCode::kInvalidInput,
          "architecture mismatch in ParamDelta");
  detail::CheckParams(before);
  detail::CheckParams(after);
  DeltaVector d{std::vector<double>(before.values.size())};
  for (std::size_t i = 0; i < d.values.size(); ++i) {
    d.values[i] = after.values[i] - before.values[i];
  }
  return d;
}

inline ModelParams ApplyDelta(const ModelParams& w, const DeltaVector& delta) {
  detail::CheckParams(w);
  Require(delta.values.size() == w.values.size(), ErrorCode::kInvalidInput,
          "delta length does not match architecture");
  ModelParams out = w;
  for (std::size_t i = 0; i < out.values.size(); ++i) out.values[i] += delta.values[i];
  return out;
}

}  // namespace ccfl
