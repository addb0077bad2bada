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

// Frozen feature front-end shared by all nodes. A seeded random Fourier
// feature map z_j = sqrt(2/D) * cos(omega_j . x + b_j) replaces raw features
// before local training.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "ccfl/error.hpp"
#include "ccfl/model.hpp"
#include "ccfl/random.hpp"

namespace ccfl {

enum class ExtractorKind { kRandomFourier, kIdentity };

struct FeatureExtractorSpec {
  ExtractorKind kind = ExtractorKind::kRandomFourier;
  std::uint64_t seed = 0;
  std::size_t input_dim = 1;
  std::size_t output_dim = 64;
  // Variance of each projection coordinate: omega ~ N(0, gamma * I).
  double gamma = 1.0;

  bool operator==(const FeatureExtractorSpec&) const = default;
};

class FeatureExtractor {
 public:
  explicit FeatureExtractor(const FeatureExtractorSpec& spec) : spec_(spec) {
    Require(spec.input_dim > 0 && spec.output_dim > 0, ErrorCode::kInvalidInput,
            "extractor dimensions must be positive");
    if (spec.kind == ExtractorKind::kIdentity) {
      Require(spec.output_dim == spec.input_dim, ErrorCode::kInvalidInput,
              "identity extractor requires output_dim == input_dim");
      return;
    }
    Require(std::isfinite(spec.gamma) && spec.gamma > 0, ErrorCode::kInvalidInput,
            "gamma must be positive");
    Rng rng(spec.seed);
    std::normal_distribution<double> normal(0.0, std::sqrt(spec.gamma));
    std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
    omega_.resize(spec.output_dim * spec.input_dim);
    for (double& w : omega_) w = normal(rng);
    phase_.resize(spec.output_dim);
    for (double& b : phase_) b = phase(rng);
    amplitude_ = std::sqrt(2.0 / static_cast<double>(spec.output_dim));
  }

  const FeatureExtractorSpec& spec() const { return spec_; }
  std::size_t input_dim() const { return spec_.input_dim; }
  std::size_t output_dim() const { return spec_.output_dim; }
  double amplitude() const { return amplitude_; }

  std::vector<double> Extract(std::span<const double> x) const {
    Require(x.size() == spec_.input_dim, ErrorCode::kInvalidInput,
            "extractor expects input of length " + std::to_string(spec_.input_dim) +
                ", got " + std::to_string(x.size()));
    if (spec_.kind == ExtractorKind::kIdentity) return {x.begin(), x.end()};
    std::vector<double> z(spec_.output_dim);
    const std::size_t d = spec_.input_dim;
    for (std::size_t j = 0; j < z.size(); ++j) {
      double a = phase_[j];
      for (std::size_t i = 0; i < d; ++i) a += omega_[j * d + i] * x[i];
      z[j] = amplitude_ * std::cos(a);
    }
    return z;
  }

  // Features replaced, labels and order preserved.
  LabeledDataset Augment(const LabeledDataset& data) const {
    LabeledDataset out;
    for (const Sample& s : data) out.Add(Sample{Extract(s.features), s.label});
    return out;
  }

 private:
  FeatureExtractorSpec spec_;
  std::vector<double> omega_;
  std::vector<double> phase_;
  double amplitude_ = 1.0;
};

}  // namespace ccfl
