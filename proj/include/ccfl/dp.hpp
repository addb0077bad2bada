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

// Gaussian-mechanism privatization of model updates with basic (linear)
// budget composition.

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "ccfl/error.hpp"
#include "ccfl/random.hpp"

namespace ccfl {

struct DpConfig {
  double epsilon = 1.0;
  double delta = 1e-5;
  double clip_norm = 1.0;
  int rounds = 1;

  void Validate() const {
    Require(std::isfinite(epsilon) && epsilon > 0, ErrorCode::kInvalidInput,
            "epsilon must be positive");
    Require(delta > 0 && delta < 1, ErrorCode::kInvalidInput, "delta must lie in (0, 1)");
    Require(std::isfinite(clip_norm) && clip_norm > 0, ErrorCode::kInvalidInput,
            "clip_norm must be positive");
    Require(rounds >= 1, ErrorCode::kInvalidInput, "rounds must be positive");
  }

  // Linear composition over all rounds.
  double TotalEpsilon() const { return static_cast<double>(rounds) * epsilon; }
};

inline double L2Norm(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

// delta * min(1, C / ||delta||).
inline std::vector<double> ClipUpdate(std::span<const double> delta, double clip_norm) {
  Require(clip_norm > 0, ErrorCode::kInvalidInput, "clip_norm must be positive");
  std::vector<double> out(delta.begin(), delta.end());
  const double norm = L2Norm(delta);
  if (norm > clip_norm) {
    const double factor = clip_norm / norm;
    for (double& x : out) x *= factor;
    // Rounding can leave the result a hair above C.
    while (L2Norm(out) > clip_norm) {
      for (double& x : out) x = std::nextafter(x, 0.0);
    }
  }
  return out;
}

// sigma = C * sqrt(2 ln(1.25 / delta)) / epsilon.
inline double GaussianSigma(double clip_norm, double epsilon, double delta) {
  Require(std::isfinite(clip_norm) && clip_norm > 0, ErrorCode::kInvalidInput,
          "clip_norm must be positive");
  Require(std::isfinite(epsilon) && epsilon > 0, ErrorCode::kInvalidInput,
          "epsilon must be positive");
  Require(delta > 0 && delta < 1, ErrorCode::kInvalidInput, "delta must lie in (0, 1)");
  return clip_norm * std::sqrt(2.0 * std::log(1.25 / delta)) / epsilon;
}

inline std::vector<double> DpPrivatize(std::span<const double> delta, const DpConfig& cfg,
                                       Rng& rng) {
  cfg.Validate();
  std::vector<double> out = ClipUpdate(delta, cfg.clip_norm);
  std::normal_distribution<double> noise(0.0, GaussianSigma(cfg.clip_norm, cfg.epsilon, cfg.delta));
  for (double& x : out) x += noise(rng);
  return out;
}

}  // namespace ccfl
