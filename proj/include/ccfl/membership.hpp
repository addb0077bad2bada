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

// Loss-threshold membership inference, used as the empirical privacy score.

#include <cmath>
#include <vector>

#include "ccfl/error.hpp"
#include "ccfl/model.hpp"

namespace ccfl {

struct MembershipReport {
  double threshold = 0.0;
  double true_positive_rate = 0.0;
  double false_positive_rate = 0.0;
  // |TPR - FPR| in [0, 1].
  double advantage = 0.0;
  double privacy_score = 1.0;
};

// Guesses "member" when a sample's loss is below the midpoint of the mean
// member and mean non-member losses.
inline MembershipReport MembershipAdvantage(const ModelParams& model,
                                            const LabeledDataset& members,
                                            const LabeledDataset& nonmembers) {
  Require(!members.empty() && !nonmembers.empty(), ErrorCode::kInvalidInput,
          "membership attack needs nonempty member and non-member sets");
  auto losses = [&](const LabeledDataset& d) {
    std::vector<double> out;
    out.reserve(d.size());
    for (const Sample& s : d) out.push_back(SampleLoss(model, s));
    return out;
  };
  const std::vector<double> in = losses(members);
  const std::vector<double> out = losses(nonmembers);
  auto mean = [](const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
  };
  auto below = [](const std::vector<double>& v, double t) {
    std::size_t c = 0;
    for (double x : v) c += x < t ? 1 : 0;
    return static_cast<double>(c) / static_cast<double>(v.size());
  };
  MembershipReport r;
  r.threshold = 0.5 * (mean(in) + mean(out));
  r.true_positive_rate = below(in, r.threshold);
  r.false_positive_rate = below(out, r.threshold);
  r.advantage = std::fabs(r.true_positive_rate - r.false_positive_rate);
  r.privacy_score = 1.0 - r.advantage;
  return r;
}

}  // namespace ccfl
