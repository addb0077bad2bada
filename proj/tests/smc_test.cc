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
#include "ccfl/smc.hpp"

#include <cmath>
#include <random>
#include <vector>

#include "gtest/gtest.h"

namespace ccfl {
namespace {

constexpr int kScale = kDefaultSmcScaleBits;
const double kTol = std::ldexp(0.5, -kScale);

std::vector<double> RandomVector(Rng& rng, std::size_t n, double sd = 10.0) {
  std::normal_distribution<double> normal(0.0, sd);
  std::vector<double> v(n);
  for (double& x : v) x = normal(rng);
  return v;
}

TEST(FieldTest, PrimeAndArithmetic) {
  EXPECT_EQ(kFieldPrime, 2305843009213693951ULL);
  EXPECT_EQ(field::Add(kFieldPrime - 1, 1), 0u);
  EXPECT_EQ(field::Sub(0, 1), kFieldPrime - 1);
  EXPECT_EQ(field::Decode(field::Encode(-1.5, kScale), kScale), -1.5);
  EXPECT_THROW(field::Encode(std::ldexp(1.0, 60), kScale), Error);
}

TEST(ShareTest, TwoWayRoundTrip) {
  Rng rng(1);
  const auto v = RandomVector(rng, 20);
  const ShareBundle b = Share(v, kScale, 2, rng);
  ASSERT_EQ(b.recipients(), 2u);
  const auto back = ReconstructSum(std::span(&b, 1), kScale);
  for (std::size_t i = 0; i < v.size(); ++i) EXPECT_NEAR(back[i], v[i], kTol);
}

TEST(ShareTest, SharesSumToEncodingExactly) {
  Rng rng(2);
  const auto v = RandomVector(rng, 50);
  const ShareBundle b = Share(v, kScale, 5, rng);
  for (std::size_t i = 0; i < v.size(); ++i) {
    std::uint64_t s = 0;
    for (const auto& share : b.shares) s = field::Add(s, share[i]);
    EXPECT_EQ(s, field::Encode(v[i], kScale));
  }
}

TEST(ShareTest, OppositeUpdatesCancel) {
  Rng rng(3);
  const auto v = RandomVector(rng, 30);
  std::vector<double> neg = v;
  for (double& x : neg) x = -x;
  const std::vector<ShareBundle> bundles = {Share(v, kScale, 3, rng), Share(neg, kScale, 3, rng)};
  for (double x : ReconstructSum(bundles, kScale)) EXPECT_EQ(x, 0.0);
}

TEST(ShareTest, FiveNodesMatchPlaintextSum) {
  Rng rng(4);
  std::vector<std::vector<double>> updates;
  std::vector<ShareBundle> bundles;
  for (int k = 0; k < 5; ++k) {
    updates.push_back(RandomVector(rng, 40, 100.0));
    bundles.push_back(Share(updates.back(), kScale, 5, rng));
  }
  const auto sum = ReconstructSum(bundles, kScale);
  for (std::size_t i = 0; i < sum.size(); ++i) {
    double plain = 0.0;
    for (const auto& u : updates) plain += u[i];
    EXPECT_NEAR(sum[i], plain, 5 * kTol + 1e-12);
  }
}

TEST(ShareTest, EncodedReconstructionIsExact) {
  Rng rng(5);
  std::vector<std::uint64_t> expected(25, 0);
  std::vector<ShareBundle> bundles;
  for (int k = 0; k < 4; ++k) {
    std::vector<std::uint64_t> enc(25);
    for (std::size_t i = 0; i < enc.size(); ++i) {
      enc[i] = field::Random(rng);
      expected[i] = field::Add(expected[i], enc[i]);
    }
    bundles.push_back(ShareEncoded(enc, 4, rng));
  }
  EXPECT_EQ(ReconstructEncodedSum(bundles), expected);
}

TEST(ShareTest, MaskSharesLookUniform) {
  Rng rng(6);
  const std::vector<double> zero(100000, 0.0);
  const ShareBundle b = Share(zero, kScale, 3, rng);
  for (std::size_t j = 0; j + 1 < b.recipients(); ++j) {
    std::vector<int> buckets(16, 0);
    for (std::uint64_t v : b.shares[j]) {
      ++buckets[v >> 57];  // top four of the 61 bits
    }
    for (int c : buckets) {
      EXPECT_GE(c, 4000);
      EXPECT_LE(c, 9000);
    }
  }
}

TEST(ShareTest, InvalidInputs) {
  Rng rng(7);
  EXPECT_THROW(Share(std::vector<double>{1.0}, kScale, 1, rng), Error);
  const std::vector<ShareBundle> mismatched = {Share(std::vector<double>{1.0}, kScale, 2, rng),
                                               Share(std::vector<double>{1.0}, kScale, 3, rng)};
  EXPECT_THROW(ReconstructSum(mismatched, kScale), Error);
  const std::vector<ShareBundle> lengths = {Share(std::vector<double>{1.0}, kScale, 2, rng),
                                            Share(std::vector<double>{1.0, 2.0}, kScale, 2, rng)};
  EXPECT_THROW(ReconstructSum(lengths, kScale), Error);
  EXPECT_THROW(ReconstructSum(std::span<const ShareBundle>{}, kScale), Error);
}

}  // namespace
}  // namespace ccfl
