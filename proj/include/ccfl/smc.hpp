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

// Additive secret sharing over the Mersenne field F_p, p = 2^61 - 1.
//
// A node splits its fixed-point encoded update x into K shares: K - 1
// uniform field vectors and x minus their sum. Recipient j adds up the j-th
// shares of every node; summing the recipients' totals yields sum_i x_i
// while any K - 1 shares of one node are independent of its update.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ccfl/error.hpp"
#include "ccfl/random.hpp"

namespace ccfl {

inline constexpr std::uint64_t kFieldPrime = (std::uint64_t{1} << 61) - 1;
inline constexpr int kDefaultSmcScaleBits = 20;

namespace field {

inline std::uint64_t Add(std::uint64_t a, std::uint64_t b) {
  const std::uint64_t s = a + b;  // < 2^62, no overflow
  return s >= kFieldPrime ? s - kFieldPrime : s;
}

inline std::uint64_t Sub(std::uint64_t a, std::uint64_t b) {
  return a >= b ? a - b : a + kFieldPrime - b;
}

inline std::uint64_t Random(Rng& rng) {
  while (true) {
    const std::uint64_t v = rng() >> 3;
    if (v < kFieldPrime) return v;
  }
}

// round(x * 2^scale_bits) with negatives mapped to p - |v|.
inline std::uint64_t Encode(double x, int scale_bits) {
  Require(std::isfinite(x), ErrorCode::kRange, "cannot encode a non-finite value");
  const double scaled = std::nearbyint(std::ldexp(x, scale_bits));
  if (!(std::fabs(scaled) < static_cast<double>(kFieldPrime / 2))) {
    Fail(ErrorCode::kRange, "value " + std::to_string(x) + " overflows the field");
  }
  const auto v = static_cast<std::int64_t>(scaled);
  return v >= 0 ? static_cast<std::uint64_t>(v) : kFieldPrime - static_cast<std::uint64_t>(-v);
}

inline double Decode(std::uint64_t v, int scale_bits) {
  Require(v < kFieldPrime, ErrorCode::kRange, "value outside the field");
  const std::int64_t s = v > kFieldPrime / 2 ? -static_cast<std::int64_t>(kFieldPrime - v)
                                             : static_cast<std::int64_t>(v);
  return std::ldexp(static_cast<double>(s), -scale_bits);
}

}  // namespace field

struct ShareBundle {
  std::uint64_t field_prime = kFieldPrime;
  // shares[j] is the vector sent to recipient j.
  std::vector<std::vector<std::uint64_t>> shares;

  std::size_t recipients() const { return shares.size(); }
  std::size_t length() const { return shares.empty() ? 0 : shares.front().size(); }
};

inline ShareBundle ShareEncoded(std::span<const std::uint64_t> encoded, std::size_t k, Rng& rng) {
  Require(k >= 2, ErrorCode::kInvalidInput, "need at least two recipients");
  ShareBundle b;
  b.shares.assign(k, std::vector<std::uint64_t>(encoded.size()));
  for (std::size_t i = 0; i < encoded.size(); ++i) {
    Require(encoded[i] < kFieldPrime, ErrorCode::kRange, "encoded value outside the field");
    std::uint64_t rest = encoded[i];
    for (std::size_t j = 0; j + 1 < k; ++j) {
      const std::uint64_t r = field::Random(rng);
      b.shares[j][i] = r;
      rest = field::Sub(rest, r);
    }
    b.shares[k - 1][i] = rest;
  }
  return b;
}

inline ShareBundle Share(std::span<const double> update, int scale_bits, std::size_t k, Rng& rng) {
  std::vector<std::uint64_t> encoded(update.size());
  for (std::size_t i = 0; i < update.size(); ++i) {
    try {
      encoded[i] = field::Encode(update[i], scale_bits);
    } catch (const Error& e) {
      Fail(e.code(), "coordinate " + std::to_string(i) + ": " + e.what());
    }
  }
  return ShareEncoded(encoded, k, rng);
}

// Exact field sum of every node's encoded update.
inline std::vector<std::uint64_t> ReconstructEncodedSum(std::span<const ShareBundle> bundles) {
  Require(!bundles.empty(), ErrorCode::kInvalidInput, "no share bundles");
  const std::size_t k = bundles.front().recipients();
  const std::size_t len = bundles.front().length();
  Require(k >= 2, ErrorCode::kInvalidInput, "bundle has fewer than two shares");
  // Per-recipient running totals, as each recipient would hold them.
  std::vector<std::vector<std::uint64_t>> held(k, std::vector<std::uint64_t>(len, 0));
  for (const ShareBundle& b : bundles) {
    Require(b.field_prime == kFieldPrime, ErrorCode::kInvalidInput, "field mismatch");
    Require(b.recipients() == k, ErrorCode::kInvalidInput, "bundles disagree on K");
    for (std::size_t j = 0; j < k; ++j) {
      Require(b.shares[j].size() == len, ErrorCode::kInvalidInput,
              "bundles disagree on vector length");
      for (std::size_t i = 0; i < len; ++i) held[j][i] = field::Add(held[j][i], b.shares[j][i]);
    }
  }
  std::vector<std::uint64_t> total(len, 0);
  for (const auto& h : held) {
    for (std::size_t i = 0; i < len; ++i) total[i] = field::Add(total[i], h[i]);
  }
  return total;
}

// Signed fixed-point decode of the summed updates. Correct while
// sum_i |x_i| * 2^scale_bits stays below p / 2.
inline std::vector<double> ReconstructSum(std::span<const ShareBundle> bundles, int scale_bits) {
  const auto total = ReconstructEncodedSum(bundles);
  std::vector<double> out(total.size());
  for (std::size_t i = 0; i < total.size(); ++i) out[i] = field::Decode(total[i], scale_bits);
  return out;
}

}  // namespace ccfl
