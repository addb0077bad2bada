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

// Encrypted weighted aggregation of model parameters.
//
// Nodes encrypt fixed-point encodings of their parameters. The aggregator
// raises each ciphertext to the node's integer sample count and multiplies
// the results, giving Enc(sum_i N_i * w_i). After decryption the sum is
// divided by N = sum_i N_i in plaintext, which equals the weighted mean
// sum_i (N_i / N) w_i without needing fractional homomorphic scalars.

#include <gmpxx.h>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ccfl/error.hpp"
#include "ccfl/model.hpp"
#include "ccfl/paillier.hpp"
#include "ccfl/random.hpp"

namespace ccfl {

inline constexpr int kDefaultHeScaleBits = 40;

// Reals to residues mod n: round(x * scale), negatives in the upper half.
class FixedPointCodec {
 public:
  FixedPointCodec(BigInt modulus, int scale_bits = kDefaultHeScaleBits)
      : modulus_(std::move(modulus)), scale_bits_(scale_bits) {
    Require(scale_bits >= 0 && scale_bits <= 62, ErrorCode::kInvalidInput,
            "scale_bits must lie in [0, 62]");
    Require(modulus_ > 2, ErrorCode::kInvalidInput, "modulus too small");
    scale_ = BigInt(1) << scale_bits;
    half_ = modulus_ / 2;
  }

  const BigInt& modulus() const { return modulus_; }
  int scale_bits() const { return scale_bits_; }
  double scale() const { return std::ldexp(1.0, scale_bits_); }
  // Worst-case absolute error of one encode/decode roundtrip.
  double Resolution() const { return std::ldexp(0.5, -scale_bits_); }

  BigInt Encode(double x) const {
    Require(std::isfinite(x), ErrorCode::kRange, "cannot encode a non-finite value");
    // Scaling by a power of two is exact; rounding happens once.
    const double scaled = std::nearbyint(std::ldexp(x, scale_bits_));
    BigInt v(scaled);
    if (abs(v) >= half_) {
      Fail(ErrorCode::kRange, "value " + std::to_string(x) + " overflows the codec range");
    }
    if (v < 0) v += modulus_;
    return v;
  }

  double Decode(const BigInt& v) const {
    if (v < 0 || v >= modulus_) Fail(ErrorCode::kRange, "residue outside [0, n)");
    const BigInt signed_v = v > half_ ? BigInt(v - modulus_) : v;
    return std::ldexp(signed_v.get_d(), -scale_bits_);
  }

 private:
  BigInt modulus_;
  int scale_bits_;
  BigInt scale_;
  BigInt half_;
};

struct CipherVector {
  // Bit length of the key modulus n the elements were produced under.
  std::uint32_t modulus_bits = 0;
  std::vector<BigInt> elements;

  std::size_t size() const { return elements.size(); }
  bool operator==(const CipherVector&) const = default;
};

inline CipherVector EncryptParams(const PaillierPublicKey& pk, const FixedPointCodec& codec,
                                  const ModelParams& w, Rng& rng) {
  CipherVector cv;
  cv.modulus_bits = static_cast<std::uint32_t>(pk.bits());
  cv.elements.reserve(w.values.size());
  for (std::size_t i = 0; i < w.values.size(); ++i) {
    BigInt m;
    try {
      m = codec.Encode(w.values[i]);
    } catch (const Error& e) {
      Fail(e.code(), "coordinate " + std::to_string(i) + ": " + e.what());
    }
    cv.elements.push_back(Encrypt(pk, m, rng));
  }
  return cv;
}

struct WeightedCipherUpdate {
  CipherVector update;
  std::uint64_t sample_count = 0;
};

struct EncryptedAggregate {
  CipherVector sum;
  std::uint64_t total_samples = 0;
};

// Elementwise Enc(sum_i N_i w_i). Keeping sum_i N_i |w_i| scale below n/2
// is the caller's responsibility; overflow wraps silently.
inline EncryptedAggregate AggregateEncrypted(const PaillierPublicKey& pk,
                                             std::span<const WeightedCipherUpdate> updates) {
  Require(!updates.empty(), ErrorCode::kInvalidInput, "no updates to aggregate");
  const std::size_t len = updates.front().update.size();
  EncryptedAggregate agg;
  agg.sum.modulus_bits = static_cast<std::uint32_t>(pk.bits());
  agg.sum.elements.assign(len, BigInt(1));  // Enc(0) with r = 1
  for (const auto& u : updates) {
    Require(u.update.size() == len, ErrorCode::kInvalidInput,
            "cipher vectors have inconsistent lengths");
    Require(u.sample_count >= 1, ErrorCode::kInvalidInput, "sample count must be positive");
    for (std::size_t i = 0; i < len; ++i) {
      agg.sum.elements[i] =
          AddCipher(pk, agg.sum.elements[i], ScalarMul(pk, u.update.elements[i], u.sample_count));
    }
    agg.total_samples += u.sample_count;
  }
  return agg;
}

inline ModelParams DecryptParams(const PaillierPrivateKey& sk, const PaillierPublicKey& pk,
                                 const FixedPointCodec& codec, const CipherVector& cv,
                                 std::uint64_t divisor, const ModelArch& arch) {
  Require(divisor >= 1, ErrorCode::kInvalidInput, "divisor must be positive");
  Require(cv.size() == arch.ParamCount(), ErrorCode::kInvalidInput,
          "cipher vector length does not match architecture");
  ModelParams out{arch, std::vector<double>(cv.size())};
  const auto n = static_cast<double>(divisor);
  for (std::size_t i = 0; i < cv.size(); ++i) {
    out.values[i] = codec.Decode(Decrypt(sk, pk, cv.elements[i])) / n;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Wire format
//
//   "FCS1" | u32 modulus bits | u32 count | count x (u32 len | len bytes)
//
// All integers big-endian; each element is its minimal big-endian magnitude
// (zero has length 0).

inline constexpr char kCipherMagic[4] = {'F', 'C', 'S', '1'};

namespace detail {

inline void PutU32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  out.push_back(static_cast<std::uint8_t>(v >> 24));
  out.push_back(static_cast<std::uint8_t>(v >> 16));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v));
}

inline std::uint32_t GetU32(std::span<const std::uint8_t> in, std::size_t& pos) {
  Require(pos + 4 <= in.size(), ErrorCode::kParse, "truncated cipher vector");
  const std::uint32_t v = (std::uint32_t{in[pos]} << 24) | (std::uint32_t{in[pos + 1]} << 16) |
                          (std::uint32_t{in[pos + 2]} << 8) | std::uint32_t{in[pos + 3]};
  pos += 4;
  return v;
}

}  // namespace detail

inline std::vector<std::uint8_t> SerializeCipherVector(const CipherVector& cv) {
  std::vector<std::uint8_t> out(kCipherMagic, kCipherMagic + 4);
  detail::PutU32(out, cv.modulus_bits);
  detail::PutU32(out, static_cast<std::uint32_t>(cv.elements.size()));
  for (const BigInt& e : cv.elements) {
    Require(e >= 0, ErrorCode::kRange, "negative ciphertext element");
    const std::size_t len = e == 0 ? 0 : (mpz_sizeinbase(e.get_mpz_t(), 2) + 7) / 8;
    detail::PutU32(out, static_cast<std::uint32_t>(len));
    const std::size_t at = out.size();
    out.resize(at + len);
    if (len > 0) {
      std::size_t written = 0;
      mpz_export(out.data() + at, &written, 1, 1, 1, 0, e.get_mpz_t());
    }
  }
  return out;
}

inline CipherVector DeserializeCipherVector(std::span<const std::uint8_t> in) {
  Require(in.size() >= 12 && std::equal(kCipherMagic, kCipherMagic + 4, in.begin()),
          ErrorCode::kParse, "bad cipher vector magic");
  std::size_t pos = 4;
  CipherVector cv;
  cv.modulus_bits = detail::GetU32(in, pos);
  const std::uint32_t count = detail::GetU32(in, pos);
  // Each element needs at least its 4-byte length prefix.
  Require(count <= (in.size() - pos) / 4, ErrorCode::kParse, "element count exceeds payload");
  const std::size_t max_len = (2 * static_cast<std::size_t>(cv.modulus_bits) + 7) / 8;
  cv.elements.reserve(count);
  for (std::uint32_t i = 0; i < count; ++i) {
    const std::uint32_t len = detail::GetU32(in, pos);
    Require(len <= max_len, ErrorCode::kParse,
            "element " + std::to_string(i) + " longer than n^2");
    Require(pos + len <= in.size(), ErrorCode::kParse, "truncated cipher vector");
    Require(len == 0 || in[pos] != 0, ErrorCode::kParse,
            "element " + std::to_string(i) + " is not minimally encoded");
    BigInt e;
    if (len > 0) mpz_import(e.get_mpz_t(), len, 1, 1, 1, 0, in.data() + pos);
    cv.elements.push_back(std::move(e));
    pos += len;
  }
  Require(pos == in.size(), ErrorCode::kParse, "trailing bytes after cipher vector");
  return cv;
}

}  // namespace ccfl
