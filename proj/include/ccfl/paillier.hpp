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

// Paillier cryptosystem with g = n + 1.
//
//   Enc(m; r) = (1 + m n) r^n mod n^2
//   Dec(c)    = L(c^lambda mod n^2) mu mod n,  L(u) = (u - 1) / n
//
// Ciphertexts multiply to add plaintexts, and exponentiation by k scales the
// plaintext by k.

#include <gmpxx.h>

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "ccfl/error.hpp"
#include "ccfl/random.hpp"

namespace ccfl {

using BigInt = mpz_class;

inline constexpr int kMillerRabinRounds = 40;
inline constexpr int kPrimeSearchCap = 200000;

namespace detail {

// Uniform integer with exactly `bits` random bits (top bit may be zero).
inline BigInt RandomBits(Rng& rng, std::size_t bits) {
  const std::size_t words = (bits + 63) / 64;
  std::vector<std::uint64_t> buf(words);
  for (auto& w : buf) w = rng();
  if (bits % 64 != 0) buf.back() &= (std::uint64_t{1} << (bits % 64)) - 1;
  BigInt out;
  mpz_import(out.get_mpz_t(), words, -1, sizeof(std::uint64_t), 0, 0, buf.data());
  return out;
}

// Uniform in [0, bound) by rejection.
inline BigInt RandomBelow(Rng& rng, const BigInt& bound) {
  const std::size_t bits = mpz_sizeinbase(bound.get_mpz_t(), 2);
  while (true) {
    BigInt v = RandomBits(rng, bits);
    if (v < bound) return v;
  }
}

inline BigInt PowMod(const BigInt& base, const BigInt& exp, const BigInt& mod) {
  BigInt out;
  mpz_powm(out.get_mpz_t(), base.get_mpz_t(), exp.get_mpz_t(), mod.get_mpz_t());
  return out;
}

inline BigInt Lcm(const BigInt& a, const BigInt& b) {
  BigInt out;
  mpz_lcm(out.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
  return out;
}

inline BigInt Gcd(const BigInt& a, const BigInt& b) {
  BigInt out;
  mpz_gcd(out.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
  return out;
}

inline bool InvertMod(BigInt& out, const BigInt& a, const BigInt& mod) {
  return mpz_invert(out.get_mpz_t(), a.get_mpz_t(), mod.get_mpz_t()) != 0;
}

}  // namespace detail

// Miller-Rabin with witnesses drawn from `rng`, so the verdict is a pure
// function of the candidate and the engine state.
inline bool IsProbablePrime(const BigInt& n, Rng& rng, int rounds = kMillerRabinRounds) {
  if (n < 2) return false;
  static constexpr unsigned kSmall[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37};
  for (unsigned p : kSmall) {
    if (n == p) return true;
    if (mpz_divisible_ui_p(n.get_mpz_t(), p)) return false;
  }
  const BigInt n_minus_1 = n - 1;
  BigInt d = n_minus_1;
  std::size_t s = 0;
  while (mpz_even_p(d.get_mpz_t())) {
    d >>= 1;
    ++s;
  }
  const BigInt range = n - 3;
  for (int round = 0; round < rounds; ++round) {
    const BigInt a = detail::RandomBelow(rng, range) + 2;
    BigInt x = detail::PowMod(a, d, n);
    if (x == 1 || x == n_minus_1) continue;
    bool composite = true;
    for (std::size_t r = 1; r < s; ++r) {
      x = x * x % n;
      if (x == n_minus_1) {
        composite = false;
        break;
      }
    }
    if (composite) return false;
  }
  return true;
}

// Random prime of exactly `bits` bits with the two top bits set, so the
// product of two such primes has exactly 2 * bits bits.
inline BigInt RandomPrime(Rng& rng, std::size_t bits) {
  Require(bits >= 4, ErrorCode::kInvalidInput, "prime size too small");
  for (int attempt = 0; attempt < kPrimeSearchCap; ++attempt) {
    BigInt candidate = detail::RandomBits(rng, bits);
    mpz_setbit(candidate.get_mpz_t(), bits - 1);
    mpz_setbit(candidate.get_mpz_t(), bits - 2);
    mpz_setbit(candidate.get_mpz_t(), 0);
    if (IsProbablePrime(candidate, rng)) return candidate;
  }
  Fail(ErrorCode::kGenerationFailure,
       "no " + std::to_string(bits) + "-bit prime found within " +
           std::to_string(kPrimeSearchCap) + " candidates");
}

struct PaillierPublicKey {
  BigInt n;
  BigInt n_squared;
  BigInt g;

  std::size_t bits() const { return mpz_sizeinbase(n.get_mpz_t(), 2); }
  bool operator==(const PaillierPublicKey&) const = default;
};

struct PaillierPrivateKey {
  BigInt lambda;
  BigInt mu;

  bool operator==(const PaillierPrivateKey&) const = default;
};

struct PaillierKeypair {
  PaillierPublicKey pub;
  PaillierPrivateKey priv;
};

// Builds keys from two distinct primes. Exposed for small test vectors.
inline PaillierKeypair KeypairFromPrimes(const BigInt& p, const BigInt& q) {
  Require(p != q, ErrorCode::kInvalidInput, "primes must be distinct");
  PaillierKeypair kp;
  kp.pub.n = p * q;
  kp.pub.n_squared = kp.pub.n * kp.pub.n;
  kp.pub.g = kp.pub.n + 1;
  kp.priv.lambda = detail::Lcm(p - 1, q - 1);
  // L(g^lambda mod n^2) = lambda mod n when g = n + 1.
  const BigInt u = detail::PowMod(kp.pub.g, kp.priv.lambda, kp.pub.n_squared);
  const BigInt l = (u - 1) / kp.pub.n;
  Require(detail::InvertMod(kp.priv.mu, l, kp.pub.n), ErrorCode::kGenerationFailure,
          "L(g^lambda) is not invertible mod n");
  return kp;
}

inline bool IsAllowedKeyBits(int bits) {
  return bits == 256 || bits == 512 || bits == 1024 || bits == 2048;
}

inline PaillierKeypair GenerateKeypair(int bits, std::uint64_t seed) {
  Require(IsAllowedKeyBits(bits), ErrorCode::kInvalidInput,
          "key size must be one of 256, 512, 1024, 2048; got " + std::to_string(bits));
  Rng rng(seed);
  const auto half = static_cast<std::size_t>(bits / 2);
  for (int attempt = 0; attempt < 64; ++attempt) {
    const BigInt p = RandomPrime(rng, half);
    const BigInt q = RandomPrime(rng, half);
    if (p == q) continue;
    // gcd(pq, (p-1)(q-1)) = 1 holds for equal-size primes; checked anyway.
    if (detail::Gcd(p * q, (p - 1) * (q - 1)) != 1) continue;
    return KeypairFromPrimes(p, q);
  }
  Fail(ErrorCode::kGenerationFailure, "could not find a valid prime pair");
}

inline void CheckPlaintext(const PaillierPublicKey& pk, const BigInt& m) {
  if (m < 0 || m >= pk.n) Fail(ErrorCode::kRange, "plaintext outside [0, n)");
}

inline void CheckCiphertext(const PaillierPublicKey& pk, const BigInt& c) {
  if (c < 0 || c >= pk.n_squared) Fail(ErrorCode::kRange, "ciphertext outside [0, n^2)");
}

// Encryption with an explicit nonce r in [1, n), gcd(r, n) = 1.
inline BigInt EncryptWithNonce(const PaillierPublicKey& pk, const BigInt& m,
                               const BigInt& r) {
  CheckPlaintext(pk, m);
  if (r < 1 || r >= pk.n || detail::Gcd(r, pk.n) != 1) {
    Fail(ErrorCode::kRange, "nonce must be a unit in [1, n)");
  }
  const BigInt gm = (1 + m * pk.n) % pk.n_squared;
  return gm * detail::PowMod(r, pk.n, pk.n_squared) % pk.n_squared;
}

inline BigInt RandomNonce(const PaillierPublicKey& pk, Rng& rng) {
  while (true) {
    BigInt r = detail::RandomBelow(rng, pk.n);
    if (r != 0 && detail::Gcd(r, pk.n) == 1) return r;
  }
}

inline BigInt Encrypt(const PaillierPublicKey& pk, const BigInt& m, Rng& rng) {
  return EncryptWithNonce(pk, m, RandomNonce(pk, rng));
}

inline BigInt Decrypt(const PaillierPrivateKey& sk, const PaillierPublicKey& pk,
                      const BigInt& c) {
  CheckCiphertext(pk, c);
  const BigInt u = detail::PowMod(c, sk.lambda, pk.n_squared);
  const BigInt l = (u - 1) / pk.n;
  return l * sk.mu % pk.n;
}

inline BigInt AddCipher(const PaillierPublicKey& pk, const BigInt& c1, const BigInt& c2) {
  CheckCiphertext(pk, c1);
  CheckCiphertext(pk, c2);
  return c1 * c2 % pk.n_squared;
}

inline BigInt ScalarMul(const PaillierPublicKey& pk, const BigInt& c, const BigInt& k) {
  CheckCiphertext(pk, c);
  if (k < 0) Fail(ErrorCode::kRange, "scalar must be non-negative");
  return detail::PowMod(c, k, pk.n_squared);
}

inline BigInt ScalarMul(const PaillierPublicKey& pk, const BigInt& c, std::uint64_t k) {
  BigInt big;
  mpz_import(big.get_mpz_t(), 1, -1, sizeof(k), 0, 0, &k);
  return ScalarMul(pk, c, big);
}

}  // namespace ccfl
