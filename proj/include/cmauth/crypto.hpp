// Copyright (C) 2026 The cmauth Authors
// SPDX-License-Identifier: Apache-2.0

// Secure-hash primitives with an operation-counting layer.
//
// Every hash-based primitive takes an OpCounter and charges it in units of
// "secure hash operations": 1 per hash, 2 per HMAC, 1 per key derivation.
// These units are the cost model used by all protocol code and by the
// closed-form complexity check.

#pragma once

#include <openssl/evp.h>
#include <openssl/hmac.h>

#include <cstdint>
#include <initializer_list>
#include <stdexcept>

#include "cmauth/bytes.hpp"

namespace cmauth {

struct DigestTag {};
struct KeyTag {};
struct NonceTag {};

using Digest = Block32<DigestTag>;
using SymmetricKey = Block32<KeyTag>;
using Nonce = Block32<NonceTag>;

/// Domain-separation prefixes for the different uses of the digest function.
/// Chain steps hash exactly 32 bytes with no prefix, so all input spaces are
/// disjoint by length or first byte.
namespace prefix {
inline constexpr std::uint8_t kLeaf = 0x00;
inline constexpr std::uint8_t kNode = 0x01;
inline constexpr std::uint8_t kDeriveKey = 0x02;
}  // namespace prefix

/// Per-primitive charges. The defaults are the published accounting; other
/// values exist only to demonstrate that the complexity check detects a wrong
/// convention.
struct CostModel {
  std::uint64_t hash = 1;
  std::uint64_t hmac = 2;
  std::uint64_t derive_key = 1;
};

class OpCounter {
 public:
  OpCounter() = default;
  explicit OpCounter(CostModel model) : model_(model) {}

  std::uint64_t hash_ops() const { return hash_ops_; }
  const CostModel& model() const { return model_; }

  void charge_hash() { hash_ops_ += model_.hash; }
  void charge_hmac() { hash_ops_ += model_.hmac; }
  void charge_derive_key() { hash_ops_ += model_.derive_key; }
  void reset() { hash_ops_ = 0; }

 private:
  CostModel model_{};
  std::uint64_t hash_ops_ = 0;
};

namespace detail {

inline const EVP_MD* sha256_md() {
  // Fetched once; avoids the implicit per-call provider lookup.
  static EVP_MD* md = EVP_MD_fetch(nullptr, "SHA256", nullptr);
  if (md == nullptr) throw std::runtime_error("SHA-256 unavailable in libcrypto");
  return md;
}

}  // namespace detail

/// Uncounted SHA-256. Used for test vectors and for the nonce generator.
inline Digest sha256(ByteView data) {
  Digest d;
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), d.bytes.data(), &len, detail::sha256_md(), nullptr) != 1 ||
      len != Digest::kSize) {
    throw std::runtime_error("EVP_Digest failed");
  }
  return d;
}

/// Uncounted HMAC-SHA-256 with an arbitrary-length key.
inline Digest hmac_sha256(ByteView key, ByteView data) {
  Digest d;
  unsigned int len = 0;
  if (HMAC(detail::sha256_md(), key.data(), static_cast<int>(key.size()), data.data(), data.size(),
           d.bytes.data(), &len) == nullptr ||
      len != Digest::kSize) {
    throw std::runtime_error("HMAC failed");
  }
  return d;
}

inline Digest hash(ByteView data, OpCounter& ctr) {
  ctr.charge_hash();
  return sha256(data);
}

/// Each part is framed as a 4-byte big-endian length followed by its bytes.
inline Bytes frame_parts(std::span<const ByteView> parts) {
  Bytes framed;
  for (auto p : parts) {
    put_u32(framed, static_cast<std::uint32_t>(p.size()));
    put_bytes(framed, p);
  }
  return framed;
}

inline Digest hmac(const SymmetricKey& key, std::span<const ByteView> parts, OpCounter& ctr) {
  ctr.charge_hmac();
  return hmac_sha256(key.view(), frame_parts(parts));
}

inline Digest hmac(const SymmetricKey& key, std::initializer_list<ByteView> parts, OpCounter& ctr) {
  return hmac(key, std::span<const ByteView>(parts.begin(), parts.size()), ctr);
}

/// H': a one-way function distinct from H, used to turn chain values into
/// MAC keys.
inline SymmetricKey derive_key(const Digest& c, OpCounter& ctr) {
  ctr.charge_derive_key();
  Bytes in;
  in.reserve(1 + Digest::kSize);
  put_u8(in, prefix::kDeriveKey);
  put_bytes(in, c.view());
  return SymmetricKey::from(sha256(in).view());
}

/// Deterministic generator of 32-byte secrets: SHA-256 in counter mode over
/// a 64-bit seed. Same seed and call sequence give the same output.
class NonceSource {
 public:
  explicit NonceSource(std::uint64_t seed) : seed_(seed) {}

  Nonce next_nonce() { return Nonce::from(next_block().view()); }
  SymmetricKey next_key() { return SymmetricKey::from(next_block().view()); }
  Digest next_digest() { return next_block(); }

  std::uint64_t seed() const { return seed_; }
  std::uint64_t position() const { return counter_; }

 private:
  Digest next_block() {
    Bytes in;
    put_bytes(in, as_bytes("cmauth.nonce"));
    put_u64(in, seed_);
    put_u64(in, counter_++);
    return sha256(in);
  }

  std::uint64_t seed_;
  std::uint64_t counter_ = 0;
};

inline Nonce gen_nonce(NonceSource& rng) { return rng.next_nonce(); }

}  // namespace cmauth
