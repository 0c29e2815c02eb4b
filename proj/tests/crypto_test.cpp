// Copyright (C) 2026 The cmauth Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <set>

#include "cmauth/crypto.hpp"

namespace cmauth {
namespace {

TEST(Hash, StandardVectors) {
  OpCounter ctr;
  EXPECT_EQ(to_hex(hash({}, ctr)),
            "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  EXPECT_EQ(to_hex(hash(as_bytes("abc"), ctr)),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  EXPECT_EQ(ctr.hash_ops(), 2u);
}

TEST(Hmac, Rfc4231Case1) {
  Bytes key(20, 0x0b);
  EXPECT_EQ(to_hex(hmac_sha256(key, as_bytes("Hi There"))),
            "b0344c61d8db38535ca8afceaf0bf12b881dc200c9833da726e9376c2e32cff7");
}

TEST(Hmac, FramedAndCountedAsTwo) {
  NonceSource rng(7);
  auto key = rng.next_key();
  OpCounter ctr;
  auto a = hmac(key, {as_bytes("ts"), as_bytes("root")}, ctr);
  EXPECT_EQ(ctr.hash_ops(), 2u);

  // Framing removes concatenation ambiguity.
  auto b = hmac(key, {as_bytes("tsr"), as_bytes("oot")}, ctr);
  EXPECT_NE(a, b);

  Bytes framed = frame_parts(std::vector<ByteView>{as_bytes("ts"), as_bytes("root")});
  EXPECT_EQ(a, hmac_sha256(key.view(), framed));
  EXPECT_EQ(framed.size(), 4u + 2u + 4u + 4u);
}

TEST(Hmac, KeySensitivity) {
  NonceSource rng(11);
  OpCounter ctr;
  for (int i = 0; i < 100; ++i) {
    auto k1 = rng.next_key();
    auto k2 = rng.next_key();
    auto root = rng.next_digest();
    EXPECT_NE(hmac(k1, {as_bytes("ts"), root.view()}, ctr), hmac(k2, {as_bytes("ts"), root.view()}, ctr));
  }
}

TEST(DeriveKey, DomainSeparatedAndDeterministic) {
  NonceSource rng(3);
  for (int i = 0; i < 200; ++i) {
    auto c = rng.next_digest();
    OpCounter ctr;
    auto k1 = derive_key(c, ctr);
    EXPECT_EQ(ctr.hash_ops(), 1u);
    auto k2 = derive_key(c, ctr);
    EXPECT_EQ(k1, k2);
    EXPECT_NE(k1.bytes, hash(c.view(), ctr).bytes);
  }
}

TEST(Nonce, DeterministicPerSeedAndPosition) {
  NonceSource a(42), b(42), c(43);
  for (int i = 0; i < 5; ++i) {
    auto na = gen_nonce(a);
    EXPECT_EQ(na, gen_nonce(b));
    EXPECT_NE(na, gen_nonce(c));
  }
}

TEST(Nonce, NoDuplicatesInTenThousandDraws) {
  NonceSource rng(1);
  std::set<Nonce> seen;
  for (int i = 0; i < 10'000; ++i) EXPECT_TRUE(seen.insert(gen_nonce(rng)).second);
}

TEST(OpCounter, CountingContractAndCustomModel) {
  NonceSource rng(5);
  OpCounter ctr;
  auto d = hash(as_bytes("x"), ctr);
  hmac(rng.next_key(), {d.view()}, ctr);
  derive_key(d, ctr);
  EXPECT_EQ(ctr.hash_ops(), 1u + 2u + 1u);
  ctr.reset();
  EXPECT_EQ(ctr.hash_ops(), 0u);

  OpCounter cheap(CostModel{1, 1, 1});
  hmac(rng.next_key(), {d.view()}, cheap);
  EXPECT_EQ(cheap.hash_ops(), 1u);
}

TEST(Block32, RejectsWrongLength) {
  Bytes short_input(31);
  EXPECT_THROW(Digest::from(short_input), Error);
}

}  // namespace
}  // namespace cmauth
