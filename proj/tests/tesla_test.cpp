// Copyright (C) 2026 The cmauth Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <random>

#include "cmauth/tesla.hpp"

namespace cmauth {
namespace {

Digest seed_of(std::uint64_t s) { return NonceSource(s).next_digest(); }

TEST(KeyChain, GenerationCostsLAndLinksBackwards) {
  OpCounter ctr;
  auto chain = generate_chain(seed_of(1), 50, ctr);
  EXPECT_EQ(ctr.hash_ops(), 50u);
  ASSERT_EQ(chain.values.size(), 51u);
  EXPECT_EQ(chain.final_key(), seed_of(1));
  for (std::size_t i = 1; i <= 50; ++i) {
    EXPECT_EQ(chain.values[i - 1], sha256(chain.values[i].view()));
  }
}

TEST(KeyChain, BaseIntervalOffsetsLookup) {
  OpCounter ctr;
  auto chain = generate_chain(seed_of(2), 4, ctr, 10);
  EXPECT_EQ(chain.last_interval(), 14u);
  EXPECT_TRUE(chain.covers(10));
  EXPECT_FALSE(chain.covers(15));
  EXPECT_EQ(chain.key_for(14), chain.final_key());
  EXPECT_THROW(chain.key_for(9), Error);
}

TEST(VerifyDisclosedKey, CostEqualsGap) {
  OpCounter gen;
  auto chain = generate_chain(seed_of(3), 40, gen);
  std::mt19937_64 rng(3);
  ReceiverKeyStore store{0, chain.commitment()};
  std::uint32_t i = 0;
  while (i < 35) {
    const auto next = i + 1 + static_cast<std::uint32_t>(rng() % 5);
    OpCounter ctr;
    EXPECT_TRUE(verify_disclosed_key(chain.values[next], next, store, ctr));
    EXPECT_EQ(ctr.hash_ops(), next - i);
    EXPECT_EQ(store.index, next);
    i = next;
  }
}

TEST(VerifyDisclosedKey, RejectsWrongKeyWithoutAdvancing) {
  OpCounter ctr;
  auto chain = generate_chain(seed_of(4), 10, ctr);
  ReceiverKeyStore store{0, chain.commitment()};
  EXPECT_FALSE(verify_disclosed_key(seed_of(99), 3, store, ctr));
  EXPECT_EQ(store.index, 0u);
  // Right key, wrong index claim.
  EXPECT_FALSE(verify_disclosed_key(chain.values[3], 4, store, ctr));
  EXPECT_EQ(store.index, 0u);
}

TEST(VerifyDisclosedKey, StaleIndex) {
  OpCounter ctr;
  auto chain = generate_chain(seed_of(5), 10, ctr);
  ReceiverKeyStore store{0, chain.commitment()};
  ASSERT_TRUE(verify_disclosed_key(chain.values[4], 4, store, ctr));
  for (std::uint32_t j : {4u, 2u}) {
    try {
      verify_disclosed_key(chain.values[j], j, store, ctr);
      FAIL();
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::kStaleIndex);
    }
  }
}

TEST(Schedule, DisclosureTimes) {
  DisclosureSchedule s{1000, 5000, 2};
  EXPECT_EQ(s.interval_start(1), 5000);
  EXPECT_EQ(s.interval_start(3), 7000);
  EXPECT_EQ(s.disclosure_time(1), 7000);
}

TEST(Schedule, Validate) {
  DisclosureSchedule s{1000, 0, 1};
  EXPECT_NO_THROW(validate(s, 500, 499));
  EXPECT_THROW(validate(s, 500, 500), Error);
  s.delay = 0;
  EXPECT_THROW(validate(s, 0, 0), Error);
  s.delay = 2;
  EXPECT_NO_THROW(validate(s, 1500, 100));
}

TEST(SafetyCheck, StrictBoundary) {
  DisclosureSchedule s{1000, 0, 1};
  // Interval 1 key is disclosed at t = 1000.
  EXPECT_EQ(safety_check(899, s, 1, 100), Safety::kSafe);
  EXPECT_EQ(safety_check(900, s, 1, 100), Safety::kUnsafe);
  EXPECT_EQ(safety_check(1500, s, 1, 0), Safety::kUnsafe);
  EXPECT_EQ(safety_check(1500, s, 2, 0), Safety::kSafe);
}

TEST(KeyDisclosure, WireRoundTrip) {
  KeyDisclosure k{7, seed_of(6)};
  Bytes out;
  encode_key_disclosure_into(out, k);
  EXPECT_EQ(out.size(), kKeyDisclosureBytes);
  Reader r(out);
  EXPECT_EQ(decode_key_disclosure(r), k);
  EXPECT_TRUE(r.done());
}

TEST(MacKey, DistinctFromChainValue) {
  OpCounter ctr;
  auto chain = generate_chain(seed_of(7), 3, ctr);
  auto k = mac_key_for_interval(chain.values[2], ctr);
  EXPECT_NE(k.bytes, chain.values[2].bytes);
  EXPECT_NE(k.bytes, chain.values[1].bytes);
}

}  // namespace
}  // namespace cmauth
