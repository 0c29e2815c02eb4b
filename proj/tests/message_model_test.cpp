// Copyright (C) 2026 The cmauth Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <numeric>
#include <random>
#include <set>

#include "cmauth/message_model.hpp"

namespace cmauth {
namespace {

Message random_message(std::mt19937_64& gen) {
  auto tpl = sample_template(static_cast<unsigned>(gen() % 9));
  auto& f = tpl.fields;
  f.gocb_ref = std::string(gen() % 4, static_cast<char>('a' + gen() % 3));
  f.go_id = std::string(gen() % 4, 'g');
  f.st_num = static_cast<std::uint32_t>(gen() % 3);
  f.sq_num = static_cast<std::uint32_t>(gen() % 3);
  f.test = gen() % 2;
  f.t_ms = gen() % 2;
  f.fixed_all_data.resize(gen() % 3, static_cast<std::uint8_t>(gen() % 2));
  return instantiate(tpl, gen() % (1u << tpl.k));
}

TEST(CanonicalEncode, InjectiveOverRandomPairs) {
  std::mt19937_64 gen(99);
  for (int i = 0; i < 20'000; ++i) {
    auto a = random_message(gen);
    auto b = random_message(gen);
    EXPECT_EQ(a == b, canonical_encode(a) == canonical_encode(b));
  }
}

TEST(CanonicalEncode, DecodeInvertsEncode) {
  std::mt19937_64 gen(5);
  for (int i = 0; i < 2'000; ++i) {
    auto m = random_message(gen);
    EXPECT_EQ(canonical_decode(canonical_encode(m)), m);
  }
}

TEST(CanonicalEncode, FlippingAnUnpredictableBitChangesEncoding) {
  auto m = instantiate(sample_template(5), 0b10110);
  for (std::size_t b = 0; b < 5; ++b) {
    auto flipped = m;
    flipped.unpredictable_bits[b] = !flipped.unpredictable_bits[b];
    EXPECT_NE(canonical_encode(m), canonical_encode(flipped));
  }
}

TEST(CanonicalEncode, StableLayout) {
  Message m;
  m.fields.gocb_ref = "G";
  m.fields.time_allowed_to_live_ms = 0x0102;
  m.fields.dat_set = "D";
  m.fields.go_id = "I";
  m.fields.t_ms = 3;
  m.fields.st_num = 4;
  m.fields.sq_num = 5;
  m.fields.test = true;
  m.fields.conf_rev = 6;
  m.fields.nds_com = false;
  m.fields.num_dat_set_entries = 7;
  m.fields.fixed_all_data = {0xaa};
  m.unpredictable_bits = {true, false, true};
  EXPECT_EQ(to_hex(canonical_encode(m)),
            "0147"              // gocbRef
            "0102"              // timeAllowedtoLive
            "0144" "0149"       // datSet, goID
            "0000000000000003"  // t
            "00000004" "00000005"
            "01"                // test
            "00000006"
            "00"                // ndsCom
            "0007"
            "00000001" "aa"     // allData
            "0003" "a0");       // 3 bits 101, padded
}

TEST(CanonicalEncode, OversizeString) {
  Message m;
  m.fields.go_id = std::string(256, 'x');
  try {
    canonical_encode(m);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kOversize);
  }
  m.fields.go_id = std::string(255, 'x');
  EXPECT_NO_THROW(canonical_encode(m));
}

TEST(CanonicalDecode, RejectsTruncationAndPadding) {
  auto enc = canonical_encode(instantiate(sample_template(3), 5));
  Bytes truncated(enc.begin(), enc.end() - 1);
  EXPECT_THROW(canonical_decode(truncated), Error);
  auto padded = enc;
  padded.back() |= 0x01;
  EXPECT_THROW(canonical_decode(padded), Error);
}

TEST(EnumerateCandidates, Sizes) {
  EXPECT_EQ(enumerate_candidates(sample_template(0)).size(), 1u);
  auto four = enumerate_candidates(sample_template(2));
  ASSERT_EQ(four.size(), 4u);
  EXPECT_EQ(four[0].unpredictable_bits, (std::vector<bool>{false, false}));
  EXPECT_EQ(four[1].unpredictable_bits, (std::vector<bool>{false, true}));
  EXPECT_EQ(four[2].unpredictable_bits, (std::vector<bool>{true, false}));
  EXPECT_EQ(four[3].unpredictable_bits, (std::vector<bool>{true, true}));

  auto many = enumerate_candidates(sample_template(5));
  ASSERT_EQ(many.size(), 32u);
  std::set<Bytes> encodings;
  for (const auto& m : many) encodings.insert(canonical_encode(m));
  EXPECT_EQ(encodings.size(), 32u);
}

TEST(EnumerateCandidates, KTooLarge) {
  try {
    enumerate_candidates(sample_template(21));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kKTooLarge);
  }
}

TEST(MakeWeights, GeometricAndUniformVariants) {
  EXPECT_EQ(make_weights({DistributionKind::kGeometric, 2, 0}),
            (std::vector<double>{0.5, 0.25, 0.125, 0.125}));
  auto half = make_weights({DistributionKind::kHalfUniform, 2, 0});
  ASSERT_EQ(half.size(), 4u);
  EXPECT_DOUBLE_EQ(half[0], 0.5);
  for (int i = 1; i < 4; ++i) EXPECT_DOUBLE_EQ(half[i], 1.0 / 6.0);
  auto ninety = make_weights({DistributionKind::kNinetyUniform, 5, 0});
  EXPECT_DOUBLE_EQ(ninety[0], 0.9);
  EXPECT_DOUBLE_EQ(ninety[31], 0.1 / 31.0);
}

TEST(MakeWeights, GeometricSumsExactlyToOne) {
  for (unsigned k = 1; k <= 6; ++k) {
    auto w = make_weights({DistributionKind::kGeometric, k, 0});
    // Dyadic values: the double sum is exact.
    EXPECT_EQ(std::accumulate(w.begin(), w.end(), 0.0), 1.0) << "k=" << k;
  }
}

TEST(MakeWeights, AllKindsNormalized) {
  for (auto kind : {DistributionKind::kExpIid, DistributionKind::kGeometric,
                    DistributionKind::kHalfUniform, DistributionKind::kNinetyUniform}) {
    for (unsigned k = 1; k <= 10; ++k) {
      auto w = make_weights({kind, k, 1234});
      ASSERT_EQ(w.size(), std::size_t{1} << k);
      EXPECT_NEAR(std::accumulate(w.begin(), w.end(), 0.0), 1.0, 1e-9);
      for (double x : w) EXPECT_GE(x, 0.0);
    }
  }
}

TEST(MakeWeights, ExpIidReproducibleBySeed) {
  auto a = make_weights({DistributionKind::kExpIid, 6, 77});
  auto b = make_weights({DistributionKind::kExpIid, 6, 77});
  auto c = make_weights({DistributionKind::kExpIid, 6, 78});
  EXPECT_EQ(a, b);
  EXPECT_NE(a, c);
}

TEST(Template, JsonRoundTrip) {
  auto tpl = sample_template(4);
  nlohmann::json j = tpl;
  auto back = j.get<MessageTemplate>();
  EXPECT_EQ(back.fields, tpl.fields);
  EXPECT_EQ(back.k, 4u);

  j["timeAllowedtoLive"] = 0;
  EXPECT_THROW(j.get<MessageTemplate>(), Error);
}

}  // namespace
}  // namespace cmauth
