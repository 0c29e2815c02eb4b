// Copyright (C) 2026 The cmauth Authors
// SPDX-License-Identifier: Apache-2.0

// GOOSE-shaped message records, their canonical byte encoding, enumeration of
// candidate messages over the unpredictable binary fields, and the weight
// distributions used for prioritization.

#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "cmauth/bytes.hpp"
#include "cmauth/error.hpp"

namespace cmauth {

/// Fields of a GOOSE PDU, in wire order.
struct GooseFields {
  std::string gocb_ref;
  std::uint16_t time_allowed_to_live_ms = 1000;
  std::string dat_set;
  std::string go_id;
  std::uint64_t t_ms = 0;  // timestamp of the last status change
  std::uint32_t st_num = 1;
  std::uint32_t sq_num = 0;
  bool test = false;
  std::uint32_t conf_rev = 1;
  bool nds_com = false;
  std::uint16_t num_dat_set_entries = 0;
  Bytes fixed_all_data;

  friend bool operator==(const GooseFields&, const GooseFields&) = default;
};

struct MessageTemplate {
  GooseFields fields;
  unsigned k = 0;  // number of unpredictable binary fields appended to allData
};

struct Message {
  GooseFields fields;
  std::vector<bool> unpredictable_bits;

  friend bool operator==(const Message&, const Message&) = default;
};

inline constexpr unsigned kMaxEnumerableK = 20;
inline constexpr std::size_t kMaxStringLength = 255;

namespace detail {

inline void put_short_string(Bytes& out, const std::string& s, const char* field) {
  if (s.size() > kMaxStringLength) {
    throw Error(ErrorCode::kOversize, std::string(field) + " is " + std::to_string(s.size()) +
                                          " bytes (max 255)");
  }
  put_u8(out, static_cast<std::uint8_t>(s.size()));
  put_bytes(out, as_bytes(s));
}

inline std::string get_short_string(Reader& r) {
  auto n = r.u8();
  auto v = r.take(n);
  return {v.begin(), v.end()};
}

inline bool get_flag(Reader& r) {
  auto b = r.u8();
  if (b > 1) throw Error(ErrorCode::kMalformed, "boolean field out of range");
  return b == 1;
}

}  // namespace detail

/// Appends the canonical encoding of `m` to `out`. Strings carry a 1-byte
/// length, allData a 4-byte length, and the unpredictable bits a 2-byte bit
/// count followed by MSB-first packed bytes.
inline void canonical_encode_into(Bytes& out, const Message& m) {
  const auto& f = m.fields;
  detail::put_short_string(out, f.gocb_ref, "gocbRef");
  put_u16(out, f.time_allowed_to_live_ms);
  detail::put_short_string(out, f.dat_set, "datSet");
  detail::put_short_string(out, f.go_id, "goID");
  put_u64(out, f.t_ms);
  put_u32(out, f.st_num);
  put_u32(out, f.sq_num);
  put_u8(out, f.test ? 1 : 0);
  put_u32(out, f.conf_rev);
  put_u8(out, f.nds_com ? 1 : 0);
  put_u16(out, f.num_dat_set_entries);
  put_u32(out, static_cast<std::uint32_t>(f.fixed_all_data.size()));
  put_bytes(out, f.fixed_all_data);
  if (m.unpredictable_bits.size() > 0xffff) throw Error(ErrorCode::kOversize, "too many bits");
  put_u16(out, static_cast<std::uint16_t>(m.unpredictable_bits.size()));
  std::uint8_t acc = 0;
  std::size_t i = 0;
  for (; i < m.unpredictable_bits.size(); ++i) {
    acc = static_cast<std::uint8_t>(acc << 1 | (m.unpredictable_bits[i] ? 1 : 0));
    if (i % 8 == 7) {
      out.push_back(acc);
      acc = 0;
    }
  }
  if (i % 8 != 0) out.push_back(static_cast<std::uint8_t>(acc << (8 - i % 8)));
}

inline Bytes canonical_encode(const Message& m) {
  Bytes out;
  canonical_encode_into(out, m);
  return out;
}

/// Inverse of canonical_encode_into. Consumes exactly one message from `r`.
inline Message canonical_decode(Reader& r) {
  Message m;
  auto& f = m.fields;
  f.gocb_ref = detail::get_short_string(r);
  f.time_allowed_to_live_ms = r.u16();
  f.dat_set = detail::get_short_string(r);
  f.go_id = detail::get_short_string(r);
  f.t_ms = r.u64();
  f.st_num = r.u32();
  f.sq_num = r.u32();
  f.test = detail::get_flag(r);
  f.conf_rev = r.u32();
  f.nds_com = detail::get_flag(r);
  f.num_dat_set_entries = r.u16();
  auto data_len = r.u32();
  auto data = r.take(data_len);
  f.fixed_all_data.assign(data.begin(), data.end());
  auto nbits = r.u16();
  auto packed = r.take((nbits + 7u) / 8u);
  m.unpredictable_bits.resize(nbits);
  for (std::size_t i = 0; i < nbits; ++i) {
    m.unpredictable_bits[i] = (packed[i / 8] >> (7 - i % 8)) & 1;
  }
  if (nbits % 8 != 0 && (packed.back() & ((1u << (8 - nbits % 8)) - 1)) != 0) {
    throw Error(ErrorCode::kMalformed, "nonzero padding bits");
  }
  return m;
}

inline Message canonical_decode(ByteView bytes) {
  Reader r(bytes);
  auto m = canonical_decode(r);
  if (!r.done()) throw Error(ErrorCode::kMalformed, "trailing bytes after message");
  return m;
}

/// Bits of candidate `index` out of 2^k, most significant bit first, so that
/// candidate order is lexicographic in the bit vector.
inline std::vector<bool> bits_of_index(std::uint64_t index, unsigned k) {
  std::vector<bool> bits(k);
  for (unsigned b = 0; b < k; ++b) bits[b] = (index >> (k - 1 - b)) & 1;
  return bits;
}

inline std::uint64_t index_of_bits(const std::vector<bool>& bits) {
  std::uint64_t v = 0;
  for (bool b : bits) v = v << 1 | (b ? 1 : 0);
  return v;
}

inline Message instantiate(const MessageTemplate& tpl, std::uint64_t index) {
  return Message{tpl.fields, bits_of_index(index, tpl.k)};
}

inline std::vector<Message> enumerate_candidates(const MessageTemplate& tpl) {
  if (tpl.k > kMaxEnumerableK) {
    throw Error(ErrorCode::kKTooLarge, "k=" + std::to_string(tpl.k) + " exceeds 20");
  }
  const std::uint64_t n = std::uint64_t{1} << tpl.k;
  std::vector<Message> out;
  out.reserve(n);
  for (std::uint64_t i = 0; i < n; ++i) out.push_back(instantiate(tpl, i));
  return out;
}

enum class DistributionKind { kExpIid, kGeometric, kHalfUniform, kNinetyUniform };

constexpr std::string_view to_string(DistributionKind d) {
  switch (d) {
    case DistributionKind::kExpIid: return "EXP_IID";
    case DistributionKind::kGeometric: return "GEOMETRIC";
    case DistributionKind::kHalfUniform: return "HALF_UNIFORM";
    case DistributionKind::kNinetyUniform: return "NINETY_UNIFORM";
  }
  return "?";
}

inline DistributionKind distribution_from_string(std::string_view s) {
  for (auto d : {DistributionKind::kExpIid, DistributionKind::kGeometric,
                 DistributionKind::kHalfUniform, DistributionKind::kNinetyUniform}) {
    if (s == to_string(d)) return d;
  }
  throw Error(ErrorCode::kConfigInvalid, "unknown distribution '" + std::string(s) + "'");
}

struct Distribution {
  DistributionKind kind = DistributionKind::kNinetyUniform;
  unsigned k = 0;
  std::uint64_t seed = 0;  // EXP_IID only
};

/// Maps a 64-bit generator output onto [0, 1) with 53 bits of precision.
inline double unit_interval(std::uint64_t x) { return static_cast<double>(x >> 11) * 0x1.0p-53; }

/// Normalized weights over 2^k candidates. k = 0 yields the single weight 1.
inline std::vector<double> make_weights(const Distribution& d) {
  if (d.k > kMaxEnumerableK) {
    throw Error(ErrorCode::kKTooLarge, "k=" + std::to_string(d.k) + " exceeds 20");
  }
  const std::size_t n = std::size_t{1} << d.k;
  if (n == 1) return {1.0};
  std::vector<double> w(n);
  switch (d.kind) {
    case DistributionKind::kExpIid: {
      std::mt19937_64 gen(d.seed);
      double sum = 0.0;
      for (auto& x : w) {
        x = -std::log1p(-unit_interval(gen()));  // inverse CDF of Exp(1)
        sum += x;
      }
      for (auto& x : w) x /= sum;
      break;
    }
    case DistributionKind::kGeometric:
      for (std::size_t i = 1; i < n; ++i) w[i - 1] = std::ldexp(1.0, -static_cast<int>(i));
      w[n - 1] = std::ldexp(1.0, -static_cast<int>(n - 1));
      break;
    case DistributionKind::kHalfUniform:
    case DistributionKind::kNinetyUniform: {
      const double head = d.kind == DistributionKind::kHalfUniform ? 0.5 : 0.9;
      w[0] = head;
      for (std::size_t i = 1; i < n; ++i) w[i] = (1.0 - head) / static_cast<double>(n - 1);
      break;
    }
  }
  return w;
}

/// Prioritization outcome for one interval: candidate messages and weights.
struct PrioritizedSet {
  std::uint32_t interval = 0;
  std::vector<Message> messages;
  std::vector<double> weights;
};

inline void validate(const PrioritizedSet& s) {
  if (s.messages.empty()) throw Error(ErrorCode::kConfigInvalid, "empty prioritized set");
  if (s.messages.size() != s.weights.size()) {
    throw Error(ErrorCode::kConfigInvalid, "messages/weights size mismatch");
  }
  double sum = 0.0;
  for (double w : s.weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw Error(ErrorCode::kConfigInvalid, "negative weight");
    sum += w;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw Error(ErrorCode::kConfigInvalid, "weights do not sum to 1");
}

// JSON form of a message template, as used in bench/sim config documents.
inline void to_json(nlohmann::json& j, const MessageTemplate& tpl) {
  const auto& f = tpl.fields;
  j = nlohmann::json{{"gocbRef", f.gocb_ref},
                     {"timeAllowedtoLive", f.time_allowed_to_live_ms},
                     {"datSet", f.dat_set},
                     {"goID", f.go_id},
                     {"t", f.t_ms},
                     {"stNum", f.st_num},
                     {"sqNum", f.sq_num},
                     {"test", f.test},
                     {"confRev", f.conf_rev},
                     {"ndsCom", f.nds_com},
                     {"numDatSetEntries", f.num_dat_set_entries},
                     {"allData", to_hex(f.fixed_all_data)},
                     {"k", tpl.k}};
}

inline void from_json(const nlohmann::json& j, MessageTemplate& tpl) {
  auto& f = tpl.fields;
  MessageTemplate defaults;
  f.gocb_ref = j.value("gocbRef", std::string("IED1/LLN0$GO$gcb01"));
  f.time_allowed_to_live_ms = j.value("timeAllowedtoLive", defaults.fields.time_allowed_to_live_ms);
  f.dat_set = j.value("datSet", std::string("IED1/LLN0$DS1"));
  f.go_id = j.value("goID", std::string("IED1_GOOSE1"));
  f.t_ms = j.value("t", std::uint64_t{0});
  f.st_num = j.value("stNum", defaults.fields.st_num);
  f.sq_num = j.value("sqNum", defaults.fields.sq_num);
  f.test = j.value("test", false);
  f.conf_rev = j.value("confRev", defaults.fields.conf_rev);
  f.nds_com = j.value("ndsCom", false);
  f.num_dat_set_entries = j.value("numDatSetEntries", std::uint16_t{0});
  f.fixed_all_data = from_hex(j.value("allData", std::string()));
  tpl.k = j.value("k", 0u);
  if (f.time_allowed_to_live_ms == 0) {
    throw Error(ErrorCode::kConfigInvalid, "timeAllowedtoLive must be positive");
  }
}

/// A small protection-style template used by tests, tools, and the simulator
/// defaults.
inline MessageTemplate sample_template(unsigned k) {
  MessageTemplate tpl;
  auto& f = tpl.fields;
  f.gocb_ref = "IED1/LLN0$GO$gcbProtection";
  f.time_allowed_to_live_ms = 1000;
  f.dat_set = "IED1/LLN0$DS_Protection";
  f.go_id = "IED1_PROT";
  f.t_ms = 1'700'000'000'000ULL;
  f.st_num = 1;
  f.sq_num = 0;
  f.conf_rev = 1;
  f.num_dat_set_entries = 2;
  f.fixed_all_data = {0x00, 0x00};  // quality "0000"
  tpl.k = k;
  return tpl;
}

}  // namespace cmauth
