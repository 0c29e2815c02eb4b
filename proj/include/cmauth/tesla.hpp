// Copyright (C) 2026 The cmauth Authors
// SPDX-License-Identifier: Apache-2.0

// One-way key chain with delayed disclosure (TESLA-style).
//
// The chain C_0..C_L satisfies C_{i-1} = H(C_i); keys are used in the
// reverse order of generation. Interval i's MAC key is derive_key(C_i), and
// C_i becomes public `delay` intervals after interval i starts.

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cmauth/crypto.hpp"

namespace cmauth {

/// Simulated time, in microseconds.
using SimTime = std::int64_t;

struct KeyChain {
  std::vector<Digest> values;      // C_0 .. C_L
  std::uint32_t base_interval = 0;  // global interval index of C_0

  std::size_t length() const { return values.empty() ? 0 : values.size() - 1; }
  const Digest& commitment() const { return values.front(); }
  const Digest& final_key() const { return values.back(); }
  std::uint32_t last_interval() const {
    return base_interval + static_cast<std::uint32_t>(length());
  }

  bool covers(std::uint32_t interval) const {
    return interval >= base_interval && interval <= last_interval();
  }

  const Digest& key_for(std::uint32_t interval) const {
    if (!covers(interval)) {
      throw Error(ErrorCode::kIndexOutOfRange,
                  "interval " + std::to_string(interval) + " outside chain");
    }
    return values[interval - base_interval];
  }
};

/// C_L = seed, C_{i-1} = H(C_i). Costs L hash operations.
inline KeyChain generate_chain(const Digest& seed, std::size_t length, OpCounter& ctr,
                               std::uint32_t base_interval = 0) {
  KeyChain chain;
  chain.base_interval = base_interval;
  chain.values.resize(length + 1);
  chain.values[length] = seed;
  for (std::size_t i = length; i > 0; --i) chain.values[i - 1] = hash(chain.values[i].view(), ctr);
  return chain;
}

struct DisclosureSchedule {
  SimTime interval_length = 1'000'000;
  SimTime start_time = 0;  // start of interval 1
  std::uint32_t delay = 1;  // d, in intervals

  SimTime interval_start(std::uint32_t i) const {
    return start_time + (static_cast<SimTime>(i) - 1) * interval_length;
  }

  /// C_i is disclosed at the start of interval i + d.
  SimTime disclosure_time(std::uint32_t i) const { return interval_start(i + delay); }

  Bytes encode() const {
    Bytes out;
    put_u64(out, static_cast<std::uint64_t>(interval_length));
    put_u64(out, static_cast<std::uint64_t>(start_time));
    put_u32(out, delay);
    return out;
  }

  friend bool operator==(const DisclosureSchedule&, const DisclosureSchedule&) = default;
};

/// Throws CONFIG_INVALID unless d >= 1 and the disclosure lag exceeds the
/// worst-case network delay plus synchronization error.
inline void validate(const DisclosureSchedule& s, SimTime max_network_delay,
                     SimTime max_sync_error) {
  if (s.interval_length <= 0) {
    throw Error(ErrorCode::kConfigInvalid, "interval_length must be positive");
  }
  if (s.delay < 1) throw Error(ErrorCode::kConfigInvalid, "disclosure delay d must be >= 1");
  if (static_cast<SimTime>(s.delay) * s.interval_length <= max_network_delay + max_sync_error) {
    throw Error(ErrorCode::kConfigInvalid,
                "d * interval_length must exceed max network delay + max sync error");
  }
}

struct ReceiverKeyStore {
  std::uint32_t index = 0;
  Digest key;
};

/// Accepts iff hashing `candidate` (i - j') times reproduces the stored key,
/// then advances the store. Cost is the gap i - j'.
inline bool verify_disclosed_key(const Digest& candidate, std::uint32_t claimed_index,
                                 ReceiverKeyStore& store, OpCounter& ctr) {
  if (claimed_index <= store.index) {
    throw Error(ErrorCode::kStaleIndex, "key index " + std::to_string(claimed_index) +
                                            " <= verified index " + std::to_string(store.index));
  }
  Digest cur = candidate;
  for (auto gap = claimed_index - store.index; gap > 0; --gap) cur = hash(cur.view(), ctr);
  if (cur != store.key) return false;
  store = {claimed_index, candidate};
  return true;
}

inline SymmetricKey mac_key_for_interval(const Digest& chain_key, OpCounter& ctr) {
  return derive_key(chain_key, ctr);
}

enum class Safety { kSafe, kUnsafe };

/// An announcement MACed under C_i is only usable if the receiver can be sure
/// C_i was not yet public when it arrived: arrival + eps strictly before the
/// disclosure time.
inline Safety safety_check(SimTime local_arrival, const DisclosureSchedule& schedule,
                           std::uint32_t interval, SimTime sync_error_bound) {
  return local_arrival + sync_error_bound < schedule.disclosure_time(interval) ? Safety::kSafe
                                                                               : Safety::kUnsafe;
}

struct KeyDisclosure {
  std::uint32_t interval = 0;
  Digest key;
  friend bool operator==(const KeyDisclosure&, const KeyDisclosure&) = default;
};

inline constexpr std::size_t kKeyDisclosureBytes = 4 + Digest::kSize;

inline void encode_key_disclosure_into(Bytes& out, const KeyDisclosure& k) {
  put_u32(out, k.interval);
  put_bytes(out, k.key.view());
}

inline KeyDisclosure decode_key_disclosure(Reader& r) {
  KeyDisclosure k;
  k.interval = r.u32();
  k.key = Digest::from(r.take(Digest::kSize));
  return k;
}

}  // namespace cmauth
