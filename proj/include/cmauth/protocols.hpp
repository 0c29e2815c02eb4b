// Copyright (C) 2026 The cmauth Authors
// SPDX-License-Identifier: Apache-2.0

// Publisher and subscriber procedures for CMA (pairwise-MAC root
// authentication), CMMA (delayed-disclosure root authentication), and the
// four per-message baseline designs.
//
// Both tree-based schemes do all hashing before the true message is known:
// the prove step only reads cached tree values.

#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cmauth/crypto.hpp"
#include "cmauth/hash_tree.hpp"
#include "cmauth/message_model.hpp"
#include "cmauth/tesla.hpp"

namespace cmauth {

enum class Verdict {
  kAccept,
  kRejectMac,
  kRejectRoot,
  kRejectExpired,
  kRejectStale,
  kRejectKey,
  kRejectNoAnnouncement,
  kRejectUnsafe,
  kRejectMalformed,
};

constexpr std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::kAccept: return "accept";
    case Verdict::kRejectMac: return "bad_mac";
    case Verdict::kRejectRoot: return "root_mismatch";
    case Verdict::kRejectExpired: return "expired";
    case Verdict::kRejectStale: return "stale_index";
    case Verdict::kRejectKey: return "bad_key";
    case Verdict::kRejectNoAnnouncement: return "no_announcement";
    case Verdict::kRejectUnsafe: return "unsafe_announcement";
    case Verdict::kRejectMalformed: return "malformed";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// Wire formats

struct RootAnnouncement {
  std::uint32_t interval = 0;
  std::uint64_t ts_ms = 0;
  Digest root;
  std::vector<Digest> macs;  // CMA: one per subscriber; CMMA: exactly one
};

inline constexpr std::size_t kAnnouncementHeaderBytes = 4 + 8 + Digest::kSize;

inline Bytes encode_announcement(const RootAnnouncement& a) {
  Bytes out;
  put_u32(out, a.interval);
  put_u64(out, a.ts_ms);
  put_bytes(out, a.root.view());
  for (const auto& m : a.macs) put_bytes(out, m.view());
  return out;
}

inline RootAnnouncement decode_announcement(ByteView bytes) {
  Reader r(bytes);
  RootAnnouncement a;
  a.interval = r.u32();
  a.ts_ms = r.u64();
  a.root = Digest::from(r.take(Digest::kSize));
  if (r.remaining() == 0 || r.remaining() % Digest::kSize != 0) {
    throw Error(ErrorCode::kMalformed, "announcement MAC section is not a positive multiple of 32");
  }
  while (!r.done()) a.macs.push_back(Digest::from(r.take(Digest::kSize)));
  return a;
}

struct AuthenticatedMessage {
  Message message;
  Proof proof;
  std::optional<KeyDisclosure> disclosed_key;  // CMMA only
};

inline Bytes encode_authenticated_message(const AuthenticatedMessage& am) {
  Bytes out = encode_proof(am.message, am.proof);
  if (am.disclosed_key) encode_key_disclosure_into(out, *am.disclosed_key);
  return out;
}

inline AuthenticatedMessage decode_authenticated_message(ByteView bytes, bool with_key) {
  Reader r(bytes);
  auto d = decode_proof(r);
  AuthenticatedMessage am{std::move(d.message), std::move(d.proof), std::nullopt};
  if (with_key) am.disclosed_key = decode_key_disclosure(r);
  if (!r.done()) throw Error(ErrorCode::kMalformed, "trailing bytes after authenticated message");
  return am;
}

/// Authentication overhead of one message, in 32-byte values, measured from
/// wire lengths. The root inside the announcement header is a commitment, not
/// per-message evidence, and is not counted.
inline std::size_t cma_communication_values(const Bytes& announcement_wire,
                                            const Bytes& message_wire, std::size_t message_bytes,
                                            std::size_t depth, std::size_t recipients) {
  const std::size_t proof_values =
      (message_wire.size() - message_bytes - 1 - depth) / Digest::kSize;
  const std::size_t mac_values =
      (announcement_wire.size() - kAnnouncementHeaderBytes) / Digest::kSize;
  return recipients * proof_values + mac_values;
}

inline std::size_t cmma_communication_values(const Bytes& announcement_wire,
                                             const Bytes& message_wire, std::size_t message_bytes,
                                             std::size_t depth) {
  const std::size_t proof_and_key_values =
      (message_wire.size() - message_bytes - 1 - depth - 4) / Digest::kSize;
  const std::size_t mac_values =
      (announcement_wire.size() - kAnnouncementHeaderBytes) / Digest::kSize;
  return proof_and_key_values + mac_values;
}

// ---------------------------------------------------------------------------
// Prioritize

inline PrioritizedSet prioritize(const MessageTemplate& tpl, const Distribution& d,
                                 std::uint32_t interval = 0) {
  Distribution dist = d;
  dist.k = tpl.k;
  PrioritizedSet s{interval, enumerate_candidates(tpl), make_weights(dist)};
  validate(s);
  return s;
}

// ---------------------------------------------------------------------------
// Per-destination MACs over a raw message. Used by the baselines and as the
// fallback when the true message is not in the cached tree.

struct MessageMacs {
  Message message;
  std::vector<Digest> macs;
};

inline Digest message_mac(const SymmetricKey& key, const Message& m, OpCounter& ctr) {
  auto enc = canonical_encode(m);
  return hmac(key, {ByteView(enc)}, ctr);
}

inline MessageMacs mac_per_destination(const std::vector<SymmetricKey>& keys, const Message& m,
                                       OpCounter& ctr) {
  MessageMacs out{m, {}};
  out.macs.reserve(keys.size());
  auto enc = canonical_encode(m);
  for (const auto& k : keys) out.macs.push_back(hmac(k, {ByteView(enc)}, ctr));
  return out;
}

inline Verdict verify_message_mac(const SymmetricKey& key, std::size_t n, const MessageMacs& e,
                                  OpCounter& ctr) {
  if (n >= e.macs.size()) return Verdict::kRejectMalformed;
  return message_mac(key, e.message, ctr) == e.macs[n] ? Verdict::kAccept : Verdict::kRejectMac;
}

inline Bytes encode_message_macs(const MessageMacs& e) {
  Bytes out = canonical_encode(e.message);
  for (const auto& m : e.macs) put_bytes(out, m.view());
  return out;
}

inline MessageMacs decode_message_macs(ByteView bytes) {
  Reader r(bytes);
  MessageMacs e{canonical_decode(r), {}};
  if (r.remaining() % Digest::kSize != 0) throw Error(ErrorCode::kMalformed, "partial MAC");
  while (!r.done()) e.macs.push_back(Digest::from(r.take(Digest::kSize)));
  return e;
}

// ---------------------------------------------------------------------------
// CMA

struct CmaContext {
  std::vector<SymmetricKey> keys;  // sk_1..sk_N, index n-1
  std::uint32_t epoch = 0;         // bumped on every re-initialize
};

inline CmaContext cma_initialize(std::size_t subscribers, NonceSource& rng) {
  if (subscribers < 1) throw Error(ErrorCode::kConfigInvalid, "N must be >= 1");
  CmaContext ctx;
  ctx.keys.reserve(subscribers);
  for (std::size_t n = 0; n < subscribers; ++n) ctx.keys.push_back(rng.next_key());
  return ctx;
}

/// Replaces every pairwise key (periodic refresh).
inline void cma_reinitialize(CmaContext& ctx, NonceSource& rng) {
  auto epoch = ctx.epoch + 1;
  ctx = cma_initialize(ctx.keys.size(), rng);
  ctx.epoch = epoch;
}

/// Roots accepted by pre-verification, each valid until ts + timeAllowedtoLive.
class RootCache {
 public:
  struct Entry {
    std::uint32_t interval;
    std::uint64_t ts_ms;
    Digest root;
    SimTime expiry;
  };

  void insert(const Entry& e) { entries_.push_back(e); }

  void prune(SimTime now) {
    std::erase_if(entries_, [now](const Entry& e) { return e.expiry <= now; });
  }

  bool matches(const Digest& root, SimTime now) const {
    return std::any_of(entries_.begin(), entries_.end(), [&](const Entry& e) {
      return e.expiry > now && e.root == root;
    });
  }

  std::size_t live_entries(SimTime now) const {
    return static_cast<std::size_t>(std::count_if(
        entries_.begin(), entries_.end(), [now](const Entry& e) { return e.expiry > now; }));
  }

 private:
  std::vector<Entry> entries_;
};

struct CmaSubscriber {
  std::size_t index = 0;  // 0-based position of this subscriber's MAC
  SymmetricKey key;
  std::uint16_t ttl_ms = 1000;
  RootCache cache;
};

inline CmaSubscriber make_cma_subscriber(const CmaContext& ctx, std::size_t index,
                                         std::uint16_t ttl_ms) {
  if (index >= ctx.keys.size()) throw Error(ErrorCode::kIndexOutOfRange, "subscriber index");
  return CmaSubscriber{index, ctx.keys[index], ttl_ms, {}};
}

struct TreeAndAnnouncement {
  AuthTree tree;
  RootAnnouncement announcement;
};

inline TreeAndAnnouncement cma_tree_construction(const CmaContext& ctx, const PrioritizedSet& set,
                                                 std::uint64_t ts_ms, TreeKind kind,
                                                 NonceSource& rng, OpCounter& ctr) {
  auto tree = build_tree(kind, set, rng, ctr);
  RootAnnouncement ann{set.interval, ts_ms, tree.root(), {}};
  Bytes ts;
  put_u64(ts, ts_ms);
  ann.macs.reserve(ctx.keys.size());
  for (const auto& k : ctx.keys) ann.macs.push_back(hmac(k, {ByteView(ts), tree.root().view()}, ctr));
  return {std::move(tree), std::move(ann)};
}

/// Reads the proof for `true_msg` out of the cached tree. No hashing.
/// Throws CACHE_MISS when the message was not prioritized.
inline AuthenticatedMessage cma_prove(const AuthTree& tree, const Message& true_msg,
                                      OpCounter& ctr) {
  auto idx = tree.find(true_msg);
  if (!idx) throw Error(ErrorCode::kCacheMiss, "true message not in interval's tree");
  return {true_msg, prove(tree, *idx, ctr), std::nullopt};
}

inline SimTime ms_to_sim(std::uint64_t ms) { return static_cast<SimTime>(ms) * 1000; }

inline Verdict cma_pre_verify(CmaSubscriber& sub, const RootAnnouncement& ann, SimTime now,
                              OpCounter& ctr) {
  if (sub.index >= ann.macs.size()) return Verdict::kRejectMalformed;
  const SimTime ts = ms_to_sim(ann.ts_ms);
  const SimTime ttl = ms_to_sim(sub.ttl_ms);
  if (ts < now - ttl) return Verdict::kRejectExpired;
  Bytes ts_bytes;
  put_u64(ts_bytes, ann.ts_ms);
  auto mac = hmac(sub.key, {ByteView(ts_bytes), ann.root.view()}, ctr);
  if (mac != ann.macs[sub.index]) return Verdict::kRejectMac;
  sub.cache.insert({ann.interval, ann.ts_ms, ann.root, ts + ttl});
  return Verdict::kAccept;
}

inline Verdict cma_verify(CmaSubscriber& sub, const AuthenticatedMessage& am, SimTime now,
                          OpCounter& ctr) {
  sub.cache.prune(now);
  auto root = root_from_proof(am.message, am.proof, ctr);
  if (sub.cache.matches(root, now)) return Verdict::kAccept;
  return sub.cache.live_entries(now) == 0 ? Verdict::kRejectExpired : Verdict::kRejectRoot;
}

// ---------------------------------------------------------------------------
// CMMA

/// What subscribers receive out of band (first chain) or authenticated by the
/// previous chain's final key (later chains).
struct ChainBootstrap {
  std::uint32_t base_interval = 0;
  Digest commitment;  // C_0
  DisclosureSchedule schedule;
  std::optional<Digest> anchor_mac;
};

inline Bytes bootstrap_mac_input(const ChainBootstrap& b) {
  Bytes out;
  put_u32(out, b.base_interval);
  put_bytes(out, b.commitment.view());
  put_bytes(out, b.schedule.encode());
  return out;
}

struct CmmaPublisher {
  KeyChain chain;
  DisclosureSchedule schedule;
  std::uint64_t chain_generation_ops = 0;  // L, charged once at initialize
  std::uint32_t last_constructed = 0;     // highest interval with a tree
};

struct CmmaInit {
  CmmaPublisher publisher;
  ChainBootstrap bootstrap;
};

/// Generates a chain of L+1 values. With `previous`, the new commitment is
/// MACed under H'(previous C_L) and the chain continues the global interval
/// numbering; otherwise the commitment is pre-trusted.
inline CmmaInit cmma_initialize(std::size_t length, const Digest& seed,
                                const DisclosureSchedule& schedule, const KeyChain* previous,
                                OpCounter& ctr) {
  if (length < 1) throw Error(ErrorCode::kConfigInvalid, "chain length L must be >= 1");
  const std::uint32_t base = previous ? previous->last_interval() : 0;
  const auto before = ctr.hash_ops();
  CmmaInit init;
  init.publisher.chain = generate_chain(seed, length, ctr, base);
  init.publisher.schedule = schedule;
  init.publisher.chain_generation_ops = ctr.hash_ops() - before;
  init.publisher.last_constructed = base;
  init.bootstrap = {base, init.publisher.chain.commitment(), schedule, std::nullopt};
  if (previous) {
    auto key = derive_key(previous->final_key(), ctr);
    auto input = bootstrap_mac_input(init.bootstrap);
    init.bootstrap.anchor_mac = hmac(key, {ByteView(input)}, ctr);
  }
  return init;
}

struct CmmaSubscriber {
  ReceiverKeyStore store;
  DisclosureSchedule schedule;
  SimTime sync_error_bound = 0;
  std::map<std::uint32_t, std::vector<RootAnnouncement>> pending;  // passed safety_check
};

/// Subscriber state from a pre-trusted (first-chain) bootstrap.
inline CmmaSubscriber cmma_subscriber_from_bootstrap(const ChainBootstrap& b,
                                                     SimTime sync_error_bound) {
  return CmmaSubscriber{{b.base_interval, b.commitment}, b.schedule, sync_error_bound, {}};
}

/// Switches to the next chain. The subscriber must already have verified the
/// previous chain's final key, which sits at index `next.base_interval`.
inline bool cmma_accept_rollover(CmmaSubscriber& sub, const ChainBootstrap& next, OpCounter& ctr) {
  if (!next.anchor_mac || sub.store.index != next.base_interval) return false;
  auto key = derive_key(sub.store.key, ctr);
  auto input = bootstrap_mac_input(next);
  if (hmac(key, {ByteView(input)}, ctr) != *next.anchor_mac) return false;
  sub.store = {next.base_interval, next.commitment};
  sub.schedule = next.schedule;
  return true;
}

/// Keeps the announcement only if its key cannot have been disclosed yet.
inline Verdict cmma_receive_announcement(CmmaSubscriber& sub, const RootAnnouncement& ann,
                                         SimTime local_arrival) {
  if (ann.macs.size() != 1) return Verdict::kRejectMalformed;
  if (ann.interval <= sub.store.index) return Verdict::kRejectStale;
  if (safety_check(local_arrival, sub.schedule, ann.interval, sub.sync_error_bound) !=
      Safety::kSafe) {
    return Verdict::kRejectUnsafe;
  }
  sub.pending[ann.interval].push_back(ann);
  return Verdict::kAccept;
}

inline TreeAndAnnouncement cmma_tree_construction(CmmaPublisher& pub, const PrioritizedSet& set,
                                                  std::uint64_t ts_ms, TreeKind kind,
                                                  NonceSource& rng, OpCounter& ctr) {
  const auto interval = set.interval;
  if (interval <= pub.last_constructed || !pub.chain.covers(interval)) {
    throw Error(ErrorCode::kScheduleViolation,
                "interval " + std::to_string(interval) + " already used or outside chain");
  }
  auto tree = build_tree(kind, set, rng, ctr);
  auto key = mac_key_for_interval(pub.chain.key_for(interval), ctr);
  Bytes ts;
  put_u64(ts, ts_ms);
  RootAnnouncement ann{interval, ts_ms, tree.root(),
                       {hmac(key, {ByteView(ts), tree.root().view()}, ctr)}};
  pub.last_constructed = interval;
  return {std::move(tree), std::move(ann)};
}

/// Attaches the proof and discloses C_i, where i is the tree's interval.
/// Disclosure is only allowed from interval i + d on.
inline AuthenticatedMessage cmma_prove(const CmmaPublisher& pub, const AuthTree& tree,
                                       const Message& true_msg, std::uint32_t current_interval,
                                       OpCounter& ctr) {
  if (current_interval < tree.interval() + pub.schedule.delay) {
    throw Error(ErrorCode::kScheduleViolation,
                "key " + std::to_string(tree.interval()) + " not disclosable in interval " +
                    std::to_string(current_interval));
  }
  auto am = cma_prove(tree, true_msg, ctr);
  am.disclosed_key = KeyDisclosure{tree.interval(), pub.chain.key_for(tree.interval())};
  return am;
}

namespace detail {

/// Stage (a). A key equal to the latest verified one was already
/// authenticated and costs nothing; this happens when one interval's tree
/// serves a retransmission.
inline std::optional<Verdict> cmma_check_key(CmmaSubscriber& sub, const KeyDisclosure& d,
                                             OpCounter& ctr) {
  if (d.interval == sub.store.index && d.key == sub.store.key) return std::nullopt;
  try {
    if (!verify_disclosed_key(d.key, d.interval, sub.store, ctr)) return Verdict::kRejectKey;
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kStaleIndex) return Verdict::kRejectStale;
    throw;
  }
  return std::nullopt;
}

inline bool cmma_mac_ok(const SymmetricKey& key, const RootAnnouncement& ann, OpCounter& ctr) {
  Bytes ts;
  put_u64(ts, ann.ts_ms);
  return hmac(key, {ByteView(ts), ann.root.view()}, ctr) == ann.macs[0];
}

}  // namespace detail

/// Three stages, short-circuiting: (a) the disclosed key against the key
/// store, (b) the announcement MAC under H'(C_i), (c) the proof against the
/// announced root.
inline Verdict cmma_verify(CmmaSubscriber& sub, const RootAnnouncement& ann,
                           const AuthenticatedMessage& am, OpCounter& ctr) {
  if (!am.disclosed_key || ann.macs.size() != 1) return Verdict::kRejectMalformed;
  const auto& disclosed = *am.disclosed_key;
  if (disclosed.interval != ann.interval) return Verdict::kRejectKey;
  if (auto v = detail::cmma_check_key(sub, disclosed, ctr)) return *v;
  auto key = mac_key_for_interval(disclosed.key, ctr);
  if (!detail::cmma_mac_ok(key, ann, ctr)) return Verdict::kRejectMac;
  if (root_from_proof(am.message, am.proof, ctr) != ann.root) return Verdict::kRejectRoot;
  return Verdict::kAccept;
}

/// Verifies against the announcements kept for the disclosed key's interval.
/// Stage (a) runs even when none was kept so that the key store still
/// advances. Several candidates can be pending if someone injected extra
/// announcements; only those whose MAC checks are compared with the proof.
inline Verdict cmma_verify(CmmaSubscriber& sub, const AuthenticatedMessage& am, OpCounter& ctr) {
  if (!am.disclosed_key) return Verdict::kRejectMalformed;
  const auto& d = *am.disclosed_key;
  auto v = [&]() -> Verdict {
    if (auto bad = detail::cmma_check_key(sub, d, ctr)) return *bad;
    auto it = sub.pending.find(d.interval);
    if (it == sub.pending.end() || it->second.empty()) return Verdict::kRejectNoAnnouncement;
    auto key = mac_key_for_interval(d.key, ctr);
    std::vector<Digest> roots;
    for (const auto& ann : it->second) {
      if (detail::cmma_mac_ok(key, ann, ctr)) roots.push_back(ann.root);
    }
    if (roots.empty()) return Verdict::kRejectMac;
    auto root = root_from_proof(am.message, am.proof, ctr);
    return std::find(roots.begin(), roots.end(), root) != roots.end() ? Verdict::kAccept
                                                                      : Verdict::kRejectRoot;
  }();
  std::erase_if(sub.pending, [&](const auto& kv) { return kv.first < sub.store.index; });
  return v;
}

// ---------------------------------------------------------------------------
// Baselines

enum class BaselineDesign { kNoPrecompute, kPredictOne, kPrecomputeAll, kStateChange };

constexpr std::string_view to_string(BaselineDesign d) {
  switch (d) {
    case BaselineDesign::kNoPrecompute: return "NO_PRECOMPUTE";
    case BaselineDesign::kPredictOne: return "PREDICT_ONE";
    case BaselineDesign::kPrecomputeAll: return "PRECOMPUTE_ALL";
    case BaselineDesign::kStateChange: return "STATE_CHANGE";
  }
  return "?";
}

struct BaselineConfig {
  BaselineDesign design = BaselineDesign::kNoPrecompute;
  unsigned k = 0;
  unsigned k_u = 0;  // STATE_CHANGE only
  std::size_t subscribers = 1;
};

inline void validate(const BaselineConfig& c) {
  if (c.subscribers < 1) throw Error(ErrorCode::kConfigInvalid, "N must be >= 1");
  if (c.design == BaselineDesign::kStateChange && c.k > 0 && c.k_u >= c.k) {
    throw Error(ErrorCode::kConfigInvalid, "k_u must be < k for STATE_CHANGE");
  }
}

/// Urgent messages are those whose leading k - k_u unpredictable bits are
/// all set; only the trailing k_u bits vary among them.
inline bool is_urgent(const Message& m, unsigned k_u) {
  const auto& bits = m.unpredictable_bits;
  const std::size_t fixed = bits.size() >= k_u ? bits.size() - k_u : 0;
  return std::all_of(bits.begin(), bits.begin() + static_cast<std::ptrdiff_t>(fixed),
                     [](bool b) { return b; });
}

class BaselinePublisher {
 public:
  BaselinePublisher(BaselineConfig cfg, std::vector<SymmetricKey> keys)
      : cfg_(cfg), keys_(std::move(keys)) {
    validate(cfg_);
  }

  /// Pre-message phase for one interval; discards the previous cache.
  void precompute(const PrioritizedSet& set, OpCounter& ctr) {
    cache_.clear();
    switch (cfg_.design) {
      case BaselineDesign::kNoPrecompute:
        break;
      case BaselineDesign::kPredictOne: {
        auto best = std::max_element(set.weights.begin(), set.weights.end()) - set.weights.begin();
        store(set.messages[static_cast<std::size_t>(best)], ctr);
        break;
      }
      case BaselineDesign::kPrecomputeAll:
        for (const auto& m : set.messages) store(m, ctr);
        break;
      case BaselineDesign::kStateChange:
        for (const auto& m : set.messages) {
          if (is_urgent(m, cfg_.k_u)) store(m, ctr);
        }
        break;
    }
  }

  struct Sent {
    MessageMacs evidence;
    bool cache_hit;
  };

  /// Post-message phase: cached evidence if present, else N fresh MACs.
  Sent send(const Message& m, OpCounter& ctr) const {
    auto it = cache_.find(canonical_encode(m));
    if (it != cache_.end()) return {it->second, true};
    return {mac_per_destination(keys_, m, ctr), false};
  }

  const BaselineConfig& config() const { return cfg_; }
  std::size_t cached_messages() const { return cache_.size(); }

 private:
  void store(const Message& m, OpCounter& ctr) {
    cache_.emplace(canonical_encode(m), mac_per_destination(keys_, m, ctr));
  }

  BaselineConfig cfg_;
  std::vector<SymmetricKey> keys_;
  std::map<Bytes, MessageMacs> cache_;
};

/// One prioritization interval of a baseline workload and the true messages
/// sent during it.
struct BaselineInterval {
  PrioritizedSet set;
  std::vector<Message> messages;
};

struct BaselineReport {
  std::vector<std::uint64_t> pre_message_ops;          // per interval
  std::vector<std::uint64_t> post_message_ops;         // per message
  std::vector<std::uint64_t> subscriber_ops;           // per message, per subscriber (flattened)
  std::vector<std::size_t> communication_values;       // per message
  std::vector<bool> cache_hit;                         // per message
  std::size_t rejected = 0;

  std::uint64_t publisher_total() const {
    std::uint64_t t = 0;
    for (auto v : pre_message_ops) t += v;
    for (auto v : post_message_ops) t += v;
    return t;
  }
};

inline BaselineReport run_baseline(const BaselineConfig& cfg,
                                   const std::vector<BaselineInterval>& trace, NonceSource& rng,
                                   const CostModel& model = {}) {
  auto ctx = cma_initialize(cfg.subscribers, rng);
  BaselinePublisher pub(cfg, ctx.keys);
  BaselineReport report;
  for (const auto& interval : trace) {
    OpCounter pre(model);
    pub.precompute(interval.set, pre);
    report.pre_message_ops.push_back(pre.hash_ops());
    for (const auto& m : interval.messages) {
      OpCounter post(model);
      auto sent = pub.send(m, post);
      report.post_message_ops.push_back(post.hash_ops());
      report.cache_hit.push_back(sent.cache_hit);
      const auto wire = encode_message_macs(sent.evidence);
      report.communication_values.push_back((wire.size() - canonical_encode(m).size()) /
                                            Digest::kSize);
      for (std::size_t n = 0; n < cfg.subscribers; ++n) {
        OpCounter sub(model);
        if (verify_message_mac(ctx.keys[n], n, sent.evidence, sub) != Verdict::kAccept) {
          ++report.rejected;
        }
        report.subscriber_ops.push_back(sub.hash_ops());
      }
    }
  }
  return report;
}

}  // namespace cmauth
