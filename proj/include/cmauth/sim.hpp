// Copyright (C) 2026 The cmauth Authors
// SPDX-License-Identifier: Apache-2.0

// Deterministic discrete-event simulation of one publisher and N subscribers.
//
// Time is in microseconds. Interval i (1-based) spans
// [(i-1) * ttl, i * ttl); every interval gets one prioritization outcome and
// one tree (or baseline cache), built at the interval start. The true message
// for tree i is sent `lag` intervals later: lag = d for CMMA, so the key
// C_i is already disclosable, and 0 otherwise.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <queue>
#include <random>
#include <string>
#include <tuple>
#include <vector>

#include <json.hpp>

#include "cmauth/protocols.hpp"

namespace cmauth {

enum class Scheme { kCma, kCmma, kNoPrecompute, kPredictOne, kPrecomputeAll, kStateChange };

constexpr std::string_view to_string(Scheme s) {
  switch (s) {
    case Scheme::kCma: return "CMA";
    case Scheme::kCmma: return "CMMA";
    case Scheme::kNoPrecompute: return "NO_PRECOMPUTE";
    case Scheme::kPredictOne: return "PREDICT_ONE";
    case Scheme::kPrecomputeAll: return "PRECOMPUTE_ALL";
    case Scheme::kStateChange: return "STATE_CHANGE";
  }
  return "?";
}

inline Scheme scheme_from_string(std::string_view s) {
  for (auto x : {Scheme::kCma, Scheme::kCmma, Scheme::kNoPrecompute, Scheme::kPredictOne,
                 Scheme::kPrecomputeAll, Scheme::kStateChange}) {
    if (to_string(x) == s) return x;
  }
  throw Error(ErrorCode::kConfigInvalid, "unknown scheme '" + std::string(s) + "'");
}

inline bool is_tree_scheme(Scheme s) { return s == Scheme::kCma || s == Scheme::kCmma; }

enum class Adversary { kNone, kTamperMsg, kTamperProof, kForgeMac, kReplayOldRoot, kEarlyKey };

constexpr std::string_view to_string(Adversary a) {
  switch (a) {
    case Adversary::kNone: return "none";
    case Adversary::kTamperMsg: return "tamper_msg";
    case Adversary::kTamperProof: return "tamper_proof";
    case Adversary::kForgeMac: return "forge_mac";
    case Adversary::kReplayOldRoot: return "replay_old_root";
    case Adversary::kEarlyKey: return "early_key";
  }
  return "?";
}

inline Adversary adversary_from_string(std::string_view s) {
  for (auto x : {Adversary::kNone, Adversary::kTamperMsg, Adversary::kTamperProof,
                 Adversary::kForgeMac, Adversary::kReplayOldRoot, Adversary::kEarlyKey}) {
    if (to_string(x) == s) return x;
  }
  throw Error(ErrorCode::kConfigInvalid, "unknown adversary strategy '" + std::string(s) + "'");
}

inline constexpr std::array kAllAdversaries = {Adversary::kTamperMsg, Adversary::kTamperProof,
                                               Adversary::kForgeMac, Adversary::kReplayOldRoot,
                                               Adversary::kEarlyKey};

struct SimConfig {
  std::size_t subscribers = 5;
  unsigned k = 3;
  unsigned k_u = 0;
  Scheme scheme = Scheme::kCmma;
  TreeKind tree_kind = TreeKind::kMht;
  DistributionKind distribution = DistributionKind::kGeometric;
  std::uint16_t ttl_ms = 100;              // interval length; R_2 = 1 / ttl
  std::uint32_t messages_per_interval = 1;  // R_1 / R_2; copies of the interval's message
  double p_change = 0.5;                   // else the interval repeats candidate 0
  double surprise_prob = 0.0;              // true message outside the prioritized set
  std::vector<std::int64_t> forced_true_indices;  // per interval; -1 forces a surprise
  SimTime delay_min_us = 100;
  SimTime delay_max_us = 2'000;
  SimTime sync_error_us = 500;  // eps; each subscriber's skew is uniform in [-eps, eps]
  double loss = 0.0;
  bool loss_applies_to_announcements = true;
  std::uint32_t disclosure_delay = 1;  // d, CMMA only
  std::uint32_t horizon = 100;         // T intervals
  std::uint32_t rekey_period = 0;      // CMA: re-initialize every this many intervals; 0 = never
  double hash_op_time_us = 0.0;        // simulated compute time per hash op
  bool record_trace = true;
  std::uint64_t seed = 1;

  SimTime interval_length() const { return static_cast<SimTime>(ttl_ms) * 1000; }
  std::uint32_t lag() const { return scheme == Scheme::kCmma ? disclosure_delay : 0; }
};

inline void validate(const SimConfig& c) {
  auto fail = [](const std::string& what) { throw Error(ErrorCode::kConfigInvalid, what); };
  if (c.subscribers < 1) fail("subscribers must be >= 1");
  if (c.k > 16) fail("k must be <= 16");
  if (c.ttl_ms == 0) fail("ttl_ms must be positive");
  if (c.messages_per_interval < 1) fail("messages_per_interval must be >= 1");
  if (c.horizon < 1) fail("horizon must be >= 1");
  auto prob = [&](double p, const char* name) {
    if (!(p >= 0.0 && p <= 1.0)) fail(std::string(name) + " must be in [0, 1]");
  };
  prob(c.p_change, "p_change");
  prob(c.surprise_prob, "surprise_prob");
  prob(c.loss, "loss");
  if (c.delay_min_us < 0 || c.delay_max_us < c.delay_min_us) {
    fail("network delay must satisfy 0 <= delay_min_us <= delay_max_us");
  }
  if (c.sync_error_us < 0) fail("sync_error_us must be >= 0");
  if (c.hash_op_time_us < 0) fail("hash_op_time_us must be >= 0");
  // The message window [delay_max + eps, len - delay_max - eps) keeps each
  // message after its announcement and inside its own interval on every
  // subscriber's clock.
  if (2 * (c.delay_max_us + c.sync_error_us) >= c.interval_length()) {
    fail("2 * (delay_max_us + sync_error_us) must be < ttl_ms * 1000");
  }
  for (auto i : c.forced_true_indices) {
    if (i < -1 || (i >= 0 && static_cast<std::uint64_t>(i) >= (std::uint64_t{1} << c.k))) {
      fail("forced_true_indices entry " + std::to_string(i) + " out of range");
    }
  }
  if (c.scheme == Scheme::kStateChange && c.k > 0 && c.k_u >= c.k) {
    fail("k_u must be < k for STATE_CHANGE");
  }
  if (c.scheme == Scheme::kCmma) {
    // The honest worst case is delay_max plus skew, checked against eps again.
    validate(DisclosureSchedule{c.interval_length(), 0, c.disclosure_delay}, c.delay_max_us,
             2 * c.sync_error_us);
  }
}

// ---------------------------------------------------------------------------
// Trace and report

enum class EventKind {
  kPrioritize,
  kTreeBuilt,
  kAnnounceSent,
  kAnnounceRecv,
  kMsgArrived,
  kProved,
  kVerified,
  kRejected,
  kCacheMiss,
  kKeyDisclosed,
};

constexpr std::string_view to_string(EventKind k) {
  switch (k) {
    case EventKind::kPrioritize: return "prioritize";
    case EventKind::kTreeBuilt: return "tree_built";
    case EventKind::kAnnounceSent: return "announce_sent";
    case EventKind::kAnnounceRecv: return "announce_recv";
    case EventKind::kMsgArrived: return "msg_arrived";
    case EventKind::kProved: return "proved";
    case EventKind::kVerified: return "verified";
    case EventKind::kRejected: return "rejected";
    case EventKind::kCacheMiss: return "cache_miss";
    case EventKind::kKeyDisclosed: return "key_disclosed";
  }
  return "?";
}

inline constexpr std::int64_t kPublisher = -1;

struct TraceEvent {
  SimTime time = 0;
  std::int64_t party = kPublisher;  // subscriber index, or kPublisher
  EventKind kind = EventKind::kPrioritize;
  std::uint32_t interval = 0;       // tree interval the event belongs to
  std::int64_t message_id = -1;     // honest message number, -1 if none
  std::uint64_t hash_ops = 0;
  std::size_t bytes = 0;
  bool adversarial = false;
  std::string detail;               // rejection cause, etc.
  SimTime latency_us = 0;           // verified/rejected: publisher arrival to done
};

using EventTrace = std::vector<TraceEvent>;

inline void to_json(nlohmann::json& j, const TraceEvent& e) {
  j = {{"time", e.time},
       {"party", e.party == kPublisher ? std::string("publisher")
                                       : "sub" + std::to_string(e.party)},
       {"kind", to_string(e.kind)},
       {"interval", e.interval},
       {"message_id", e.message_id},
       {"hash_ops", e.hash_ops},
       {"bytes", e.bytes}};
  if (e.adversarial) j["adversarial"] = true;
  if (!e.detail.empty()) j["detail"] = e.detail;
  if (e.kind == EventKind::kVerified || e.kind == EventKind::kRejected) {
    j["latency_us"] = e.latency_us;
  }
}

inline void write_trace_jsonl(std::ostream& os, const EventTrace& trace) {
  for (const auto& e : trace) os << nlohmann::json(e).dump() << '\n';
}

/// One honest message delivered to one subscriber.
struct DeliveryRecord {
  std::int64_t message_id = 0;
  std::size_t subscriber = 0;
  std::uint32_t interval = 0;
  std::uint64_t post_message_ops = 0;
  std::uint64_t verify_ops = 0;  // message verification only
  SimTime latency_us = 0;
  Verdict verdict = Verdict::kAccept;
  bool announcement_delivered = true;  // tree schemes: this subscriber got the root
  std::uint32_t key_gap = 0;           // CMMA: i - j' before verification
  std::uint64_t key_ops = 0;           // CMMA: hash ops spent on the key stage
};

struct SimReport {
  SimConfig config;
  std::uint64_t publisher_pre_ops = 0;   // trees / caches, raw
  std::uint64_t chain_generation_ops = 0;
  std::vector<std::uint64_t> post_message_ops;  // per honest message
  std::vector<std::uint64_t> subscriber_ops;    // per subscriber, everything it hashed
  std::vector<std::size_t> communication_values;  // per honest message
  std::vector<DeliveryRecord> deliveries;
  std::size_t messages = 0;
  std::size_t cache_hits = 0;
  std::size_t announcements_lost = 0;
  std::size_t messages_lost = 0;
  std::map<std::string, std::size_t> rejections;  // honest deliveries, by cause
  std::size_t false_rejects = 0;  // rejected although message and announcement arrived
  std::size_t adversarial_attempts = 0;
  std::size_t adversarial_acceptances = 0;
  std::size_t invariant_violations = 0;

  std::uint64_t publisher_total_ops() const {
    std::uint64_t t = publisher_pre_ops + chain_generation_ops;
    for (auto v : post_message_ops) t += v;
    return t;
  }
  double hit_rate() const {
    return messages == 0 ? 1.0 : static_cast<double>(cache_hits) / static_cast<double>(messages);
  }
  std::size_t accepted() const {
    return static_cast<std::size_t>(std::count_if(
        deliveries.begin(), deliveries.end(),
        [](const DeliveryRecord& d) { return d.verdict == Verdict::kAccept; }));
  }
  double mean_verify_ops() const {
    if (deliveries.empty()) return 0.0;
    double s = 0.0;
    for (const auto& d : deliveries) s += static_cast<double>(d.verify_ops);
    return s / static_cast<double>(deliveries.size());
  }
};

inline nlohmann::json config_to_json(const SimConfig& c) {
  return {{"subscribers", c.subscribers},
          {"k", c.k},
          {"k_u", c.k_u},
          {"scheme", to_string(c.scheme)},
          {"tree_kind", to_string(c.tree_kind)},
          {"distribution", to_string(c.distribution)},
          {"ttl_ms", c.ttl_ms},
          {"messages_per_interval", c.messages_per_interval},
          {"p_change", c.p_change},
          {"surprise_prob", c.surprise_prob},
          {"forced_true_indices", c.forced_true_indices},
          {"delay_min_us", c.delay_min_us},
          {"delay_max_us", c.delay_max_us},
          {"sync_error_us", c.sync_error_us},
          {"loss", c.loss},
          {"loss_applies_to_announcements", c.loss_applies_to_announcements},
          {"disclosure_delay", c.disclosure_delay},
          {"horizon", c.horizon},
          {"rekey_period", c.rekey_period},
          {"hash_op_time_us", c.hash_op_time_us},
          {"record_trace", c.record_trace},
          {"seed", c.seed}};
}

/// Unknown keys are rejected so that typos do not silently fall back to
/// defaults.
inline SimConfig config_from_json(const nlohmann::json& j, SimConfig c = {}) {
  if (!j.is_object()) throw Error(ErrorCode::kConfigInvalid, "sim config must be an object");
  try {
    for (const auto& [key, v] : j.items()) {
      if (key == "subscribers" || key == "N") c.subscribers = v.get<std::size_t>();
      else if (key == "k") c.k = v.get<unsigned>();
      else if (key == "k_u") c.k_u = v.get<unsigned>();
      else if (key == "scheme") c.scheme = scheme_from_string(v.get<std::string>());
      else if (key == "tree_kind") c.tree_kind = tree_kind_from_string(v.get<std::string>());
      else if (key == "distribution") c.distribution = distribution_from_string(v.get<std::string>());
      else if (key == "ttl_ms") c.ttl_ms = v.get<std::uint16_t>();
      else if (key == "messages_per_interval") c.messages_per_interval = v.get<std::uint32_t>();
      else if (key == "p_change") c.p_change = v.get<double>();
      else if (key == "surprise_prob") c.surprise_prob = v.get<double>();
      else if (key == "forced_true_indices") c.forced_true_indices = v.get<std::vector<std::int64_t>>();
      else if (key == "delay_min_us") c.delay_min_us = v.get<SimTime>();
      else if (key == "delay_max_us") c.delay_max_us = v.get<SimTime>();
      else if (key == "sync_error_us") c.sync_error_us = v.get<SimTime>();
      else if (key == "loss") c.loss = v.get<double>();
      else if (key == "loss_applies_to_announcements") c.loss_applies_to_announcements = v.get<bool>();
      else if (key == "disclosure_delay") c.disclosure_delay = v.get<std::uint32_t>();
      else if (key == "horizon") c.horizon = v.get<std::uint32_t>();
      else if (key == "rekey_period") c.rekey_period = v.get<std::uint32_t>();
      else if (key == "hash_op_time_us") c.hash_op_time_us = v.get<double>();
      else if (key == "record_trace") c.record_trace = v.get<bool>();
      else if (key == "seed") c.seed = v.get<std::uint64_t>();
      else throw Error(ErrorCode::kConfigInvalid, "unknown sim config key '" + key + "'");
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kConfigInvalid, std::string("sim config: ") + e.what());
  }
  return c;
}

inline nlohmann::json report_to_json(const SimReport& r) {
  nlohmann::json j;
  j["config"] = config_to_json(r.config);
  j["publisher"] = {{"pre_message_ops", r.publisher_pre_ops},
                    {"chain_generation_ops", r.chain_generation_ops},
                    {"post_message_ops_total",
                     r.publisher_total_ops() - r.publisher_pre_ops - r.chain_generation_ops},
                    {"total_ops", r.publisher_total_ops()}};
  j["subscriber_ops"] = r.subscriber_ops;
  j["messages"] = r.messages;
  j["hit_rate"] = r.hit_rate();
  j["cache_misses"] = r.messages - r.cache_hits;
  j["deliveries"] = r.deliveries.size();
  j["accepted"] = r.accepted();
  j["mean_verify_ops"] = r.mean_verify_ops();
  double comm = 0.0;
  for (auto c : r.communication_values) comm += static_cast<double>(c);
  j["mean_communication_values"] =
      r.communication_values.empty() ? 0.0 : comm / static_cast<double>(r.communication_values.size());
  std::vector<SimTime> lat;
  for (const auto& d : r.deliveries) lat.push_back(d.latency_us);
  std::sort(lat.begin(), lat.end());
  auto pct = [&](double p) -> SimTime {
    if (lat.empty()) return 0;
    return lat[static_cast<std::size_t>(p * static_cast<double>(lat.size() - 1))];
  };
  j["latency_us"] = {{"p50", pct(0.5)}, {"p99", pct(0.99)}, {"max", pct(1.0)}};
  j["announcements_lost"] = r.announcements_lost;
  j["messages_lost"] = r.messages_lost;
  j["rejections"] = r.rejections;
  j["false_rejects"] = r.false_rejects;
  j["adversarial"] = {{"attempts", r.adversarial_attempts},
                      {"acceptances", r.adversarial_acceptances}};
  j["invariant_violations"] = r.invariant_violations;
  return j;
}

// ---------------------------------------------------------------------------
// Engine

namespace detail {

/// Inverse-CDF draw of a candidate index.
inline std::uint64_t sample_from(const std::vector<double>& w, std::mt19937_64& gen) {
  const double u = unit_interval(gen());
  double acc = 0.0;
  for (std::size_t j = 0; j < w.size(); ++j) {
    acc += w[j];
    if (u < acc) return j;
  }
  return w.size() - 1;
}

/// What travels over a link.
struct Packet {
  enum class Type { kAnnouncement, kTreeMessage, kMacMessage };
  Type type = Type::kAnnouncement;
  std::uint32_t interval = 0;
  std::int64_t message_id = -1;
  bool adversarial = false;
  SimTime origin = 0;  // publisher-side message arrival
  std::uint64_t post_ops = 0;
  RootAnnouncement announcement;
  AuthenticatedMessage message;
  MessageMacs macs;
  Bytes wire;
};

struct QueuedEvent {
  enum class Type { kBuild, kArrive, kDeliver };
  SimTime time;
  std::uint64_t seq;
  Type type;
  std::uint32_t interval = 0;
  std::uint32_t copy = 0;
  std::size_t subscriber = 0;
  std::size_t packet = 0;

  bool operator>(const QueuedEvent& o) const { return std::tie(time, seq) > std::tie(o.time, o.seq); }
};

class Engine {
 public:
  Engine(const SimConfig& cfg, Adversary adversary)
      : cfg_(cfg),
        adversary_(adversary),
        crypto_(cfg.seed),
        adversary_crypto_(cfg.seed ^ 0xadu),
        traffic_(cfg.seed * 0x9e3779b97f4a7c15ull + 1),
        network_(cfg.seed * 0x9e3779b97f4a7c15ull + 2),
        len_(cfg.interval_length()) {
    validate(cfg_);
    if (adversary_ != Adversary::kNone && !is_tree_scheme(cfg_.scheme) &&
        (adversary_ == Adversary::kReplayOldRoot || adversary_ == Adversary::kEarlyKey)) {
      throw Error(ErrorCode::kConfigInvalid, std::string(to_string(adversary_)) +
                                                 " applies to CMA and CMMA only");
    }
    report_.config = cfg_;
    report_.subscriber_ops.assign(cfg_.subscribers, 0);
    tpl_ = sample_template(cfg_.k);
    weights_ = make_weights({cfg_.distribution, cfg_.k, cfg_.seed});
    std::uniform_int_distribution<SimTime> skew(-cfg_.sync_error_us, cfg_.sync_error_us);
    for (std::size_t n = 0; n < cfg_.subscribers; ++n) skew_.push_back(skew(network_));
    draw_traffic();
  }

  std::pair<SimReport, EventTrace> run() {
    setup_parties();
    for (std::uint32_t i = 1; i <= cfg_.horizon; ++i) {
      push({interval_start(i), 0, QueuedEvent::Type::kBuild, i});
    }
    while (!queue_.empty()) {
      auto ev = queue_.top();
      queue_.pop();
      now_ = ev.time;
      switch (ev.type) {
        case QueuedEvent::Type::kBuild: on_build(ev.interval); break;
        case QueuedEvent::Type::kArrive: on_arrive(ev.interval, ev.copy); break;
        case QueuedEvent::Type::kDeliver: on_deliver(ev.subscriber, ev.packet); break;
      }
    }
    check_trace();
    return {std::move(report_), std::move(trace_)};
  }

 private:
  struct IntervalState {
    PrioritizedSet set;
    std::optional<AuthTree> tree;
    Bytes announcement_wire;
    std::vector<bool> announcement_delivered;
    std::int64_t true_index = 0;  // -1: surprise
    std::vector<SimTime> offsets;
    std::vector<std::size_t> honest_packets;  // message packets, one per copy
  };

  // -- setup ---------------------------------------------------------------

  SimTime interval_start(std::uint32_t i) const { return (static_cast<SimTime>(i) - 1) * len_; }

  void draw_traffic() {
    intervals_.resize(cfg_.horizon + 1);
    const SimTime lo = cfg_.delay_max_us + cfg_.sync_error_us;
    const SimTime hi = len_ - cfg_.delay_max_us - cfg_.sync_error_us - 1;
    std::uniform_int_distribution<SimTime> offset(lo, hi);
    for (std::uint32_t i = 1; i <= cfg_.horizon; ++i) {
      auto& st = intervals_[i];
      if (i - 1 < cfg_.forced_true_indices.size()) {
        st.true_index = cfg_.forced_true_indices[i - 1];
      } else {
        const bool change = unit_interval(traffic_()) < cfg_.p_change;
        st.true_index = change ? static_cast<std::int64_t>(sample_from(weights_, traffic_)) : 0;
        if (unit_interval(traffic_()) < cfg_.surprise_prob) st.true_index = -1;
      }
      for (std::uint32_t c = 0; c < cfg_.messages_per_interval; ++c) st.offsets.push_back(offset(traffic_));
      std::sort(st.offsets.begin(), st.offsets.end());
    }
  }

  void setup_parties() {
    cma_ = cma_initialize(cfg_.subscribers, crypto_);
    if (cfg_.scheme == Scheme::kCma) {
      for (std::size_t n = 0; n < cfg_.subscribers; ++n) {
        cma_subs_.push_back(make_cma_subscriber(cma_, n, cfg_.ttl_ms));
      }
    } else if (cfg_.scheme == Scheme::kCmma) {
      schedule_ = DisclosureSchedule{len_, 0, cfg_.disclosure_delay};
      OpCounter gen;
      auto init = cmma_initialize(cfg_.horizon, crypto_.next_digest(), schedule_, nullptr, gen);
      report_.chain_generation_ops = init.publisher.chain_generation_ops;
      publisher_ = std::move(init.publisher);
      for (std::size_t n = 0; n < cfg_.subscribers; ++n) {
        cmma_subs_.push_back(cmma_subscriber_from_bootstrap(init.bootstrap, cfg_.sync_error_us));
      }
    } else {
      BaselineDesign d = BaselineDesign::kNoPrecompute;
      if (cfg_.scheme == Scheme::kPredictOne) d = BaselineDesign::kPredictOne;
      if (cfg_.scheme == Scheme::kPrecomputeAll) d = BaselineDesign::kPrecomputeAll;
      if (cfg_.scheme == Scheme::kStateChange) d = BaselineDesign::kStateChange;
      baseline_.emplace(BaselineConfig{d, cfg_.k, cfg_.k_u, cfg_.subscribers}, cma_.keys);
    }
  }

  // -- plumbing ------------------------------------------------------------

  void push(QueuedEvent e) {
    e.seq = seq_++;
    queue_.push(e);
  }

  static TraceEvent event(SimTime time, std::int64_t party, EventKind kind,
                          std::uint32_t interval, std::int64_t message_id = -1,
                          std::uint64_t hash_ops = 0, std::size_t bytes = 0) {
    TraceEvent e;
    e.time = time;
    e.party = party;
    e.kind = kind;
    e.interval = interval;
    e.message_id = message_id;
    e.hash_ops = hash_ops;
    e.bytes = bytes;
    return e;
  }

  void emit(TraceEvent e) {
    if (e.party == kPublisher) {
      publisher_trace_ops_ += e.hash_ops;
    } else {
      report_.subscriber_ops[static_cast<std::size_t>(e.party)] += e.hash_ops;
    }
    if (cfg_.record_trace) trace_.push_back(std::move(e));
  }

  SimTime compute_time(std::uint64_t ops) const {
    return static_cast<SimTime>(std::llround(static_cast<double>(ops) * cfg_.hash_op_time_us));
  }

  bool lost() { return cfg_.loss > 0.0 && unit_interval(network_()) < cfg_.loss; }

  SimTime link_delay() {
    std::uniform_int_distribution<SimTime> d(cfg_.delay_min_us, cfg_.delay_max_us);
    return d(network_);
  }

  std::size_t add_packet(Packet p) {
    packets_.push_back(std::move(p));
    return packets_.size() - 1;
  }

  void deliver(std::size_t sub, std::size_t packet, SimTime at) {
    push({at, 0, QueuedEvent::Type::kDeliver, 0, 0, sub, packet});
  }

  // -- publisher -----------------------------------------------------------

  MessageTemplate template_for(std::uint32_t i) const {
    auto tpl = tpl_;
    tpl.fields.sq_num = i;
    return tpl;
  }

  Message true_message(std::uint32_t i) const {
    const auto& st = intervals_[i];
    if (st.true_index >= 0) return st.set.messages[static_cast<std::size_t>(st.true_index)];
    auto tpl = template_for(i);
    tpl.fields.st_num += 1;  // outside every prediction
    return instantiate(tpl, 0);
  }

  void on_build(std::uint32_t i) {
    auto& st = intervals_[i];
    st.set = prioritize(template_for(i), {cfg_.distribution, cfg_.k, cfg_.seed}, i);
    emit(event(now_, kPublisher, EventKind::kPrioritize, i));

    if (cfg_.scheme == Scheme::kCma && cfg_.rekey_period > 0 && i > 1 &&
        (i - 1) % cfg_.rekey_period == 0) {
      cma_reinitialize(cma_, crypto_);
      for (std::size_t n = 0; n < cfg_.subscribers; ++n) cma_subs_[n].key = cma_.keys[n];
    }

    OpCounter ctr;
    const std::uint64_t ts_ms = static_cast<std::uint64_t>(interval_start(i) / 1000);
    if (cfg_.scheme == Scheme::kCma || cfg_.scheme == Scheme::kCmma) {
      auto ta = cfg_.scheme == Scheme::kCma
                    ? cma_tree_construction(cma_, st.set, ts_ms, cfg_.tree_kind, crypto_, ctr)
                    : cmma_tree_construction(publisher_, st.set, ts_ms, cfg_.tree_kind, crypto_, ctr);
      report_.publisher_pre_ops += ctr.hash_ops();
      emit(event(now_, kPublisher, EventKind::kTreeBuilt, i, -1, ctr.hash_ops()));
      st.tree = std::move(ta.tree);
      st.announcement_wire = encode_announcement(ta.announcement);
      emit(event(now_, kPublisher, EventKind::kAnnounceSent, i, -1, 0, st.announcement_wire.size()));
      // Construction happens ahead of the interval; the root leaves at its start.
      const SimTime sent = now_;
      st.announcement_delivered.assign(cfg_.subscribers, false);
      Packet p;
      p.type = Packet::Type::kAnnouncement;
      p.interval = i;
      p.announcement = ta.announcement;
      p.wire = st.announcement_wire;
      const auto idx = add_packet(std::move(p));
      std::size_t forged = 0;
      if (adversary_ == Adversary::kForgeMac) forged = add_packet(forge_announcement(i, ta.announcement));
      for (std::size_t n = 0; n < cfg_.subscribers; ++n) {
        const SimTime at = sent + link_delay();
        if (cfg_.loss_applies_to_announcements && lost()) {
          ++report_.announcements_lost;
        } else {
          st.announcement_delivered[n] = true;
          deliver(n, idx, at);
        }
        if (adversary_ == Adversary::kForgeMac) deliver(n, forged, at);
      }
    } else {
      baseline_->precompute(st.set, ctr);
      report_.publisher_pre_ops += ctr.hash_ops();
      emit(event(now_, kPublisher, EventKind::kTreeBuilt, i, -1, ctr.hash_ops()));
      st.announcement_delivered.assign(cfg_.subscribers, true);
    }

    const SimTime slot = interval_start(i + cfg_.lag());
    for (std::uint32_t c = 0; c < cfg_.messages_per_interval; ++c) {
      push({slot + st.offsets[c], 0, QueuedEvent::Type::kArrive, i, c});
    }
  }

  void on_arrive(std::uint32_t i, std::uint32_t copy) {
    auto& st = intervals_[i];
    const auto id = static_cast<std::int64_t>(report_.messages++);
    const Message m = true_message(i);
    emit(event(now_, kPublisher, EventKind::kMsgArrived, i, id));

    OpCounter post;
    Packet p;
    p.interval = i;
    p.message_id = id;
    p.origin = now_;
    bool hit = false;
    if (is_tree_scheme(cfg_.scheme)) {
      try {
        p.message = cfg_.scheme == Scheme::kCma
                        ? cma_prove(*st.tree, m, post)
                        : cmma_prove(publisher_, *st.tree, m, i + cfg_.lag(), post);
        p.type = Packet::Type::kTreeMessage;
        hit = true;
      } catch (const Error& e) {
        if (e.code() != ErrorCode::kCacheMiss) throw;
        p.type = Packet::Type::kMacMessage;
        p.macs = mac_per_destination(cma_.keys, m, post);
      }
    } else {
      auto sent = baseline_->send(m, post);
      p.type = Packet::Type::kMacMessage;
      p.macs = std::move(sent.evidence);
      hit = sent.cache_hit;
    }
    if (hit) ++report_.cache_hits;
    if (!hit && is_tree_scheme(cfg_.scheme)) {
      emit(event(now_, kPublisher, EventKind::kCacheMiss, i, id));
    }
    if (hit && is_tree_scheme(cfg_.scheme) && post.hash_ops() != 0) ++report_.invariant_violations;
    p.post_ops = post.hash_ops();
    report_.post_message_ops.push_back(post.hash_ops());

    const auto msg_bytes = canonical_encode(m).size();
    if (p.type == Packet::Type::kTreeMessage) {
      p.wire = encode_authenticated_message(p.message);
      const auto d = p.message.proof.depth();
      report_.communication_values.push_back(
          cfg_.scheme == Scheme::kCma
              ? cma_communication_values(st.announcement_wire, p.wire, msg_bytes, d, cfg_.subscribers)
              : cmma_communication_values(st.announcement_wire, p.wire, msg_bytes, d));
    } else {
      p.wire = encode_message_macs(p.macs);
      report_.communication_values.push_back((p.wire.size() - msg_bytes) / Digest::kSize);
    }
    emit(event(now_, kPublisher, EventKind::kProved, i, id, post.hash_ops(), p.wire.size()));
    if (p.message.disclosed_key) {
      emit(event(now_, kPublisher, EventKind::kKeyDisclosed, p.message.disclosed_key->interval, id,
                 0, kKeyDisclosureBytes));
    }

    const SimTime sent = now_ + compute_time(post.hash_ops());
    const auto idx = add_packet(std::move(p));
    st.honest_packets.push_back(idx);
    for (std::size_t n = 0; n < cfg_.subscribers; ++n) {
      const SimTime at = sent + link_delay();
      const bool delivered = !lost();
      if (delivered) {
        deliver(n, idx, at);
      } else {
        ++report_.messages_lost;
      }
      inject(i, copy, idx, n, at, delivered);
    }
  }

  // -- adversary -------------------------------------------------------------

  static void flip(Digest& d, std::size_t byte) { d.bytes[byte % Digest::kSize] ^= 0x01; }

  /// Announcement over an adversary-built tree for the same candidates,
  /// carrying MACs under keys the adversary made up.
  Packet forge_announcement(std::uint32_t i, const RootAnnouncement& honest) {
    auto tree = adversary_tree(i);
    Packet p;
    p.type = Packet::Type::kAnnouncement;
    p.interval = i;
    p.adversarial = true;
    p.announcement = honest;
    p.announcement.root = tree.root();
    for (auto& mac : p.announcement.macs) mac = adversary_crypto_.next_digest();
    p.wire = encode_announcement(p.announcement);
    return p;
  }

  /// Proof for `m` out of a tree the adversary built itself.
  AuthenticatedMessage forged_proof(const AuthTree& tree, const Message& m,
                                    const std::optional<KeyDisclosure>& key) {
    OpCounter scratch;
    const auto idx = tree.find(m).value_or(0);
    return {tree.messages()[idx], prove(tree, idx, scratch), key};
  }

  AuthTree adversary_tree(std::uint32_t i) {
    OpCounter scratch;
    return build_tree(cfg_.tree_kind, intervals_[i].set, adversary_crypto_, scratch);
  }

  void inject(std::uint32_t i, std::uint32_t copy, std::size_t honest_idx, std::size_t n,
              SimTime at, bool honest_delivered) {
    if (adversary_ == Adversary::kNone) return;
    const Packet& honest = packets_[honest_idx];
    std::optional<Packet> forged;
    std::optional<Packet> forged_ann;
    auto base = [&]() {
      Packet p = honest;
      p.adversarial = true;
      p.message_id = -1;
      return p;
    };

    switch (adversary_) {
      case Adversary::kNone: break;
      case Adversary::kTamperMsg: {
        Packet p = base();
        Message& m = p.type == Packet::Type::kTreeMessage ? p.message.message : p.macs.message;
        if (!m.unpredictable_bits.empty()) {
          const auto b = static_cast<std::size_t>(network_() % m.unpredictable_bits.size());
          m.unpredictable_bits[b] = !m.unpredictable_bits[b];
        } else {
          m.fields.st_num += 1;
        }
        forged = std::move(p);
        break;
      }
      case Adversary::kTamperProof: {
        Packet p = base();
        if (p.type == Packet::Type::kTreeMessage) {
          auto& proof = p.message.proof;
          if (proof.siblings.empty()) {
            proof.nonce.bytes[network_() % Nonce::kSize] ^= 0x01;
          } else {
            auto& s = proof.siblings[network_() % proof.siblings.size()];
            flip(s.digest, network_());
          }
        } else {
          for (auto& mac : p.macs.macs) flip(mac, network_());
        }
        forged = std::move(p);
        break;
      }
      case Adversary::kForgeMac: {
        Packet p = base();
        if (p.type == Packet::Type::kTreeMessage) {
          p.message = forged_proof(adversary_tree(i), honest.message.message,
                                   honest.message.disclosed_key);
        } else {
          for (auto& mac : p.macs.macs) mac = adversary_crypto_.next_digest();
        }
        forged = std::move(p);
        break;
      }
      case Adversary::kReplayOldRoot: {
        // Material from the previous interval, replayed right after the
        // subscriber received the current message, so its root has expired
        // and its key is stale.
        if (i < 2 || copy != 0 || !honest_delivered || intervals_[i - 1].honest_packets.empty()) {
          break;
        }
        const auto& old = intervals_[i - 1];
        Packet ann;
        ann.type = Packet::Type::kAnnouncement;
        ann.interval = i - 1;
        ann.adversarial = true;
        ann.announcement = decode_announcement(old.announcement_wire);
        ann.wire = old.announcement_wire;
        forged_ann = std::move(ann);
        Packet p = packets_[old.honest_packets.back()];
        p.adversarial = true;
        p.message_id = -1;
        forged = std::move(p);
        break;
      }
      case Adversary::kEarlyKey: {
        if (honest.type != Packet::Type::kTreeMessage) break;
        // CMA: a root that was never announced. CMMA: once C_i is public
        // the adversary can MAC any root for interval i, but the
        // announcement now arrives too late.
        auto tree = adversary_tree(i);
        auto am = forged_proof(tree, honest.message.message, honest.message.disclosed_key);
        if (cfg_.scheme == Scheme::kCmma) {
          OpCounter scratch;
          Packet ann;
          ann.type = Packet::Type::kAnnouncement;
          ann.interval = i;
          ann.adversarial = true;
          auto key = derive_key(honest.message.disclosed_key->key, scratch);
          Bytes ts;
          const std::uint64_t ts_ms = static_cast<std::uint64_t>(interval_start(i) / 1000);
          put_u64(ts, ts_ms);
          ann.announcement = {i, ts_ms, tree.root(),
                              {hmac(key, {ByteView(ts), tree.root().view()}, scratch)}};
          ann.wire = encode_announcement(ann.announcement);
          forged_ann = std::move(ann);
        }
        Packet p = base();
        p.message = am;
        forged = std::move(p);
        break;
      }
    }
    if (forged_ann) {
      forged_ann->wire = encode_announcement(forged_ann->announcement);
      deliver(n, add_packet(std::move(*forged_ann)), at);
    }
    if (forged) {
      if (forged->type == Packet::Type::kTreeMessage) {
        forged->wire = encode_authenticated_message(forged->message);
      } else {
        forged->wire = encode_message_macs(forged->macs);
      }
      deliver(n, add_packet(std::move(*forged)), at);
    }
  }

  // -- subscribers -----------------------------------------------------------

  void on_deliver(std::size_t n, std::size_t idx) {
    const Packet& p = packets_[idx];
    const SimTime local = now_ + skew_[n];
    OpCounter ctr;
    if (p.type == Packet::Type::kAnnouncement) {
      Verdict v = Verdict::kAccept;
      RootAnnouncement ann;
      try {
        ann = decode_announcement(p.wire);
      } catch (const Error&) {
        v = Verdict::kRejectMalformed;
      }
      if (v == Verdict::kAccept) {
        v = cfg_.scheme == Scheme::kCma ? cma_pre_verify(cma_subs_[n], ann, local, ctr)
                                        : cmma_receive_announcement(cmma_subs_[n], ann, local);
      }
      // A CMA announcement that passes pre-verification is authenticated; a
      // CMMA one is merely queued until its key arrives.
      if (p.adversarial) {
        ++report_.adversarial_attempts;
        if (v == Verdict::kAccept && cfg_.scheme == Scheme::kCma) ++report_.adversarial_acceptances;
      }
      auto e = event(now_, static_cast<std::int64_t>(n),
                     v == Verdict::kAccept ? EventKind::kAnnounceRecv : EventKind::kRejected,
                     p.interval, -1, ctr.hash_ops(), p.wire.size());
      e.adversarial = p.adversarial;
      if (v != Verdict::kAccept) e.detail = std::string(to_string(v));
      emit(std::move(e));
      return;
    }

    Verdict v = Verdict::kAccept;
    std::uint32_t gap = 0;
    unsigned depth = 0;
    std::size_t candidates = 1;
    try {
      if (p.type == Packet::Type::kMacMessage) {
        v = verify_message_mac(cma_.keys[n], n, decode_message_macs(p.wire), ctr);
      } else if (cfg_.scheme == Scheme::kCma) {
        auto am = decode_authenticated_message(p.wire, false);
        depth = static_cast<unsigned>(am.proof.depth());
        v = cma_verify(cma_subs_[n], am, local, ctr);
      } else {
        auto am = decode_authenticated_message(p.wire, true);
        depth = static_cast<unsigned>(am.proof.depth());
        const auto& sub = cmma_subs_[n];
        const auto& key = *am.disclosed_key;
        if (key.interval > sub.store.index) gap = key.interval - sub.store.index;
        if (auto it = sub.pending.find(key.interval); it != sub.pending.end()) {
          candidates = it->second.size();
        }
        v = cmma_verify(cmma_subs_[n], am, ctr);
      }
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kMalformed) throw;
      v = Verdict::kRejectMalformed;
    }

    const SimTime done = now_ + compute_time(ctr.hash_ops());
    auto e = event(now_, static_cast<std::int64_t>(n),
                   v == Verdict::kAccept ? EventKind::kVerified : EventKind::kRejected, p.interval,
                   p.message_id, ctr.hash_ops(), p.wire.size());
    e.adversarial = p.adversarial;
    if (v != Verdict::kAccept) e.detail = std::string(to_string(v));
    e.latency_us = done - p.origin;
    emit(std::move(e));

    if (p.adversarial) {
      ++report_.adversarial_attempts;
      if (v == Verdict::kAccept) ++report_.adversarial_acceptances;
      return;
    }
    DeliveryRecord r;
    r.message_id = p.message_id;
    r.subscriber = n;
    r.interval = p.interval;
    r.post_message_ops = p.post_ops;
    r.verify_ops = ctr.hash_ops();
    r.latency_us = done - p.origin;
    r.verdict = v;
    r.announcement_delivered = intervals_[p.interval].announcement_delivered[n];
    r.key_gap = gap;
    if (cfg_.scheme == Scheme::kCmma && p.type == Packet::Type::kTreeMessage &&
        v == Verdict::kAccept) {
      // derive 1, one HMAC per pending candidate, proof D + 1
      r.key_ops = ctr.hash_ops() - (1 + 2 * candidates + depth + 1);
    }
    if (v != Verdict::kAccept) {
      ++report_.rejections[std::string(to_string(v))];
      if (r.announcement_delivered) ++report_.false_rejects;
    }
    report_.deliveries.push_back(r);
  }

  void check_trace() {
    std::uint64_t pub = report_.publisher_pre_ops;
    for (auto v : report_.post_message_ops) pub += v;
    if (pub != publisher_trace_ops_) ++report_.invariant_violations;
    for (std::size_t x = 1; x < trace_.size(); ++x) {
      if (trace_[x].time < trace_[x - 1].time) ++report_.invariant_violations;
    }
  }

  SimConfig cfg_;
  Adversary adversary_;
  NonceSource crypto_;
  NonceSource adversary_crypto_;
  std::mt19937_64 traffic_;
  std::mt19937_64 network_;
  SimTime len_;
  SimTime now_ = 0;
  std::uint64_t seq_ = 0;
  std::priority_queue<QueuedEvent, std::vector<QueuedEvent>, std::greater<>> queue_;

  MessageTemplate tpl_;
  std::vector<double> weights_;
  std::vector<SimTime> skew_;
  std::vector<IntervalState> intervals_;
  std::vector<Packet> packets_;

  CmaContext cma_;
  std::vector<CmaSubscriber> cma_subs_;
  DisclosureSchedule schedule_;
  CmmaPublisher publisher_;
  std::vector<CmmaSubscriber> cmma_subs_;
  std::optional<BaselinePublisher> baseline_;

  SimReport report_;
  EventTrace trace_;
  std::uint64_t publisher_trace_ops_ = 0;
};

}  // namespace detail

inline std::pair<SimReport, EventTrace> run_sim(const SimConfig& cfg) {
  return detail::Engine(cfg, Adversary::kNone).run();
}

/// Runs the honest workload while an adversary injects one forged packet per
/// honest message delivery (plus forged or replayed announcements where the
/// strategy needs them). Acceptances must stay at zero.
inline SimReport inject_adversary(const SimConfig& cfg, Adversary strategy) {
  if (strategy == Adversary::kNone) {
    throw Error(ErrorCode::kConfigInvalid, "inject_adversary needs a strategy");
  }
  return detail::Engine(cfg, strategy).run().first;
}

/// Per honest message: the publisher's post-message cost, the mean
/// verification cost over the subscribers that got it, and the worst
/// publisher-arrival-to-verified latency.
struct LatencyPoint {
  std::int64_t message_id = 0;
  std::uint32_t interval = 0;
  std::uint64_t post_message_source_ops = 0;
  double verify_ops = 0.0;
  SimTime end_to_end_us = 0;
};

inline std::vector<LatencyPoint> latency_profile(const EventTrace& trace) {
  std::map<std::int64_t, LatencyPoint> points;
  std::map<std::int64_t, std::pair<std::uint64_t, std::size_t>> verify;
  for (const auto& e : trace) {
    if (e.message_id < 0 || e.adversarial) continue;
    auto& p = points[e.message_id];
    p.message_id = e.message_id;
    p.interval = e.interval;
    if (e.party == kPublisher && e.kind == EventKind::kProved) p.post_message_source_ops = e.hash_ops;
    if (e.party != kPublisher && (e.kind == EventKind::kVerified || e.kind == EventKind::kRejected)) {
      auto& [ops, count] = verify[e.message_id];
      ops += e.hash_ops;
      ++count;
      p.end_to_end_us = std::max(p.end_to_end_us, e.latency_us);
    }
  }
  std::vector<LatencyPoint> out;
  for (auto& [id, p] : points) {
    if (auto it = verify.find(id); it != verify.end() && it->second.second > 0) {
      p.verify_ops = static_cast<double>(it->second.first) / static_cast<double>(it->second.second);
    }
    out.push_back(p);
  }
  return out;
}

}  // namespace cmauth
