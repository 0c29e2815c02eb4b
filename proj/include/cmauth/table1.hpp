// Copyright (C) 2026 The cmauth Authors
// SPDX-License-Identifier: Apache-2.0

// Closed-form cost expressions for the eight designs (four baselines, CMA and
// CMMA over both tree kinds) and a harness that measures the same quantities
// by running the protocols with one true message per interval.

#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "cmauth/protocols.hpp"

namespace cmauth {

enum class Design {
  kNoPrecompute,
  kPredictOne,
  kPrecomputeAll,
  kStateChange,
  kCmaMht,
  kCmaHht,
  kCmmaMht,
  kCmmaHht,
};

inline constexpr std::array kAllDesigns = {
    Design::kNoPrecompute, Design::kPredictOne, Design::kPrecomputeAll, Design::kStateChange,
    Design::kCmaMht,       Design::kCmaHht,     Design::kCmmaMht,       Design::kCmmaHht,
};

constexpr std::string_view to_string(Design d) {
  switch (d) {
    case Design::kNoPrecompute: return "NO_PRECOMPUTE";
    case Design::kPredictOne: return "PREDICT_ONE";
    case Design::kPrecomputeAll: return "PRECOMPUTE_ALL";
    case Design::kStateChange: return "STATE_CHANGE";
    case Design::kCmaMht: return "CMA_MHT";
    case Design::kCmaHht: return "CMA_HHT";
    case Design::kCmmaMht: return "CMMA_MHT";
    case Design::kCmmaHht: return "CMMA_HHT";
  }
  return "?";
}

inline bool is_tree_design(Design d) { return d >= Design::kCmaMht; }
inline bool is_cma(Design d) { return d == Design::kCmaMht || d == Design::kCmaHht; }
inline bool is_cmma(Design d) { return d == Design::kCmmaMht || d == Design::kCmmaHht; }

inline TreeKind tree_kind_of(Design d) {
  return d == Design::kCmaHht || d == Design::kCmmaHht ? TreeKind::kHht : TreeKind::kMht;
}

inline BaselineDesign baseline_of(Design d) {
  switch (d) {
    case Design::kPredictOne: return BaselineDesign::kPredictOne;
    case Design::kPrecomputeAll: return BaselineDesign::kPrecomputeAll;
    case Design::kStateChange: return BaselineDesign::kStateChange;
    default: return BaselineDesign::kNoPrecompute;
  }
}

/// Costs attributable to one interval carrying one true message.
struct IntervalCosts {
  std::uint64_t publisher_pre = 0;   // before the message is known (CMMA: amortized)
  std::uint64_t publisher_post = 0;  // between message arrival and send
  std::uint64_t subscriber = 0;      // per subscriber, announcement plus message
  std::uint64_t communication = 0;   // 32-byte values per message

  friend bool operator==(const IntervalCosts&, const IntervalCosts&) = default;
};

/// What a measured interval looked like, needed to pick the formula branch.
struct IntervalShape {
  unsigned depth = 0;   // proof depth of the true message (tree designs)
  bool hit = true;      // PREDICT_ONE: prediction correct; STATE_CHANGE: urgent
};

inline std::uint64_t pow2(unsigned k) { return std::uint64_t{1} << k; }

/// Table entries under the standard convention (hash 1, HMAC 2, H' 1).
inline IntervalCosts closed_form(Design d, std::uint64_t n, unsigned k, unsigned k_u,
                                 IntervalShape s) {
  const std::uint64_t D = s.depth;
  switch (d) {
    case Design::kNoPrecompute: return {0, 2 * n, 2, n};
    case Design::kPredictOne: return {2 * n, s.hit ? 0 : 2 * n, 2, n};
    case Design::kPrecomputeAll: return {2 * n * pow2(k), 0, 2, n};
    case Design::kStateChange: return {2 * n * pow2(k_u), s.hit ? 0 : 2 * n, 2, n};
    case Design::kCmaMht: return {2 * n + pow2(k + 1) - 1, 0, k + 3u, n * (k + 2u)};
    case Design::kCmaHht: return {2 * n + pow2(k + 1) - 1, 0, D + 3, n * (D + 2)};
    case Design::kCmmaMht: return {pow2(k + 1) + 3, 0, k + 5u, k + 3u};
    case Design::kCmmaHht: return {pow2(k + 1) + 3, 0, D + 5, D + 3};
  }
  return {};
}

struct MeasuredInterval {
  IntervalCosts costs;
  IntervalShape shape;
  bool subscribers_agree = true;  // every subscriber paid the same and accepted
};

struct MeasureOptions {
  std::size_t subscribers = 1;
  unsigned k = 1;
  unsigned k_u = 0;
  DistributionKind distribution = DistributionKind::kGeometric;
  CostModel cost_model{};
};

/// Runs `picks.size()` intervals; interval t carries candidate picks[t] as its
/// true message. Every pick must be a prioritized candidate.
inline std::vector<MeasuredInterval> measure_design(Design design, const MeasureOptions& opt,
                                                    const std::vector<std::uint64_t>& picks,
                                                    NonceSource& rng) {
  const auto N = opt.subscribers;
  const auto T = picks.size();
  const auto& cm = opt.cost_model;
  auto tpl = sample_template(opt.k);
  auto ctx = cma_initialize(N, rng);
  std::vector<MeasuredInterval> out;
  out.reserve(T);

  auto set_for = [&](std::uint32_t i) {
    tpl.fields.sq_num = i;
    return prioritize(tpl, {opt.distribution, opt.k, 7}, i);
  };

  if (!is_tree_design(design)) {
    BaselinePublisher pub({baseline_of(design), opt.k, opt.k_u, N}, ctx.keys);
    for (std::uint32_t t = 0; t < T; ++t) {
      auto set = set_for(t + 1);
      MeasuredInterval mi;
      OpCounter pre(cm);
      pub.precompute(set, pre);
      mi.costs.publisher_pre = pre.hash_ops();
      const auto& m = set.messages[picks[t]];
      OpCounter post(cm);
      auto sent = pub.send(m, post);
      mi.costs.publisher_post = post.hash_ops();
      mi.shape.hit = design == Design::kStateChange ? is_urgent(m, opt.k_u) : sent.cache_hit;
      mi.costs.communication =
          (encode_message_macs(sent.evidence).size() - canonical_encode(m).size()) /
          Digest::kSize;
      for (std::size_t n = 0; n < N; ++n) {
        OpCounter sub(cm);
        const bool ok = verify_message_mac(ctx.keys[n], n, sent.evidence, sub) == Verdict::kAccept;
        if (n == 0) mi.costs.subscriber = sub.hash_ops();
        mi.subscribers_agree &= ok && sub.hash_ops() == mi.costs.subscriber;
      }
      out.push_back(mi);
    }
    return out;
  }

  const auto kind = tree_kind_of(design);
  if (is_cma(design)) {
    const std::uint16_t ttl_ms = 1000;
    std::vector<CmaSubscriber> subs;
    for (std::size_t n = 0; n < N; ++n) subs.push_back(make_cma_subscriber(ctx, n, ttl_ms));
    for (std::uint32_t t = 0; t < T; ++t) {
      auto set = set_for(t + 1);
      const std::uint64_t ts_ms = std::uint64_t{t} * ttl_ms;
      MeasuredInterval mi;
      OpCounter pre(cm);
      auto ta = cma_tree_construction(ctx, set, ts_ms, kind, rng, pre);
      mi.costs.publisher_pre = pre.hash_ops();
      const auto& m = set.messages[picks[t]];
      OpCounter post(cm);
      auto am = cma_prove(ta.tree, m, post);
      mi.costs.publisher_post = post.hash_ops();
      mi.shape.depth = static_cast<unsigned>(am.proof.depth());
      const auto ann_wire = encode_announcement(ta.announcement);
      const auto msg_wire = encode_authenticated_message(am);
      mi.costs.communication = cma_communication_values(
          ann_wire, msg_wire, canonical_encode(m).size(), am.proof.depth(), N);
      const SimTime now = ms_to_sim(ts_ms) + 1;
      for (std::size_t n = 0; n < N; ++n) {
        OpCounter sub(cm);
        const bool ok = cma_pre_verify(subs[n], decode_announcement(ann_wire), now, sub) ==
                            Verdict::kAccept &&
                        cma_verify(subs[n], decode_authenticated_message(msg_wire, false), now,
                                   sub) == Verdict::kAccept;
        if (n == 0) mi.costs.subscriber = sub.hash_ops();
        mi.subscribers_agree &= ok && sub.hash_ops() == mi.costs.subscriber;
      }
      out.push_back(mi);
    }
    return out;
  }

  // CMMA: chain of length T, one key per interval, disclosure delay 1.
  const DisclosureSchedule schedule{1'000'000, 0, 1};
  OpCounter gen(cm);
  auto init = cmma_initialize(T, rng.next_digest(), schedule, nullptr, gen);
  const std::uint64_t amortized_chain = init.publisher.chain_generation_ops / T;
  std::vector<CmmaSubscriber> subs(N, cmma_subscriber_from_bootstrap(init.bootstrap, 0));
  for (std::uint32_t t = 0; t < T; ++t) {
    const std::uint32_t i = t + 1;
    auto set = set_for(i);
    MeasuredInterval mi;
    OpCounter pre(cm);
    auto ta = cmma_tree_construction(init.publisher, set, std::uint64_t{t} * 1000, kind, rng, pre);
    mi.costs.publisher_pre = pre.hash_ops() + amortized_chain;
    const auto ann_wire = encode_announcement(ta.announcement);
    for (auto& s : subs) {
      if (cmma_receive_announcement(s, decode_announcement(ann_wire),
                                    schedule.interval_start(i) + 1) != Verdict::kAccept) {
        mi.subscribers_agree = false;
      }
    }
    const auto& m = set.messages[picks[t]];
    OpCounter post(cm);
    auto am = cmma_prove(init.publisher, ta.tree, m, i + schedule.delay, post);
    mi.costs.publisher_post = post.hash_ops();
    mi.shape.depth = static_cast<unsigned>(am.proof.depth());
    const auto msg_wire = encode_authenticated_message(am);
    mi.costs.communication = cmma_communication_values(ann_wire, msg_wire,
                                                       canonical_encode(m).size(),
                                                       am.proof.depth());
    for (std::size_t n = 0; n < N; ++n) {
      OpCounter sub(cm);
      const bool ok =
          cmma_verify(subs[n], decode_authenticated_message(msg_wire, true), sub) ==
          Verdict::kAccept;
      if (n == 0) mi.costs.subscriber = sub.hash_ops();
      mi.subscribers_agree &= ok && sub.hash_ops() == mi.costs.subscriber;
    }
    out.push_back(mi);
  }
  return out;
}

struct Table1Mismatch {
  Design design;
  std::size_t subscribers;
  unsigned k;
  std::size_t interval;
  std::string metric;
  std::int64_t expected;
  std::int64_t measured;
};

struct Table1Report {
  std::size_t grid_points = 0;
  std::size_t checks = 0;
  std::vector<Table1Mismatch> mismatches;
  bool pass() const { return mismatches.empty(); }
};

struct Table1Grid {
  std::vector<std::size_t> subscribers{1, 2, 10, 50};
  std::vector<unsigned> ks{0, 1, 2, 3, 4, 5};
  std::vector<Design> designs{kAllDesigns.begin(), kAllDesigns.end()};
  std::uint64_t seed = 1;
  CostModel cost_model{};  // convention used for measuring; formulas stay fixed
};

/// STATE_CHANGE urgent-bit count used by the check: one bit less than k.
inline unsigned default_k_u(unsigned k) { return k > 0 ? k - 1 : 0; }

/// Every candidate is the true message of one interval (at least two
/// intervals), so each leaf depth and each hit/miss branch is exercised.
inline Table1Report table1_check(const Table1Grid& grid) {
  Table1Report report;
  NonceSource rng(grid.seed);
  for (auto design : grid.designs) {
    for (auto n : grid.subscribers) {
      for (auto k : grid.ks) {
        ++report.grid_points;
        const std::size_t T = std::max<std::size_t>(2, std::size_t{1} << k);
        std::vector<std::uint64_t> picks(T);
        for (std::size_t t = 0; t < T; ++t) picks[t] = t % (std::size_t{1} << k);
        MeasureOptions opt{n, k, default_k_u(k), DistributionKind::kGeometric, grid.cost_model};
        auto measured = measure_design(design, opt, picks, rng);
        for (std::size_t t = 0; t < measured.size(); ++t) {
          const auto& mi = measured[t];
          const auto want = closed_form(design, n, k, opt.k_u, mi.shape);
          auto check = [&](const char* metric, std::uint64_t e, std::uint64_t m) {
            ++report.checks;
            if (e != m) {
              report.mismatches.push_back({design, n, k, t, metric, static_cast<std::int64_t>(e),
                                           static_cast<std::int64_t>(m)});
            }
          };
          check("publisher_pre", want.publisher_pre, mi.costs.publisher_pre);
          check("publisher_post", want.publisher_post, mi.costs.publisher_post);
          check("subscriber", want.subscriber, mi.costs.subscriber);
          check("communication", want.communication, mi.costs.communication);
          check("subscribers_agree", 1, mi.subscribers_agree ? 1 : 0);
        }
      }
    }
  }
  return report;
}

}  // namespace cmauth
