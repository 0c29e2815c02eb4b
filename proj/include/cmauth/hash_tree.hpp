// Copyright (C) 2026 The cmauth Authors
// SPDX-License-Identifier: Apache-2.0

// Merkle (balanced) and Huffman (weight-shaped) hash trees over a nonced
// prioritized message set, plus inclusion proofs.
//
// Leaf digest:     H(0x00 || canonical_encode(m) || nonce)
// Internal digest: H(0x01 || left || right)
//
// Building a tree over n leaves costs exactly 2n - 1 hash operations;
// producing a proof costs none; replaying a proof of depth D costs D + 1.

#pragma once

#include <bit>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <queue>
#include <string>
#include <tuple>
#include <vector>

#include "cmauth/crypto.hpp"
#include "cmauth/message_model.hpp"

namespace cmauth {

enum class TreeKind { kMht, kHht };

constexpr std::string_view to_string(TreeKind k) { return k == TreeKind::kMht ? "MHT" : "HHT"; }

inline TreeKind tree_kind_from_string(std::string_view s) {
  if (s == "MHT") return TreeKind::kMht;
  if (s == "HHT") return TreeKind::kHht;
  throw Error(ErrorCode::kConfigInvalid, "unknown tree kind '" + std::string(s) + "'");
}

struct TreeLeaf {
  std::size_t message_index = 0;
  Nonce nonce;
  unsigned depth = 0;
  Digest leaf_digest;
};

struct TreeNode {
  Digest digest;
  static constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();
  std::size_t left = kNone;
  std::size_t right = kNone;
  std::size_t parent = kNone;
};

/// Which side of the running hash the sibling sits on.
enum class Side : std::uint8_t { kLeft = 0, kRight = 1 };

struct ProofStep {
  Digest digest;
  Side side = Side::kLeft;
  friend bool operator==(const ProofStep&, const ProofStep&) = default;
};

struct Proof {
  static constexpr std::size_t kUnknownIndex = std::numeric_limits<std::size_t>::max();
  std::size_t message_index = kUnknownIndex;  // sender-side only; not on the wire
  Nonce nonce;
  std::vector<ProofStep> siblings;  // leaf to root

  std::size_t depth() const { return siblings.size(); }
  /// Number of 32-byte values carried: the nonce plus one digest per level.
  std::size_t transmitted_values() const { return siblings.size() + 1; }
};

/// Immutable hash tree. Node ids 0..n-1 are the leaves in message order;
/// internal nodes follow in the order they were merged.
class AuthTree {
 public:
  std::uint32_t interval() const { return interval_; }
  TreeKind kind() const { return kind_; }
  const Digest& root() const { return nodes_[root_].digest; }
  const std::vector<TreeLeaf>& leaves() const { return leaves_; }
  const std::vector<TreeNode>& nodes() const { return nodes_; }
  const std::vector<Message>& messages() const { return messages_; }
  std::size_t size() const { return leaves_.size(); }

  unsigned max_depth() const {
    unsigned d = 0;
    for (const auto& l : leaves_) d = std::max(d, l.depth);
    return d;
  }

  /// Leaf index holding `m`, found by encoding lookup; no hashing.
  std::optional<std::size_t> find(const Message& m) const {
    auto it = index_.find(canonical_encode(m));
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  /// Builds the tree bottom-up. `merges` lists (left, right) node-id pairs in
  /// an order where both children exist before their parent.
  static AuthTree assemble(const PrioritizedSet& set, TreeKind kind,
                           const std::vector<std::pair<std::size_t, std::size_t>>& merges,
                           NonceSource& rng, OpCounter& ctr) {
    AuthTree t;
    t.interval_ = set.interval;
    t.kind_ = kind;
    t.messages_ = set.messages;
    const std::size_t n = set.messages.size();
    t.nodes_.resize(n + merges.size());
    t.leaves_.resize(n);
    for (std::size_t j = 0; j < n; ++j) {
      Bytes pre;
      put_u8(pre, prefix::kLeaf);
      auto enc_start = pre.size();
      canonical_encode_into(pre, set.messages[j]);
      Bytes enc(pre.begin() + static_cast<std::ptrdiff_t>(enc_start), pre.end());
      if (!t.index_.emplace(enc, j).second) {
        throw Error(ErrorCode::kConfigInvalid, "duplicate message in prioritized set");
      }
      auto& leaf = t.leaves_[j];
      leaf.message_index = j;
      leaf.nonce = gen_nonce(rng);
      put_bytes(pre, leaf.nonce.view());
      leaf.leaf_digest = hash(pre, ctr);
      t.nodes_[j].digest = leaf.leaf_digest;
    }
    Bytes buf;
    for (std::size_t m = 0; m < merges.size(); ++m) {
      auto [l, r] = merges[m];
      const std::size_t id = n + m;
      buf.clear();
      put_u8(buf, prefix::kNode);
      put_bytes(buf, t.nodes_[l].digest.view());
      put_bytes(buf, t.nodes_[r].digest.view());
      t.nodes_[id].digest = hash(buf, ctr);
      t.nodes_[id].left = l;
      t.nodes_[id].right = r;
      t.nodes_[l].parent = id;
      t.nodes_[r].parent = id;
    }
    t.root_ = t.nodes_.size() - 1;
    for (std::size_t j = 0; j < n; ++j) {
      unsigned d = 0;
      for (auto x = j; t.nodes_[x].parent != TreeNode::kNone; x = t.nodes_[x].parent) ++d;
      t.leaves_[j].depth = d;
    }
    return t;
  }

 private:
  std::uint32_t interval_ = 0;
  TreeKind kind_ = TreeKind::kMht;
  std::vector<Message> messages_;
  std::vector<TreeLeaf> leaves_;
  std::vector<TreeNode> nodes_;
  std::size_t root_ = 0;
  std::map<Bytes, std::size_t> index_;
};

/// Balanced tree; requires a power-of-two message count. Weights are ignored.
inline AuthTree build_mht(const PrioritizedSet& set, NonceSource& rng, OpCounter& ctr) {
  const std::size_t n = set.messages.size();
  if (n == 0 || !std::has_single_bit(n)) {
    throw Error(ErrorCode::kNotPowerOfTwo, std::to_string(n) + " messages");
  }
  std::vector<std::pair<std::size_t, std::size_t>> merges;
  std::vector<std::size_t> level(n);
  for (std::size_t j = 0; j < n; ++j) level[j] = j;
  std::size_t next = n;
  while (level.size() > 1) {
    std::vector<std::size_t> up;
    for (std::size_t i = 0; i < level.size(); i += 2) {
      merges.emplace_back(level[i], level[i + 1]);
      up.push_back(next++);
    }
    level = std::move(up);
  }
  return AuthTree::assemble(set, TreeKind::kMht, merges, rng, ctr);
}

/// Merge sequence of Huffman's algorithm. The queue is keyed by (weight,
/// smallest contained message index); the first node popped becomes the
/// left child.
inline std::vector<std::pair<std::size_t, std::size_t>> huffman_merges(
    const std::vector<double>& weights) {
  using Entry = std::tuple<double, std::size_t, std::size_t>;  // weight, min index, node id
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> queue;
  for (std::size_t j = 0; j < weights.size(); ++j) queue.emplace(weights[j], j, j);
  std::vector<std::pair<std::size_t, std::size_t>> merges;
  std::size_t next = weights.size();
  while (queue.size() > 1) {
    auto [wa, ia, a] = queue.top();
    queue.pop();
    auto [wb, ib, b] = queue.top();
    queue.pop();
    merges.emplace_back(a, b);
    queue.emplace(wa + wb, std::min(ia, ib), next++);
  }
  return merges;
}

/// Huffman-shaped tree: leaf depths equal optimal prefix-code lengths for the
/// set's weights. Any n >= 1 is accepted.
inline AuthTree build_hht(const PrioritizedSet& set, NonceSource& rng, OpCounter& ctr) {
  validate(set);
  return AuthTree::assemble(set, TreeKind::kHht, huffman_merges(set.weights), rng, ctr);
}

inline AuthTree build_tree(TreeKind kind, const PrioritizedSet& set, NonceSource& rng,
                           OpCounter& ctr) {
  return kind == TreeKind::kMht ? build_mht(set, rng, ctr) : build_hht(set, rng, ctr);
}

/// Collects the leaf nonce and sibling path. Performs no hashing.
inline Proof prove(const AuthTree& tree, std::size_t idx, OpCounter& /*ctr*/) {
  if (idx >= tree.size()) {
    throw Error(ErrorCode::kIndexOutOfRange,
                std::to_string(idx) + " >= " + std::to_string(tree.size()));
  }
  Proof p;
  p.message_index = idx;
  p.nonce = tree.leaves()[idx].nonce;
  const auto& nodes = tree.nodes();
  for (auto x = idx; nodes[x].parent != TreeNode::kNone; x = nodes[x].parent) {
    const auto& parent = nodes[nodes[x].parent];
    if (parent.left == x) {
      p.siblings.push_back({nodes[parent.right].digest, Side::kRight});
    } else {
      p.siblings.push_back({nodes[parent.left].digest, Side::kLeft});
    }
  }
  return p;
}

/// Recomputes the root implied by (m, p). Costs depth + 1 hash operations.
inline Digest root_from_proof(const Message& m, const Proof& p, OpCounter& ctr) {
  Bytes buf;
  put_u8(buf, prefix::kLeaf);
  canonical_encode_into(buf, m);
  put_bytes(buf, p.nonce.view());
  Digest cur = hash(buf, ctr);
  for (const auto& step : p.siblings) {
    buf.clear();
    put_u8(buf, prefix::kNode);
    if (step.side == Side::kLeft) {
      put_bytes(buf, step.digest.view());
      put_bytes(buf, cur.view());
    } else {
      put_bytes(buf, cur.view());
      put_bytes(buf, step.digest.view());
    }
    cur = hash(buf, ctr);
  }
  return cur;
}

/// Sum over leaves of weight times depth; `weights` is in message order.
inline double expected_depth(const AuthTree& tree, const std::vector<double>& weights) {
  if (weights.size() != tree.size()) {
    throw Error(ErrorCode::kConfigInvalid, "weights not aligned with leaves");
  }
  double e = 0.0;
  for (const auto& l : tree.leaves()) e += weights[l.message_index] * l.depth;
  return e;
}

// Wire form: message bytes || nonce || u8 depth || depth x (u8 side || digest).

inline void encode_proof_into(Bytes& out, const Message& m, const Proof& p) {
  if (p.depth() > 0xff) {
    throw Error(ErrorCode::kOversize, "proof depth " + std::to_string(p.depth()) + " exceeds 255");
  }
  canonical_encode_into(out, m);
  put_bytes(out, p.nonce.view());
  put_u8(out, static_cast<std::uint8_t>(p.depth()));
  for (const auto& s : p.siblings) {
    put_u8(out, static_cast<std::uint8_t>(s.side));
    put_bytes(out, s.digest.view());
  }
}

inline Bytes encode_proof(const Message& m, const Proof& p) {
  Bytes out;
  encode_proof_into(out, m, p);
  return out;
}

struct DecodedProof {
  Message message;
  Proof proof;
};

inline DecodedProof decode_proof(Reader& r) {
  DecodedProof d;
  d.message = canonical_decode(r);
  d.proof.nonce = Nonce::from(r.take(Nonce::kSize));
  const auto depth = r.u8();
  d.proof.siblings.reserve(depth);
  for (unsigned i = 0; i < depth; ++i) {
    auto flag = r.u8();
    if (flag > 1) throw Error(ErrorCode::kMalformed, "bad side flag");
    d.proof.siblings.push_back({Digest::from(r.take(Digest::kSize)), static_cast<Side>(flag)});
  }
  return d;
}

inline DecodedProof decode_proof(ByteView bytes) {
  Reader r(bytes);
  auto d = decode_proof(r);
  if (!r.done()) throw Error(ErrorCode::kMalformed, "trailing bytes after proof");
  return d;
}

}  // namespace cmauth
