#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace sybiledge {

using NodeId = std::uint32_t;

// One friend request. `accepted` is the target's response (true = accept).
struct RequestEdge {
  NodeId source = 0;
  NodeId target = 0;
  bool accepted = false;

  friend bool operator==(const RequestEdge&, const RequestEdge&) = default;
};

// Adjacency entry: the node at the other end of the request and its response.
struct Neighbor {
  NodeId node = 0;
  bool accepted = false;

  friend bool operator==(const Neighbor&, const Neighbor&) = default;
};

/**
 * Directed friend-request graph with both adjacency views stored in CSR form.
 *
 * Nodes are dense ids 0..n-1. At most one request per ordered (source, target)
 * pair and no self-requests. The accepted-only subgraph is not stored
 * separately; filter on Neighbor::accepted.
 *
 * Immutable after construction.
 */
class RequestGraph {
 public:
  RequestGraph() = default;

  /// Validates and indexes `edges`. Adjacency lists keep insertion order.
  /// Throws Error{DuplicateEdge | SelfLoop | NodeOutOfRange}.
  static RequestGraph build(std::size_t n, std::span<const RequestEdge> edges);

  std::size_t num_nodes() const { return n_; }
  std::size_t num_edges() const { return edges_.size(); }

  std::span<const RequestEdge> edges() const { return edges_; }

  std::span<const Neighbor> out(NodeId node) const {
    return {out_.data() + out_offsets_[node], out_.data() + out_offsets_[node + 1]};
  }
  std::span<const Neighbor> in(NodeId node) const {
    return {in_.data() + in_offsets_[node], in_.data() + in_offsets_[node + 1]};
  }

  std::size_t out_degree(NodeId node) const { return out_offsets_[node + 1] - out_offsets_[node]; }
  std::size_t in_degree(NodeId node) const { return in_offsets_[node + 1] - in_offsets_[node]; }

 private:
  std::size_t n_ = 0;
  std::vector<RequestEdge> edges_;
  std::vector<std::size_t> out_offsets_{0};
  std::vector<Neighbor> out_;
  std::vector<std::size_t> in_offsets_{0};
  std::vector<Neighbor> in_;
};

/**
 * Per-node fake probability. 1.0 = known sybil, 0.0 = known benign, values in
 * between are probabilistic labels, and an empty optional marks an unknown
 * (new) user.
 */
class LabelTable {
 public:
  LabelTable() = default;
  explicit LabelTable(std::size_t n) : labels_(n) {}
  explicit LabelTable(std::vector<std::optional<double>> labels);

  std::size_t size() const { return labels_.size(); }

  const std::optional<double>& operator[](NodeId node) const { return labels_[node]; }

  /// Throws Error{InvalidArgument} when `p_fake` is outside [0, 1].
  void set(NodeId node, double p_fake);
  void clear(NodeId node) { labels_[node].reset(); }

  bool is_known(NodeId node) const { return labels_[node].has_value(); }

  std::span<const std::optional<double>> values() const { return labels_; }

  friend bool operator==(const LabelTable&, const LabelTable&) = default;

 private:
  std::vector<std::optional<double>> labels_;
};

struct KnownUnknownSplit {
  std::vector<NodeId> known;
  std::vector<NodeId> unknown;
};

/// Partitions nodes by label presence. Both lists are in ascending id order.
KnownUnknownSplit split_known_unknown(const LabelTable& labels);

/// Flips each known binary label independently with probability `flip_prob`.
/// Deterministic in `rng_seed`. Throws Error{NonBinaryLabel} on fractional labels.
LabelTable inject_label_noise(const LabelTable& labels, double flip_prob, std::uint64_t rng_seed);

}  // namespace sybiledge
