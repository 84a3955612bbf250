#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "sybiledge/graph.hpp"

namespace sybiledge {

enum class BaselineMethod { RejectRate, SybilRank, SybilScarC };

std::string_view to_string(BaselineMethod m);

/// Fraction of `user`'s sent requests that were rejected; 0 when none were sent.
double reject_rate(const RequestGraph& graph, NodeId user);

/// Undirected friendship graph over accepted requests. A pair that accepted
/// each other's requests is one edge.
class FriendshipGraph {
 public:
  static FriendshipGraph from_requests(const RequestGraph& graph);
  static FriendshipGraph from_edges(std::size_t n,
                                    std::span<const std::pair<NodeId, NodeId>> edges);

  std::size_t num_nodes() const { return offsets_.size() - 1; }
  std::size_t num_edges() const { return adjacency_.size() / 2; }
  std::size_t degree(NodeId v) const { return offsets_[v + 1] - offsets_[v]; }
  std::span<const NodeId> neighbors(NodeId v) const {
    return {adjacency_.data() + offsets_[v], adjacency_.data() + offsets_[v + 1]};
  }
  double average_degree() const;

 private:
  std::vector<std::size_t> offsets_{0};
  std::vector<NodeId> adjacency_;
};

struct SybilRankResult {
  std::vector<double> trust;             // raw trust after the last iteration
  std::vector<double> normalized_trust;  // trust / degree, 0 for isolated nodes
};

/// ceil(log2(n)), at least 1.
std::size_t default_sybil_rank_iterations(std::size_t n);

/**
 * Power-iteration trust propagation seeded on known real users. Each node
 * splits its trust evenly over its friends per iteration; isolated nodes keep
 * what they hold so total trust is conserved. Fake-likeness is the negated
 * normalized trust.
 *
 * Throws Error{EmptySeedSet}.
 */
SybilRankResult sybil_rank(const FriendshipGraph& graph, std::span<const NodeId> trusted_seeds,
                           std::size_t iterations);

struct ScarOptions {
  std::optional<double> weight;  // unset: 0.5 / average degree; set: must be > 0
  std::size_t max_iterations = 20;
  double tolerance = 1e-6;  // stop when no posterior moves more than this
  double prior_fake = 0.9;
  double prior_real = 0.1;
  double prior_unknown = 0.5;
};

/**
 * SybilSCAR-C style local rule with a single shared weight:
 *   p_i <- clamp(q_i + sum_{j in N(i)} w * (p_j - 0.5), 0, 1)
 * with synchronous updates starting from p = q. Fractional labels interpolate
 * q linearly between prior_real and prior_fake.
 *
 * Throws Error{InvalidArgument} for a non-positive weight.
 */
std::vector<double> sybil_scar_c(const FriendshipGraph& graph, const LabelTable& labels,
                                 const ScarOptions& options = {});

}  // namespace sybiledge
