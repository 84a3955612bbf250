#include "sybiledge/baselines.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <string>

#include "sybiledge/error.hpp"

namespace sybiledge {

std::string_view to_string(BaselineMethod m) {
  switch (m) {
    case BaselineMethod::RejectRate: return "reject_rate";
    case BaselineMethod::SybilRank: return "sybil_rank";
    case BaselineMethod::SybilScarC: return "sybil_scar_c";
  }
  return "reject_rate";
}

double reject_rate(const RequestGraph& graph, NodeId user) {
  if (user >= graph.num_nodes()) {
    throw Error(ErrorCode::UnknownNode, "node " + std::to_string(user) + " is not in the graph");
  }
  const auto row = graph.out(user);
  if (row.empty()) return 0.0;
  const auto rejected =
      std::count_if(row.begin(), row.end(), [](const Neighbor& nb) { return !nb.accepted; });
  return static_cast<double>(rejected) / static_cast<double>(row.size());
}

FriendshipGraph FriendshipGraph::from_edges(std::size_t n,
                                            std::span<const std::pair<NodeId, NodeId>> edges) {
  std::vector<std::pair<NodeId, NodeId>> arcs;
  arcs.reserve(2 * edges.size());
  for (const auto& [u, v] : edges) {
    if (u >= n || v >= n) throw Error(ErrorCode::NodeOutOfRange, "friendship edge endpoint >= n");
    if (u == v) continue;
    arcs.emplace_back(u, v);
    arcs.emplace_back(v, u);
  }
  std::sort(arcs.begin(), arcs.end());
  arcs.erase(std::unique(arcs.begin(), arcs.end()), arcs.end());

  FriendshipGraph g;
  g.offsets_.assign(n + 1, 0);
  for (const auto& arc : arcs) ++g.offsets_[arc.first + 1];
  for (std::size_t v = 0; v < n; ++v) g.offsets_[v + 1] += g.offsets_[v];
  g.adjacency_.reserve(arcs.size());
  for (const auto& arc : arcs) g.adjacency_.push_back(arc.second);
  return g;
}

FriendshipGraph FriendshipGraph::from_requests(const RequestGraph& graph) {
  std::vector<std::pair<NodeId, NodeId>> accepted;
  for (const auto& e : graph.edges()) {
    if (e.accepted) accepted.emplace_back(e.source, e.target);
  }
  return from_edges(graph.num_nodes(), accepted);
}

double FriendshipGraph::average_degree() const {
  const auto n = num_nodes();
  return n == 0 ? 0.0 : static_cast<double>(adjacency_.size()) / static_cast<double>(n);
}

std::size_t default_sybil_rank_iterations(std::size_t n) {
  if (n <= 2) return 1;
  return static_cast<std::size_t>(std::bit_width(n - 1));
}

SybilRankResult sybil_rank(const FriendshipGraph& graph, std::span<const NodeId> trusted_seeds,
                           std::size_t iterations) {
  if (trusted_seeds.empty()) throw Error(ErrorCode::EmptySeedSet, "SybilRank needs at least one seed");
  const auto n = graph.num_nodes();
  std::vector<double> trust(n, 0.0);
  const double share = 1.0 / static_cast<double>(trusted_seeds.size());
  for (const auto s : trusted_seeds) {
    if (s >= n) throw Error(ErrorCode::NodeOutOfRange, "seed " + std::to_string(s) + " >= n");
    trust[s] += share;
  }

  std::vector<double> next(n);
  for (std::size_t it = 0; it < iterations; ++it) {
    std::fill(next.begin(), next.end(), 0.0);
    for (NodeId v = 0; v < n; ++v) {
      const auto deg = graph.degree(v);
      if (deg == 0) {
        next[v] += trust[v];
        continue;
      }
      const double out = trust[v] / static_cast<double>(deg);
      for (const auto u : graph.neighbors(v)) next[u] += out;
    }
    trust.swap(next);
  }

  SybilRankResult result;
  result.normalized_trust.resize(n);
  for (NodeId v = 0; v < n; ++v) {
    const auto deg = graph.degree(v);
    result.normalized_trust[v] = deg == 0 ? 0.0 : trust[v] / static_cast<double>(deg);
  }
  result.trust = std::move(trust);
  return result;
}

std::vector<double> sybil_scar_c(const FriendshipGraph& graph, const LabelTable& labels,
                                 const ScarOptions& options) {
  const auto n = graph.num_nodes();
  if (labels.size() != n) throw Error(ErrorCode::InvalidArgument, "label table does not match graph size");

  double weight;
  if (options.weight) {
    weight = *options.weight;
    if (!(weight > 0.0)) throw Error(ErrorCode::InvalidArgument, "SybilSCAR weight must be > 0");
  } else {
    const double avg = graph.average_degree();
    weight = avg > 0.0 ? 0.5 / avg : 0.5;
  }

  std::vector<double> prior(n);
  for (NodeId v = 0; v < n; ++v) {
    prior[v] = labels[v] ? options.prior_real + *labels[v] * (options.prior_fake - options.prior_real)
                         : options.prior_unknown;
  }

  std::vector<double> p = prior;
  std::vector<double> next(n);
  for (std::size_t it = 0; it < options.max_iterations; ++it) {
    double max_change = 0.0;
    for (NodeId v = 0; v < n; ++v) {
      double sum = 0.0;
      for (const auto u : graph.neighbors(v)) sum += p[u] - 0.5;
      next[v] = std::clamp(prior[v] + weight * sum, 0.0, 1.0);
      max_change = std::max(max_change, std::abs(next[v] - p[v]));
    }
    p.swap(next);
    if (max_change < options.tolerance) break;
  }
  return p;
}

}  // namespace sybiledge
