#include "sybiledge/graph.hpp"

#include <algorithm>
#include <string>
#include <utility>

#include "sybiledge/error.hpp"
#include "sybiledge/rng.hpp"

namespace sybiledge {

namespace {

std::string describe(std::size_t index, const RequestEdge& e) {
  return "edge #" + std::to_string(index) + " (" + std::to_string(e.source) + " -> " +
         std::to_string(e.target) + ")";
}

}  // namespace

RequestGraph RequestGraph::build(std::size_t n, std::span<const RequestEdge> edges) {
  for (std::size_t k = 0; k < edges.size(); ++k) {
    const auto& e = edges[k];
    if (e.source >= n || e.target >= n) {
      throw Error(ErrorCode::NodeOutOfRange,
                  describe(k, e) + " has an endpoint >= n=" + std::to_string(n));
    }
    if (e.source == e.target) throw Error(ErrorCode::SelfLoop, describe(k, e));
  }

  RequestGraph g;
  g.n_ = n;
  g.edges_.assign(edges.begin(), edges.end());

  // Counting sort keeps insertion order inside each row.
  g.out_offsets_.assign(n + 1, 0);
  g.in_offsets_.assign(n + 1, 0);
  for (const auto& e : edges) {
    ++g.out_offsets_[e.source + 1];
    ++g.in_offsets_[e.target + 1];
  }
  for (std::size_t v = 0; v < n; ++v) {
    g.out_offsets_[v + 1] += g.out_offsets_[v];
    g.in_offsets_[v + 1] += g.in_offsets_[v];
  }
  g.out_.resize(edges.size());
  g.in_.resize(edges.size());
  std::vector<std::size_t> out_fill(g.out_offsets_.begin(), g.out_offsets_.end() - 1);
  std::vector<std::size_t> in_fill(g.in_offsets_.begin(), g.in_offsets_.end() - 1);
  for (const auto& e : edges) {
    g.out_[out_fill[e.source]++] = {e.target, e.accepted};
    g.in_[in_fill[e.target]++] = {e.source, e.accepted};
  }

  // Duplicate detection: sort (target, edge index) per source row.
  std::vector<std::size_t> row_edge_index(edges.size());
  std::copy(g.out_offsets_.begin(), g.out_offsets_.end() - 1, out_fill.begin());
  for (std::size_t k = 0; k < edges.size(); ++k) row_edge_index[out_fill[edges[k].source]++] = k;

  std::vector<std::pair<NodeId, std::size_t>> scratch;
  for (std::size_t v = 0; v < n; ++v) {
    const auto begin = g.out_offsets_[v];
    const auto end = g.out_offsets_[v + 1];
    if (end - begin < 2) continue;
    scratch.clear();
    for (auto p = begin; p < end; ++p) scratch.emplace_back(g.out_[p].node, row_edge_index[p]);
    std::sort(scratch.begin(), scratch.end());
    for (std::size_t p = 1; p < scratch.size(); ++p) {
      if (scratch[p].first == scratch[p - 1].first) {
        const auto k = scratch[p].second;
        throw Error(ErrorCode::DuplicateEdge,
                    describe(k, edges[k]) + " repeats " +
                        describe(scratch[p - 1].second, edges[scratch[p - 1].second]));
      }
    }
  }
  return g;
}

LabelTable::LabelTable(std::vector<std::optional<double>> labels) : labels_(std::move(labels)) {
  for (std::size_t v = 0; v < labels_.size(); ++v) {
    if (labels_[v] && !(*labels_[v] >= 0.0 && *labels_[v] <= 1.0)) {
      throw Error(ErrorCode::InvalidArgument,
                  "label of node " + std::to_string(v) + " is outside [0, 1]");
    }
  }
}

void LabelTable::set(NodeId node, double p_fake) {
  if (!(p_fake >= 0.0 && p_fake <= 1.0)) {
    throw Error(ErrorCode::InvalidArgument,
                "label of node " + std::to_string(node) + " is outside [0, 1]");
  }
  labels_[node] = p_fake;
}

KnownUnknownSplit split_known_unknown(const LabelTable& labels) {
  KnownUnknownSplit split;
  for (NodeId v = 0; v < labels.size(); ++v) {
    (labels.is_known(v) ? split.known : split.unknown).push_back(v);
  }
  return split;
}

LabelTable inject_label_noise(const LabelTable& labels, double flip_prob, std::uint64_t rng_seed) {
  if (!(flip_prob >= 0.0 && flip_prob <= 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "flip probability must lie in [0, 1]");
  }
  for (NodeId v = 0; v < labels.size(); ++v) {
    if (labels[v] && *labels[v] != 0.0 && *labels[v] != 1.0) {
      throw Error(ErrorCode::NonBinaryLabel,
                  "node " + std::to_string(v) + " has fractional label " +
                      std::to_string(*labels[v]));
    }
  }
  LabelTable noisy = labels;
  auto rng = make_rng(rng_seed);
  for (NodeId v = 0; v < labels.size(); ++v) {
    if (!labels[v]) continue;
    if (bernoulli(rng, flip_prob)) noisy.set(v, 1.0 - *labels[v]);
  }
  return noisy;
}

}  // namespace sybiledge
