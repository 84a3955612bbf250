#pragma once

#include <cstddef>
#include <cstdint>
#include <string_view>
#include <vector>

#include "sybiledge/graph.hpp"
#include "sybiledge/rates.hpp"

namespace sybiledge {

// Which likelihood factors enter the posterior.
enum class Variant {
  Full,           // target selection and target response
  SelectionOnly,  // which targets were chosen
  ResponseOnly,   // how targets answered (SybilEdgeTR)
};

std::string_view to_string(Variant v);
/// Parses "full", "selection_only", "response_only". Throws Error{ParseError}.
Variant parse_variant(std::string_view text);

/// Prior fake probability, either global or per node.
class Prior {
 public:
  static Prior global(double value);
  static Prior per_node(std::vector<double> values);

  double operator[](NodeId i) const { return values_.empty() ? global_ : values_[i]; }
  bool is_global() const { return values_.empty(); }
  std::size_t size() const { return values_.size(); }

 private:
  double global_ = 0.5;
  std::vector<double> values_;
};

struct ScoringConfig {
  Prior prior = Prior::global(0.5);
  Variant variant = Variant::Full;
  double clamp_eps = kDefaultClampEpsilon;
  bool explain = false;       // record per-edge contributions
  unsigned threads = 1;
};

struct EdgeEvidence {
  double selection = 0.0;  // log r_S - log r_B
  double response = 0.0;   // log A(x, S) - log A(x, B)
};

struct EdgeContribution {
  NodeId target = 0;
  bool accepted = false;
  EdgeEvidence evidence;
};

struct UserScore {
  NodeId node = 0;
  double p_fake = 0.0;
  double log_odds = 0.0;
  std::uint32_t edges_used = 0;
  std::vector<EdgeContribution> contributions;  // empty unless explain is set
};

struct ScoreTable {
  std::vector<UserScore> users;      // ascending node id
  std::uint64_t edges_visited = 0;   // adjacency entries read while scoring
};

/// Log-likelihood-ratio contribution of one request to an informative target.
/// Rates are clamped with `clamp_eps` before taking logs.
EdgeEvidence edge_log_odds(const TargetRates& rates, bool accepted, Variant variant,
                           double clamp_eps = kDefaultClampEpsilon);

/**
 * Posterior fake probability of `user` from its outgoing requests.
 *
 * log_odds = logit(prior) + sum of per-edge evidence over informative
 * targets, summed in ascending target id so the result does not depend on
 * edge order. A prior of exactly 0 or 1 passes through unchanged, and a user
 * whose edges carry no evidence keeps exactly its prior.
 *
 * Throws Error{UnknownNode} for an id outside the graph.
 */
UserScore score_user(const RequestGraph& graph, const RateTable& rates, NodeId user,
                     const ScoringConfig& config);

/// Scores every node without a label, in ascending id order.
ScoreTable score_all(const RequestGraph& graph, const RateTable& rates, const LabelTable& labels,
                     const ScoringConfig& config);

/// Scores an explicit list of users (kept in the given order).
ScoreTable score_users(const RequestGraph& graph, const RateTable& rates,
                       std::span<const NodeId> users, const ScoringConfig& config);

/**
 * Reference posterior evaluated literally as a ratio of products in extended
 * precision, over the user's edges in insertion order. Intended for
 * cross-checking score_user on users with up to a few hundred edges.
 *
 * Throws Error{Underflow | Overflow} when a product leaves the normal range
 * instead of silently flushing.
 */
double product_form_posterior(const RequestGraph& graph, const RateTable& rates, NodeId user,
                              const ScoringConfig& config);

double logit(double p);
double sigmoid(double x);

}  // namespace sybiledge
