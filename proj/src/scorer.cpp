#include "sybiledge/scorer.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <string>
#include <thread>
#include <utility>

#include "sybiledge/error.hpp"

namespace sybiledge {

std::string_view to_string(Variant v) {
  switch (v) {
    case Variant::Full: return "full";
    case Variant::SelectionOnly: return "selection_only";
    case Variant::ResponseOnly: return "response_only";
  }
  return "full";
}

Variant parse_variant(std::string_view text) {
  if (text == "full") return Variant::Full;
  if (text == "selection_only") return Variant::SelectionOnly;
  if (text == "response_only") return Variant::ResponseOnly;
  throw Error(ErrorCode::ParseError, "unknown variant '" + std::string(text) +
                                         "' (expected full, selection_only or response_only)");
}

Prior Prior::global(double value) {
  if (!(value >= 0.0 && value <= 1.0)) throw Error(ErrorCode::InvalidArgument, "prior must lie in [0, 1]");
  Prior p;
  p.global_ = value;
  return p;
}

Prior Prior::per_node(std::vector<double> values) {
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!(values[i] >= 0.0 && values[i] <= 1.0)) {
      throw Error(ErrorCode::InvalidArgument,
                  "prior of node " + std::to_string(i) + " must lie in [0, 1]");
    }
  }
  Prior p;
  p.values_ = std::move(values);
  return p;
}

double logit(double p) { return std::log(p) - std::log1p(-p); }

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

EdgeEvidence edge_log_odds(const TargetRates& rates, bool accepted, Variant variant,
                           double clamp_eps) {
  EdgeEvidence ev;
  if (variant != Variant::ResponseOnly) {
    const double rs = std::clamp(rates.select_fake, clamp_eps, 1.0);
    const double rb = std::clamp(rates.select_real, clamp_eps, 1.0);
    ev.selection = std::log(rs) - std::log(rb);
  }
  if (variant != Variant::SelectionOnly) {
    const double as = std::clamp(rates.accept_fake, clamp_eps, 1.0 - clamp_eps);
    const double ab = std::clamp(rates.accept_real, clamp_eps, 1.0 - clamp_eps);
    ev.response = accepted ? std::log(as) - std::log(ab) : std::log1p(-as) - std::log1p(-ab);
  }
  return ev;
}

namespace {

void check_shapes(const RequestGraph& graph, const RateTable& rates, const ScoringConfig& config) {
  if (rates.size() != graph.num_nodes()) {
    throw Error(ErrorCode::InvalidArgument, "rate table covers " + std::to_string(rates.size()) +
                                                " targets, graph has " +
                                                std::to_string(graph.num_nodes()) + " nodes");
  }
  if (!config.prior.is_global() && config.prior.size() != graph.num_nodes()) {
    throw Error(ErrorCode::InvalidArgument, "per-node prior does not match graph size");
  }
}

// Hot path; `scratch` is reused across users so nothing allocates unless
// contributions are requested.
UserScore score_one(const RequestGraph& graph, const RateTable& rates, NodeId user,
                    const ScoringConfig& config, std::vector<Neighbor>& scratch) {
  const auto row = graph.out(user);
  scratch.assign(row.begin(), row.end());
  std::sort(scratch.begin(), scratch.end(),
            [](const Neighbor& a, const Neighbor& b) { return a.node < b.node; });

  UserScore score;
  score.node = user;
  double evidence = 0.0;
  for (const auto& nb : scratch) {
    const auto& target = rates[nb.node];
    if (!target.informative) continue;
    const auto ev = edge_log_odds(target, nb.accepted, config.variant, config.clamp_eps);
    evidence += ev.selection + ev.response;
    ++score.edges_used;
    if (config.explain) score.contributions.push_back({nb.node, nb.accepted, ev});
  }

  const double prior = config.prior[user];
  score.log_odds = logit(prior) + evidence;
  score.p_fake = evidence == 0.0 ? prior : sigmoid(score.log_odds);
  return score;
}

}  // namespace

UserScore score_user(const RequestGraph& graph, const RateTable& rates, NodeId user,
                     const ScoringConfig& config) {
  if (user >= graph.num_nodes()) {
    throw Error(ErrorCode::UnknownNode, "node " + std::to_string(user) + " is not in the graph");
  }
  check_shapes(graph, rates, config);
  std::vector<Neighbor> scratch;
  return score_one(graph, rates, user, config, scratch);
}

ScoreTable score_users(const RequestGraph& graph, const RateTable& rates,
                       std::span<const NodeId> users, const ScoringConfig& config) {
  check_shapes(graph, rates, config);
  for (const auto u : users) {
    if (u >= graph.num_nodes()) {
      throw Error(ErrorCode::UnknownNode, "node " + std::to_string(u) + " is not in the graph");
    }
  }

  ScoreTable table;
  table.users.resize(users.size());
  auto work = [&](std::size_t begin, std::size_t end) {
    std::vector<Neighbor> scratch;
    for (std::size_t k = begin; k < end; ++k) {
      table.users[k] = score_one(graph, rates, users[k], config, scratch);
    }
  };

  const std::size_t workers =
      std::max<std::size_t>(1, std::min<std::size_t>(config.threads, users.size()));
  if (workers == 1) {
    work(0, users.size());
  } else {
    std::vector<std::jthread> pool;
    const std::size_t chunk = (users.size() + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w) {
      const auto begin = std::min(users.size(), w * chunk);
      const auto end = std::min(users.size(), begin + chunk);
      pool.emplace_back(work, begin, end);
    }
  }

  for (const auto u : users) table.edges_visited += graph.out_degree(u);
  return table;
}

ScoreTable score_all(const RequestGraph& graph, const RateTable& rates, const LabelTable& labels,
                     const ScoringConfig& config) {
  if (labels.size() != graph.num_nodes()) {
    throw Error(ErrorCode::InvalidArgument, "label table does not match graph size");
  }
  const auto split = split_known_unknown(labels);
  return score_users(graph, rates, split.unknown, config);
}

double product_form_posterior(const RequestGraph& graph, const RateTable& rates, NodeId user,
                              const ScoringConfig& config) {
  if (user >= graph.num_nodes()) {
    throw Error(ErrorCode::UnknownNode, "node " + std::to_string(user) + " is not in the graph");
  }
  check_shapes(graph, rates, config);

  const long double prior = config.prior[user];
  if (prior == 0.0L || prior == 1.0L) return static_cast<double>(prior);

  auto guard = [user](long double value, const char* side) {
    if (std::isinf(value)) {
      throw Error(ErrorCode::Overflow, std::string(side) + " product overflowed for node " +
                                           std::to_string(user));
    }
    if (value < LDBL_MIN) {
      throw Error(ErrorCode::Underflow, std::string(side) + " product underflowed for node " +
                                            std::to_string(user));
    }
  };

  const long double eps = config.clamp_eps;
  long double fake_side = prior;
  long double real_side = 1.0L - prior;
  for (const auto& nb : graph.out(user)) {
    const auto& t = rates[nb.node];
    if (!t.informative) continue;
    if (config.variant != Variant::ResponseOnly) {
      fake_side *= std::clamp<long double>(t.select_fake, eps, 1.0L);
      real_side *= std::clamp<long double>(t.select_real, eps, 1.0L);
    }
    if (config.variant != Variant::SelectionOnly) {
      const long double as = std::clamp<long double>(t.accept_fake, eps, 1.0L - eps);
      const long double ab = std::clamp<long double>(t.accept_real, eps, 1.0L - eps);
      fake_side *= nb.accepted ? as : 1.0L - as;
      real_side *= nb.accepted ? ab : 1.0L - ab;
    }
    guard(fake_side, "fake-class");
    guard(real_side, "real-class");
  }
  return static_cast<double>(fake_side / (fake_side + real_side));
}

}  // namespace sybiledge
