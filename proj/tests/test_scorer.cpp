#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "sybiledge/error.hpp"
#include "sybiledge/scorer.hpp"

using namespace sybiledge;

namespace {

TargetRates rates_of(double rs, double rb, double as, double ab) {
  return TargetRates{rs, rb, as, ab, true};
}

// Node 0 is the scored user, nodes 1..k its targets.
struct Star {
  RequestGraph graph;
  RateTable rates;
};

Star star(const std::vector<TargetRates>& targets, const std::vector<bool>& accepted) {
  std::vector<RequestEdge> edges;
  for (std::size_t k = 0; k < targets.size(); ++k) {
    edges.push_back({0, static_cast<NodeId>(k + 1), accepted[k]});
  }
  Star s{RequestGraph::build(targets.size() + 1, edges), {}};
  s.rates.targets.push_back(TargetRates{0.5, 0.5, 0.5, 0.5, false});
  s.rates.targets.insert(s.rates.targets.end(), targets.begin(), targets.end());
  return s;
}

ScoringConfig with_prior(double p, Variant v = Variant::Full) {
  ScoringConfig c;
  c.prior = Prior::global(p);
  c.variant = v;
  return c;
}

double log_uniform(std::mt19937_64& rng, double lo, double hi) {
  std::uniform_real_distribution<double> u(std::log(lo), std::log(hi));
  return std::exp(u(rng));
}

}  // namespace

TEST_CASE("single-edge posterior matches hand arithmetic") {
  // (0.05 * 0.5 * 0.2) / (0.05 * 0.5 * 0.2 + 0.95 * 0.9 * 0.1) = 0.005 / 0.0905
  const double expected = 0.005 / 0.0905;
  const auto s = star({rates_of(0.2, 0.1, 0.5, 0.9)}, {true});
  const auto u = score_user(s.graph, s.rates, 0, with_prior(0.05));
  CHECK(std::abs(u.p_fake - expected) < 1e-12);
  CHECK(std::abs(u.p_fake - 0.05525) < 1e-5);
  CHECK(u.edges_used == 1);
  CHECK(std::abs(product_form_posterior(s.graph, s.rates, 0, with_prior(0.05)) - expected) < 1e-12);
}

TEST_CASE("edge_log_odds") {
  SUBCASE("symmetric rates carry no evidence") {
    const auto e = edge_log_odds(rates_of(0.3, 0.3, 0.7, 0.7), true, Variant::Full);
    CHECK(e.selection == 0.0);
    CHECK(e.response == 0.0);
  }
  SUBCASE("accept and reject") {
    const auto acc = edge_log_odds(rates_of(0.1, 0.1, 0.5, 0.9), true, Variant::Full);
    CHECK(acc.response == doctest::Approx(std::log(0.5 / 0.9)).epsilon(1e-14));
    CHECK(acc.response == doctest::Approx(-0.5878).epsilon(1e-4));
    const auto rej = edge_log_odds(rates_of(0.1, 0.1, 0.5, 0.9), false, Variant::Full);
    CHECK(rej.response == doctest::Approx(std::log(0.5 / 0.1)).epsilon(1e-12));
    CHECK(rej.response == doctest::Approx(1.6094).epsilon(1e-4));
  }
  SUBCASE("variants zero out one part") {
    const auto r = rates_of(0.2, 0.1, 0.5, 0.9);
    CHECK(edge_log_odds(r, true, Variant::ResponseOnly).selection == 0.0);
    CHECK(edge_log_odds(r, true, Variant::SelectionOnly).response == 0.0);
    CHECK(edge_log_odds(r, true, Variant::SelectionOnly).selection == doctest::Approx(std::log(2.0)));
  }
  SUBCASE("rates at the boundary are clamped before the log") {
    const auto e = edge_log_odds(rates_of(0.0, 1.0, 1.0, 0.0), false, Variant::Full);
    CHECK(std::isfinite(e.selection));
    CHECK(std::isfinite(e.response));
  }
}

TEST_CASE("variant names") {
  CHECK(parse_variant("full") == Variant::Full);
  CHECK(parse_variant("selection_only") == Variant::SelectionOnly);
  CHECK(parse_variant("response_only") == Variant::ResponseOnly);
  CHECK(to_string(Variant::ResponseOnly) == "response_only");
  CHECK_THROWS_AS(parse_variant("tr"), Error);
}

TEST_CASE("degenerate users") {
  const auto s = star({rates_of(0.2, 0.1, 0.5, 0.9), rates_of(0.4, 0.1, 0.1, 0.9)}, {true, false});
  SUBCASE("no requests keeps the prior") {
    const auto u = score_user(s.graph, s.rates, 1, with_prior(0.05));
    CHECK(u.p_fake == 0.05);
    CHECK(u.edges_used == 0);
  }
  SUBCASE("certain priors pass through") {
    CHECK(score_user(s.graph, s.rates, 0, with_prior(0.0)).p_fake == 0.0);
    CHECK(score_user(s.graph, s.rates, 0, with_prior(1.0)).p_fake == 1.0);
    CHECK(product_form_posterior(s.graph, s.rates, 0, with_prior(1.0)) == 1.0);
  }
  SUBCASE("unknown node") {
    try {
      score_user(s.graph, s.rates, 99, with_prior(0.5));
      FAIL("expected UnknownNode");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::UnknownNode);
    }
  }
  SUBCASE("non-informative targets contribute nothing") {
    auto t = s;
    t.rates.targets[1].informative = false;
    t.rates.targets[2].informative = false;
    const auto u = score_user(t.graph, t.rates, 0, with_prior(0.05));
    CHECK(u.p_fake == 0.05);
    CHECK(u.edges_used == 0);
  }
  SUBCASE("invalid prior") {
    CHECK_THROWS_AS(Prior::global(1.5), Error);
  }
}

TEST_CASE("score_all covers exactly the unknown nodes") {
  const auto s = star({rates_of(0.2, 0.1, 0.5, 0.9), rates_of(0.4, 0.1, 0.1, 0.9)}, {true, false});
  const auto part = score_all(s.graph, s.rates, LabelTable({std::nullopt, 0.0, std::nullopt}), with_prior(0.1));
  REQUIRE(part.users.size() == 2);
  CHECK(part.users[0].node == 0);
  CHECK(part.users[1].node == 2);
  CHECK(part.edges_visited == 2);

  const auto none = score_all(s.graph, s.rates, LabelTable({1.0, 0.0, 0.0}), with_prior(0.1));
  CHECK(none.users.empty());
  CHECK(none.edges_visited == 0);
}

TEST_CASE("explain records sum to the log-odds") {
  const auto s = star({rates_of(0.2, 0.1, 0.5, 0.9), rates_of(0.4, 0.1, 0.1, 0.9)}, {true, false});
  auto cfg = with_prior(0.05);
  cfg.explain = true;
  const auto u = score_user(s.graph, s.rates, 0, cfg);
  REQUIRE(u.contributions.size() == 2);
  double total = logit(0.05);
  for (const auto& c : u.contributions) total += c.evidence.selection + c.evidence.response;
  CHECK(total == doctest::Approx(u.log_odds).epsilon(1e-14));
  CHECK(u.contributions[1].accepted == false);
  CHECK(u.contributions[1].evidence.response == doctest::Approx(std::log(0.9 / 0.1)));
}

TEST_CASE("property: log-space matches the product form") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t k = 1 + rng() % 200;
    std::vector<TargetRates> targets(k);
    std::vector<bool> accepted(k);
    for (std::size_t j = 0; j < k; ++j) {
      targets[j] = rates_of(log_uniform(rng, 1e-6, 1 - 1e-6), log_uniform(rng, 1e-6, 1 - 1e-6),
                            log_uniform(rng, 1e-6, 1 - 1e-6), log_uniform(rng, 1e-6, 1 - 1e-6));
      accepted[j] = u01(rng) < 0.5;
    }
    const auto s = star(targets, accepted);
    const auto cfg = with_prior(0.01 + 0.98 * u01(rng));
    const double fast = score_user(s.graph, s.rates, 0, cfg).p_fake;
    try {
      const double slow = product_form_posterior(s.graph, s.rates, 0, cfg);
      CHECK(std::abs(fast - slow) < 1e-9);
    } catch (const Error& e) {
      // Extended precision has a far wider range than this can reach.
      FAIL(e.what());
    }
  }
}

TEST_CASE("property: indiscriminate targets leave the posterior unchanged") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.01, 0.99);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<TargetRates> targets;
    std::vector<bool> accepted;
    for (int j = 0; j < 5; ++j) {
      targets.push_back(rates_of(u(rng), u(rng), u(rng), u(rng)));
      accepted.push_back(u(rng) < 0.5);
    }
    const auto base = star(targets, accepted);
    const double before = score_user(base.graph, base.rates, 0, with_prior(0.05)).p_fake;
    for (int j = 0; j < 100; ++j) {
      const double r = u(rng), a = u(rng);
      targets.push_back(rates_of(r, r, a, a));
      accepted.push_back(u(rng) < 0.5);
    }
    const auto more = star(targets, accepted);
    const double after = score_user(more.graph, more.rates, 0, with_prior(0.05)).p_fake;
    CHECK(std::abs(after - before) < 1e-12);
  }
}

TEST_CASE("property: response direction") {
  const auto base = star({rates_of(0.2, 0.1, 0.5, 0.9)}, {true});
  const double p0 = score_user(base.graph, base.rates, 0, with_prior(0.05)).p_fake;
  const auto discriminating = rates_of(0.05, 0.05, 0.2, 0.8);
  const auto acc = star({rates_of(0.2, 0.1, 0.5, 0.9), discriminating}, {true, true});
  const auto rej = star({rates_of(0.2, 0.1, 0.5, 0.9), discriminating}, {true, false});
  CHECK(score_user(acc.graph, acc.rates, 0, with_prior(0.05)).p_fake < p0);
  CHECK(score_user(rej.graph, rej.rates, 0, with_prior(0.05)).p_fake > p0);
}

TEST_CASE("property: edge order does not change the score bits") {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(1e-3, 1 - 1e-3);
  const std::size_t k = 60;
  RateTable rates;
  rates.targets.push_back(TargetRates{});
  for (std::size_t j = 0; j < k; ++j) rates.targets.push_back(rates_of(u(rng), u(rng), u(rng), u(rng)));
  std::vector<RequestEdge> edges;
  for (std::size_t j = 0; j < k; ++j) edges.push_back({0, static_cast<NodeId>(j + 1), u(rng) < 0.5});
  const double ref = score_user(RequestGraph::build(k + 1, edges), rates, 0, with_prior(0.3)).log_odds;
  for (int trial = 0; trial < 10; ++trial) {
    std::shuffle(edges.begin(), edges.end(), rng);
    const double got = score_user(RequestGraph::build(k + 1, edges), rates, 0, with_prior(0.3)).log_odds;
    CHECK(got == ref);
  }
}

TEST_CASE("property: response_only equals the full model with collapsed selection rates") {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(1e-3, 1 - 1e-3);
  std::vector<TargetRates> full, collapsed;
  std::vector<bool> accepted;
  for (int j = 0; j < 40; ++j) {
    const double as = u(rng), ab = u(rng), r = u(rng);
    full.push_back(rates_of(u(rng), u(rng), as, ab));
    collapsed.push_back(rates_of(r, r, as, ab));
    accepted.push_back(u(rng) < 0.5);
  }
  const auto a = star(full, accepted);
  const auto b = star(collapsed, accepted);
  const double tr = score_user(a.graph, a.rates, 0, with_prior(0.05, Variant::ResponseOnly)).p_fake;
  const double se = score_user(b.graph, b.rates, 0, with_prior(0.05, Variant::Full)).p_fake;
  CHECK(std::abs(tr - se) < 1e-12);
}

TEST_CASE("threaded scoring matches sequential scoring") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(1e-3, 1 - 1e-3);
  const std::size_t n = 300;
  std::vector<RequestEdge> edges;
  for (NodeId s = 0; s < n; ++s) {
    for (NodeId t = 0; t < n; ++t) {
      if (s != t && u(rng) < 0.05) edges.push_back({s, t, u(rng) < 0.5});
    }
  }
  const auto g = RequestGraph::build(n, edges);
  RateTable rates;
  for (std::size_t j = 0; j < n; ++j) rates.targets.push_back(rates_of(u(rng), u(rng), u(rng), u(rng)));
  std::vector<NodeId> users(n);
  std::iota(users.begin(), users.end(), NodeId{0});
  auto cfg = with_prior(0.05);
  const auto one = score_users(g, rates, users, cfg);
  cfg.threads = 4;
  const auto four = score_users(g, rates, users, cfg);
  REQUIRE(one.users.size() == four.users.size());
  for (std::size_t i = 0; i < n; ++i) CHECK(one.users[i].log_odds == four.users[i].log_odds);
  CHECK(one.edges_visited == edges.size());
  CHECK(four.edges_visited == edges.size());
}

TEST_CASE("logit and sigmoid") {
  CHECK(sigmoid(0.0) == 0.5);
  CHECK(logit(0.5) == 0.0);
  for (double x : {-30.0, -3.0, -0.1, 0.7, 12.0}) CHECK(logit(sigmoid(x)) == doctest::Approx(x).epsilon(1e-9));
  CHECK(sigmoid(-1000.0) >= 0.0);
  CHECK(sigmoid(1000.0) <= 1.0);
}
