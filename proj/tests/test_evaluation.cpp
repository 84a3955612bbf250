#include <doctest.h>

#include <cmath>
#include <random>

#include <json.hpp>

#include "oracles.hpp"
#include "sybiledge/error.hpp"
#include "sybiledge/evaluation.hpp"
#include "sybiledge/experiment.hpp"

using namespace sybiledge;

namespace {

struct Instance {
  std::vector<double> scores;
  std::vector<std::uint8_t> fake;
};

Instance random_instance(std::mt19937_64& rng, std::size_t n, int distinct) {
  Instance r;
  std::uniform_int_distribution<int> level(0, distinct - 1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (std::size_t i = 0; i < n; ++i) {
    r.scores.push_back(distinct > 0 ? level(rng) / 7.0 : u(rng));
    r.fake.push_back(u(rng) < 0.3 ? 1 : 0);
  }
  r.fake[0] = 1;
  r.fake[1] = 0;
  return r;
}

}  // namespace

TEST_CASE("roc_auc fixtures") {
  const std::vector<double> s{0.9, 0.4, 0.4, 0.1};
  const std::vector<std::uint8_t> y{1, 1, 0, 0};
  CHECK(roc_auc(s, y) == 0.875);
  CHECK(roc_auc(std::vector<double>{3, 2, 1, 0}, y) == 1.0);
  CHECK(roc_auc(std::vector<double>{0, 1, 2, 3}, y) == 0.0);
  CHECK(roc_auc(std::vector<double>(4, 0.3), y) == 0.5);
}

TEST_CASE("roc_auc refuses a single class") {
  for (const auto& y : {std::vector<std::uint8_t>{1, 1}, std::vector<std::uint8_t>{0, 0}}) {
    try {
      roc_auc(std::vector<double>{0.1, 0.2}, y);
      FAIL("expected SingleClass");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::SingleClass);
    }
  }
}

TEST_CASE("property: roc_auc equals the pairwise oracle") {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 2 + rng() % 1999;
    const int distinct = trial % 3 == 0 ? 0 : 1 + trial % 5;
    const auto r = random_instance(rng, n, distinct);
    CHECK(std::abs(roc_auc(r.scores, r.fake) - oracle::pairwise_auc(r.scores, r.fake)) < 1e-12);
  }
}

TEST_CASE("property: monotone transforms and complement symmetry") {
  std::mt19937_64 rng(32);
  for (int trial = 0; trial < 30; ++trial) {
    const auto r = random_instance(rng, 200, 0);
    const double base = roc_auc(r.scores, r.fake);
    std::vector<double> cubed, negated;
    for (const double x : r.scores) {
      cubed.push_back(std::exp(3.0 * x) - 7.0);
      negated.push_back(-x);
    }
    CHECK(roc_auc(cubed, r.fake) == doctest::Approx(base).epsilon(1e-14));
    CHECK(roc_auc(negated, r.fake) == doctest::Approx(1.0 - base).epsilon(1e-12));
  }
}

TEST_CASE("bucket schemes") {
  const auto fine = BucketScheme::fine();
  CHECK(fine.size() == 10);
  CHECK(fine.index_of(0) == 0);
  CHECK(fine.index_of(5) == 0);
  CHECK(fine.index_of(6) == 1);
  CHECK(fine.index_of(45) == 8);
  CHECK(fine.index_of(46) == 9);
  CHECK(fine.index_of(100000) == 9);
  CHECK(fine[9].label() == "46+");
  CHECK(fine[0].label() == "0-5");

  const auto coarse = BucketScheme::coarse();
  CHECK(coarse.size() == 4);
  CHECK(coarse.index_of(10) == 0);
  CHECK(coarse.index_of(11) == 1);
  CHECK(coarse.index_of(21) == 2);
  CHECK(coarse.index_of(46) == 3);

  const auto parsed = BucketScheme::parse("0:5,6:10,11:15,16:20,21:25,26:30,31:35,36:40,41:45,46:");
  CHECK(parsed.to_string() == fine.to_string());
  CHECK(BucketScheme::parse(coarse.to_string()).to_string() == coarse.to_string());

  CHECK_THROWS_AS(BucketScheme::parse("1:5,6:"), Error);
  CHECK_THROWS_AS(BucketScheme::parse("0:5,7:"), Error);
  CHECK_THROWS_AS(BucketScheme::parse("0:5,6:10"), Error);
  CHECK_THROWS_AS(BucketScheme::parse("0:x"), Error);
}

TEST_CASE("bucketed evaluation") {
  // Out-degrees: node 0 -> 0, node 1 -> 1, nodes 2..4 -> 0.
  std::vector<RequestEdge> edges{{1, 0, true}};
  const auto g = RequestGraph::build(5, edges);
  const LabelTable truth({1.0, 1.0, 0.0, 0.0, 1.0});
  const std::vector<NodeId> nodes{0, 1, 2, 3};
  const std::vector<double> scores{0.9, 0.8, 0.1, 0.2};
  const auto scheme = BucketScheme::parse("0:0,1:1,2:");
  const auto by = bucket_by_out_degree(g, nodes, scheme);
  CHECK(by[0] == std::vector<NodeId>{0, 2, 3});
  CHECK(by[1] == std::vector<NodeId>{1});
  CHECK(by[2].empty());

  const auto r = evaluate_bucketed(g, nodes, scores, truth, scheme);
  REQUIRE(r.buckets.size() == 3);
  CHECK(r.buckets[0].auc == 1.0);
  CHECK(r.buckets[0].n_fakes == 1);
  CHECK(r.buckets[0].n_reals == 2);
  CHECK(!r.buckets[1].auc.has_value());
  CHECK(!r.buckets[2].auc.has_value());
  CHECK(r.overall == 1.0);
  CHECK(r.n_fakes == 2);
}

TEST_CASE("property: pooled buckets give the overall AUC") {
  SynthConfig cfg;
  cfg.n = 1500;
  cfg.generator = Generator::Configuration;
  cfg.mean_degree = 10;
  const auto s = build_scenario(cfg);
  const auto split = split_known_unknown(s.training);
  const auto scores = run_method(Method::SybilEdge, s.graph, s.training, split.unknown, MethodOptions{});
  const auto r = evaluate_bucketed(s.graph, split.unknown, scores, s.truth, BucketScheme::fine());
  std::vector<std::uint8_t> y;
  for (const auto v : split.unknown) y.push_back(*s.truth[v] >= 0.5);
  CHECK(*r.overall == doctest::Approx(roc_auc(scores, y)).epsilon(1e-15));
  std::size_t total = 0;
  for (const auto& b : r.buckets) total += b.n_fakes + b.n_reals;
  CHECK(total == split.unknown.size());
}

TEST_CASE("sweeps") {
  SynthConfig base;
  base.n = 600;
  base.mean_degree = 8;
  SweepOptions opt;
  opt.seeds = {1, 2};
  opt.methods = {Method::SybilEdge, Method::RejectRate};

  SUBCASE("noise grid is one report and zero flips is the clean run") {
    const std::vector<double> flips{0.0, 0.1, 0.2, 0.3};
    const auto report = run_noise_sweep(base, flips, opt);
    CHECK(report.points.size() == 4 * 2 * 2);
    CHECK(report.summary.size() == 4 * 2);

    auto clean_cfg = base;
    clean_cfg.seed = 1;
    const auto s = build_scenario(clean_cfg);
    const auto clean = evaluate_scenario(s, s.training, opt.methods, opt.method_options, opt.buckets);
    CHECK(*report.points[0].auc.overall == *clean[0].auc.overall);
  }

  SUBCASE("identical seeds give identical bytes") {
    GeneratorGrid grid{{Generator::ErdosRenyi, Generator::Sbm}, {5.0}, {0.05, 0.1}};
    const auto a = run_generator_sweep(base, grid, opt);
    const auto b = run_generator_sweep(base, grid, opt);
    CHECK(a.to_json() == b.to_json());
    CHECK(a.to_tsv() == b.to_tsv());
    CHECK(a.summary.size() == 2 * 1 * 2 * 2);
    const auto j = nlohmann::json::parse(a.to_json());
    CHECK(j["seeds"].size() == 2);
  }

  SUBCASE("single point") {
    GeneratorGrid grid{{Generator::PreferentialAttachment}, {5.0}, {0.05}};
    opt.methods = {Method::SybilEdge};
    opt.seeds = {3};
    const auto r = run_generator_sweep(base, grid, opt);
    CHECK(r.summary.size() == 1);
    CHECK(r.points.size() == 1);
  }

  SUBCASE("all methods run") {
    opt.methods = {Method::SybilEdge, Method::SybilEdgeTR, Method::RejectRate, Method::SybilRank,
                   Method::SybilScarC};
    opt.seeds = {1};
    auto cfg = base;
    const auto s = build_scenario(cfg);
    const auto pts = evaluate_scenario(s, s.training, opt.methods, opt.method_options, opt.buckets);
    REQUIRE(pts.size() == 5);
    for (const auto& p : pts) {
      REQUIRE(p.auc.overall.has_value());
      CHECK(*p.auc.overall >= 0.0);
      CHECK(*p.auc.overall <= 1.0);
    }
  }
}

TEST_CASE("method names") {
  for (const auto m : {Method::SybilEdge, Method::SybilEdgeTR, Method::RejectRate, Method::SybilRank,
                       Method::SybilScarC}) {
    CHECK(parse_method(to_string(m)) == m);
  }
  CHECK_THROWS_AS(parse_method("votetrust"), Error);
}
