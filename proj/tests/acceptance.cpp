// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fail.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "sybiledge/baselines.hpp"
#include "sybiledge/error.hpp"
#include "sybiledge/evaluation.hpp"
#include "sybiledge/experiment.hpp"
#include "sybiledge/rates.hpp"
#include "sybiledge/scorer.hpp"
#include "sybiledge/synth.hpp"

using namespace sybiledge;
using Clock = std::chrono::steady_clock;

namespace {

const std::vector<std::uint64_t> kSeeds{1, 2, 3, 4, 5};
const std::vector<Generator> kGenerators{Generator::ErdosRenyi, Generator::Configuration, Generator::Sbm,
                                         Generator::PreferentialAttachment};

double seconds_since(Clock::time_point t) {
  return std::chrono::duration<double>(Clock::now() - t).count();
}

double mean(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0) / v.size(); }

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// Scenario with the default profiles, n = 10000, 5% fakes, 80% labeled, mean out-degree 20.
SynthConfig base_scenario(Generator g, std::uint64_t seed) {
  SynthConfig c;
  c.n = 10000;
  c.fraction_fake = 0.05;
  c.fraction_known = 0.8;
  c.mean_degree = 20;
  c.generator = g;
  c.seed = seed;
  return c;
}

double auc_on_unknown(const Scenario& s, const LabelTable& training, Method m) {
  const auto test = split_known_unknown(training).unknown;
  const auto scores = run_method(m, s.graph, training, test, MethodOptions{});
  std::vector<std::uint8_t> y;
  y.reserve(test.size());
  for (const auto v : test) y.push_back(*s.truth[v] >= 0.5 ? 1 : 0);
  return roc_auc(scores, y);
}

double log_uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::exp(std::uniform_real_distribution<double>(std::log(lo), std::log(hi))(rng));
}

// Node 0 requests nodes 1..k.
RequestGraph star_graph(const std::vector<bool>& accepted) {
  std::vector<RequestEdge> edges;
  for (std::size_t j = 0; j < accepted.size(); ++j) edges.push_back({0, static_cast<NodeId>(j + 1), accepted[j]});
  return RequestGraph::build(accepted.size() + 1, edges);
}

ScoringConfig prior_config(double p) {
  ScoringConfig c;
  c.prior = Prior::global(p);
  return c;
}

Outcome criterion_1() {
  const auto start = Clock::now();
  std::mt19937_64 rng(101);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst = 0.0;
  const int trials = 1000;
  for (int t = 0; t < trials; ++t) {
    const std::size_t k = 1 + rng() % 200;
    RateTable rates;
    rates.targets.push_back(TargetRates{});
    std::vector<bool> accepted(k);
    for (std::size_t j = 0; j < k; ++j) {
      const double lo = 1e-6, hi = 1 - 1e-6;
      rates.targets.push_back(TargetRates{log_uniform(rng, lo, hi), log_uniform(rng, lo, hi),
                                          log_uniform(rng, lo, hi), log_uniform(rng, lo, hi), true});
      accepted[j] = u(rng) < 0.5;
    }
    const auto g = star_graph(accepted);
    const auto cfg = prior_config(0.001 + 0.998 * u(rng));
    const double fast = score_user(g, rates, 0, cfg).p_fake;
    const double slow = product_form_posterior(g, rates, 0, cfg);
    worst = std::max(worst, std::abs(fast - slow));
  }
  const double secs = seconds_since(start);
  return {worst < 1e-9 && secs < 5.0,
          fmt("%d instances, max |log-space - product| = %.3g (< 1e-9), %.2f s (< 5 s)", trials, worst, secs)};
}

Outcome criterion_2() {
  // Independent hand evaluation: numerator 0.05*0.5*0.2 = 0.005,
  // denominator 0.005 + 0.95*0.9*0.1 = 0.0905.
  const double hand = 0.005 / 0.0905;
  RateTable rates;
  rates.targets = {TargetRates{}, TargetRates{0.2, 0.1, 0.5, 0.9, true}};
  const double p = score_user(star_graph({true}), rates, 0, prior_config(0.05)).p_fake;
  const bool ok = std::abs(p - hand) < 1e-6 && std::abs(p - 0.05525) < 1e-5;
  return {ok, fmt("p = %.10f, hand value 0.005/0.0905 = %.10f", p, hand)};
}

Outcome criterion_3() {
  // Real scenario, trained rates; then 100 indiscriminate targets are added
  // and every unknown user requests all of them.
  auto cfg = base_scenario(Generator::ErdosRenyi, 1);
  cfg.n = 2000;
  const auto s = build_scenario(cfg);
  RateOptions ro;
  ro.sigma = ConfidencePriors::uniform(kDefaultSigma);
  ro.phi = ConfidencePriors::uniform(kDefaultPhi);
  const auto rates = build_rate_table(s.graph, s.training, ro);
  const auto users = split_known_unknown(s.training).unknown;
  const auto sc = prior_config(known_fake_fraction(s.training));
  const auto before = score_users(s.graph, rates, users, sc);

  const std::size_t extra = 100;
  const std::size_t n = cfg.n + extra;
  std::vector<RequestEdge> edges(s.graph.edges().begin(), s.graph.edges().end());
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.01, 0.99);
  auto grown = rates;
  for (std::size_t k = 0; k < extra; ++k) {
    const double r = u(rng), a = u(rng);
    grown.targets.push_back(TargetRates{r, r, a, a, true});
  }
  for (const auto v : users) {
    for (std::size_t k = 0; k < extra; ++k) {
      edges.push_back({v, static_cast<NodeId>(cfg.n + k), u(rng) < 0.5});
    }
  }
  const auto g2 = RequestGraph::build(n, edges);
  const auto after = score_users(g2, grown, users, sc);
  double worst = 0.0;
  for (std::size_t i = 0; i < users.size(); ++i) {
    worst = std::max(worst, std::abs(after.users[i].p_fake - before.users[i].p_fake));
  }
  return {worst <= 1e-12, fmt("%zu users x %zu added edges, max |delta p| = %.3g (<= 1e-12)", users.size(), extra, worst)};
}

Outcome criterion_4() {
  std::mt19937_64 rng(404);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst_sum = 0.0;
  bool raw_exact = true, monotone = true;
  const std::vector<double> grid{0.0, 0.5, 2.0, 10.0, 100.0, 1e4, 1e6};
  for (int t = 0; t < 200; ++t) {
    const std::size_t n = 5 + rng() % 60;
    TargetCounts c(n);
    for (std::size_t j = 0; j < n; ++j) {
      if (u(rng) < 0.1) continue;
      c.received_fake[j] = std::floor(u(rng) * 20.0) + (u(rng) < 0.5 ? u(rng) : 0.0);
      c.received_real[j] = std::floor(u(rng) * 200.0) + 1.0;
      c.accepted_fake[j] = c.received_fake[j] * u(rng);
      c.accepted_real[j] = c.received_real[j] * u(rng);
      c.sent_fake += c.received_fake[j];
      c.sent_real += c.received_real[j];
    }
    if (c.sent_fake == 0.0) continue;
    for (const double sigma : grid) {
      const auto r = estimate_selection_rates(c, ConfidencePriors::uniform(sigma), 0.0);
      double ss = 0.0, sb = 0.0;
      for (const auto& x : r) {
        ss += x.fake;
        sb += x.real;
      }
      worst_sum = std::max({worst_sum, std::abs(ss - 1.0), std::abs(sb - 1.0)});
    }
    const auto a0 = estimate_accept_rates(c, ConfidencePriors::uniform(0.0), 0.0);
    const auto r0 = estimate_selection_rates(c, ConfidencePriors::uniform(0.0), 0.0);
    for (std::size_t j = 0; j < n; ++j) {
      if (c.received_fake[j] > 0.0) {
        raw_exact &= a0[j].fake == c.accepted_fake[j] / c.received_fake[j];
        raw_exact &= r0[j].fake == c.received_fake[j] / c.sent_fake;
      }
      if (c.received_real[j] > 0.0) {
        raw_exact &= a0[j].real == c.accepted_real[j] / c.received_real[j];
        raw_exact &= r0[j].real == c.received_real[j] / c.sent_real;
      }
    }
    std::vector<double> last_a(n, std::numeric_limits<double>::infinity()), last_r = last_a;
    for (const double prior : grid) {
      const auto a = estimate_accept_rates(c, ConfidencePriors::uniform(prior), 0.0);
      const auto r = estimate_selection_rates(c, ConfidencePriors::uniform(prior), 0.0);
      for (std::size_t j = 0; j < n; ++j) {
        const double ga = std::abs(a[j].fake - a[j].real), gr = std::abs(r[j].fake - r[j].real);
        monotone &= ga <= last_a[j] + 1e-15 && gr <= last_r[j] + 1e-15;
        last_a[j] = ga;
        last_r[j] = gr;
      }
    }
  }
  return {worst_sum < 1e-9 && raw_exact && monotone,
          fmt("max |sum r - 1| = %.3g (< 1e-9), raw ratios exact: %s, shrinkage monotone: %s", worst_sum,
              raw_exact ? "yes" : "no", monotone ? "yes" : "no")};
}

Outcome criterion_5() {
  std::mt19937_64 rng(505);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst = 0.0;
  for (int t = 0; t < 100; ++t) {
    const std::size_t n = 2 + rng() % 1999;
    const int levels = t % 4 == 0 ? 0 : (t % 4 == 1 ? 2 : 10);  // 0: continuous scores
    std::vector<double> s(n);
    std::vector<std::uint8_t> y(n);
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = levels == 0 ? u(rng) : static_cast<double>(rng() % levels);
      y[i] = u(rng) < 0.2 ? 1 : 0;
    }
    y[0] = 1;
    y[1] = 0;
    worst = std::max(worst, std::abs(roc_auc(s, y) - oracle::pairwise_auc(s, y)));
  }
  return {worst <= 1e-12, fmt("100 instances, max |rank AUC - pairwise AUC| = %.3g (<= 1e-12)", worst)};
}

struct GeneratorRun {
  std::vector<double> se;   // per seed
  std::vector<double> rr;
  double max_seconds = 0.0;  // slowest scenario: build + train + score
};

std::vector<GeneratorRun> run_clean(double fraction_fake) {
  std::vector<GeneratorRun> out;
  for (const auto g : kGenerators) {
    GeneratorRun r;
    for (const auto seed : kSeeds) {
      auto cfg = base_scenario(g, seed);
      cfg.fraction_fake = fraction_fake;
      const auto start = Clock::now();
      const auto s = build_scenario(cfg);
      r.se.push_back(auc_on_unknown(s, s.training, Method::SybilEdge));
      r.max_seconds = std::max(r.max_seconds, seconds_since(start));
      r.rr.push_back(auc_on_unknown(s, s.training, Method::RejectRate));
    }
    out.push_back(std::move(r));
  }
  return out;
}

Outcome criterion_6(const std::vector<GeneratorRun>& clean) {
  bool ok = true;
  std::string detail;
  for (std::size_t k = 0; k < kGenerators.size(); ++k) {
    const double m = mean(clean[k].se);
    ok &= m >= 0.95 && clean[k].max_seconds < 30.0;
    detail += fmt("%s %.4f (%.2f s max); ", std::string(to_string(kGenerators[k])).c_str(), m, clean[k].max_seconds);
  }
  return {ok, "mean SybilEdge AUC (>= 0.95): " + detail};
}

Outcome criterion_7() {
  // Fake senders draw attraction weights from a much more concentrated
  // Gamma than reals, and most real targets answer both classes alike.
  std::vector<double> se, tr, rr;
  int ordered_seeds = 0;
  for (const auto seed : kSeeds) {
    auto cfg = base_scenario(Generator::PreferentialAttachment, seed);
    cfg.pa_mode = AttractionMode::Independent;
    cfg.pa_shape_fake = 0.1;
    cfg.pa_shape_real = 1.0;
    cfg.profiles.real_indifferent_fraction = 0.9;
    const auto s = build_scenario(cfg);
    se.push_back(auc_on_unknown(s, s.training, Method::SybilEdge));
    tr.push_back(auc_on_unknown(s, s.training, Method::SybilEdgeTR));
    rr.push_back(auc_on_unknown(s, s.training, Method::RejectRate));
    ordered_seeds += se.back() >= tr.back() && tr.back() >= rr.back();
  }
  // The criterion is on the 5-seed means; single seeds are reported only.
  const double mse = mean(se), mtr = mean(tr), mrr = mean(rr);
  return {mse >= mtr && mtr >= mrr,
          fmt("means SE %.4f >= TR %.4f >= RR %.4f (gaps %.4f, %.4f); ordered on %d of %zu single seeds", mse,
              mtr, mrr, mse - mtr, mtr - mrr, ordered_seeds, kSeeds.size())};
}

// Same scenario with the default profiles, for the record.
std::string criterion_7_default_profiles() {
  std::vector<double> se, tr, rr;
  for (const auto seed : kSeeds) {
    const auto s = build_scenario(base_scenario(Generator::PreferentialAttachment, seed));
    se.push_back(auc_on_unknown(s, s.training, Method::SybilEdge));
    tr.push_back(auc_on_unknown(s, s.training, Method::SybilEdgeTR));
    rr.push_back(auc_on_unknown(s, s.training, Method::RejectRate));
  }
  return fmt("default profiles: SE %.4f, TR %.4f, RR %.4f", mean(se), mean(tr), mean(rr));
}

Outcome criterion_8(const std::vector<GeneratorRun>& clean) {
  bool ok = true;
  std::string detail;
  SweepOptions opt;
  opt.methods = {Method::SybilEdge};
  opt.seeds = kSeeds;
  const std::vector<double> flips{0.3};
  for (std::size_t k = 0; k < kGenerators.size(); ++k) {
    const auto report = run_noise_sweep(base_scenario(kGenerators[k], 1), flips, opt);
    const double noisy = report.summary.at(0).mean_auc;
    const double base = mean(clean[k].se);
    const double rr = mean(clean[k].rr);
    const bool pass = base - noisy < 0.15 && noisy > rr;
    ok &= pass;
    detail += fmt("%s clean %.4f, 30%% flips %.4f (drop %.4f), clean RejectRate %.4f; ",
                  std::string(to_string(kGenerators[k])).c_str(), base, noisy, base - noisy, rr);
  }
  return {ok, detail};
}

Outcome criterion_9(const std::vector<GeneratorRun>& at5) {
  const auto at10 = run_clean(0.10);
  bool ok = true;
  std::string detail;
  for (std::size_t k = 0; k < kGenerators.size(); ++k) {
    const double a = mean(at5[k].se), b = mean(at10[k].se);
    ok &= b >= a - 0.02;
    detail += fmt("%s 5%% %.4f, 10%% %.4f; ", std::string(to_string(kGenerators[k])).c_str(), a, b);
  }
  return {ok, detail};
}

Outcome criterion_10() {
  // Exactly k requests per user with every user unknown, so the visit
  // counter should equal |E|.
  auto make = [](std::size_t n, std::size_t k, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::vector<RequestEdge> edges;
    edges.reserve(n * k);
    std::vector<NodeId> picked;
    for (NodeId s = 0; s < n; ++s) {
      picked.clear();
      while (picked.size() < k) {
        const auto t = static_cast<NodeId>(rng() % n);
        if (t == s || std::find(picked.begin(), picked.end(), t) != picked.end()) continue;
        picked.push_back(t);
        edges.push_back({s, t, (rng() & 3) != 0});
      }
    }
    return RequestGraph::build(n, edges);
  };
  auto rates_for = [](std::size_t n) {
    RateTable t;
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.01, 0.99);
    for (std::size_t j = 0; j < n; ++j) t.targets.push_back(TargetRates{u(rng), u(rng), u(rng), u(rng), true});
    return t;
  };
  auto time_scoring = [](const RequestGraph& g, const RateTable& r, std::uint64_t& visited) {
    std::vector<NodeId> users(g.num_nodes());
    std::iota(users.begin(), users.end(), NodeId{0});
    double best = std::numeric_limits<double>::infinity();
    for (int rep = 0; rep < 9; ++rep) {
      const auto start = Clock::now();
      const auto t = score_users(g, r, users, prior_config(0.05));
      best = std::min(best, seconds_since(start));
      visited = t.edges_visited;
    }
    return best;
  };
  const auto small = make(10000, 10, 1), large = make(100000, 10, 2);
  std::uint64_t v_small = 0, v_large = 0;
  const double t_small = time_scoring(small, rates_for(10000), v_small);
  const double t_large = time_scoring(large, rates_for(100000), v_large);
  const double ratio = t_large / t_small;
  const bool linear = v_small == small.num_edges() && v_large == large.num_edges() && v_large == 10 * v_small;
  return {ratio <= 20.0 && linear,
          fmt("|E| %zu -> %zu: time %.4f s -> %.4f s (x%.2f, <= 20), edges visited %llu -> %llu (exactly x10: %s)",
              small.num_edges(), large.num_edges(), t_small, t_large, ratio,
              static_cast<unsigned long long>(v_small), static_cast<unsigned long long>(v_large),
              linear ? "yes" : "no")};
}

Outcome criterion_11() {
  std::vector<std::string> failures;
  auto expect = [&](bool cond, const char* what) {
    if (!cond) failures.emplace_back(what);
  };
  auto code_of = [](const std::function<void()>& fn) -> std::optional<ErrorCode> {
    try {
      fn();
    } catch (const Error& e) {
      return e.code();
    }
    return std::nullopt;
  };

  // 0 -> 1 accepted, 2 -> 1 rejected; node 3 sends nothing; 4 -> 5 goes to an unrated target.
  const std::vector<RequestEdge> edges{{0, 1, true}, {2, 1, false}, {4, 5, true}};
  const auto g = RequestGraph::build(6, edges);
  const LabelTable training({1.0, std::nullopt, 0.0, std::nullopt, std::nullopt, std::nullopt});
  RateOptions ro;
  ro.sigma = ConfidencePriors::uniform(kDefaultSigma);
  ro.phi = ConfidencePriors::uniform(kDefaultPhi);
  const auto rates = build_rate_table(g, training, ro);

  expect(score_user(g, rates, 3, prior_config(0.05)).p_fake == 0.05, "zero-request user keeps the prior");
  expect(score_user(g, rates, 0, prior_config(0.0)).p_fake == 0.0, "prior 0 passes through");
  expect(score_user(g, rates, 0, prior_config(1.0)).p_fake == 1.0, "prior 1 passes through");
  expect(!rates[5].informative, "target without labeled requests is non-informative");
  const auto u4 = score_user(g, rates, 4, prior_config(0.05));
  expect(u4.p_fake == 0.05 && u4.edges_used == 0, "non-informative target contributes nothing");

  const LabelTable all_known({1.0, 0.0, 0.0, 0.0, 1.0, 0.0});
  expect(score_all(g, rates, all_known, prior_config(0.05)).users.empty(), "empty test set gives an empty table");

  expect(code_of([] { roc_auc(std::vector<double>{0.1, 0.9}, std::vector<std::uint8_t>{1, 1}); }) ==
             ErrorCode::SingleClass,
         "single-class AUC raises SingleClass");
  expect(code_of([] { build_rate_table(RequestGraph::build(2, {}), LabelTable({1.0, 0.0}), RateOptions{}); }) ==
             ErrorCode::EmptyTrainingSet,
         "no labeled requests raises EmptyTrainingSet");
  expect(code_of([&] { score_user(g, rates, 99, prior_config(0.5)); }) == ErrorCode::UnknownNode,
         "out-of-range user raises UnknownNode");
  expect(reject_rate(g, 3) == 0.0, "zero-request reject rate is 0");

  std::string detail = failures.empty() ? "10 checks" : "failed:";
  for (const auto& f : failures) detail += " [" + f + "]";
  return {failures.empty(), detail};
}

}  // namespace

int main() {
  int failed = 0;
  auto report = [&](int id, const Outcome& o) {
    std::printf("criterion %2d: %s  %s\n", id, o.pass ? "PASS" : "FAIL", o.detail.c_str());
    std::fflush(stdout);
    if (!o.pass) ++failed;
  };
  auto guarded = [&](int id, const std::function<Outcome()>& fn) {
    try {
      report(id, fn());
    } catch (const std::exception& e) {
      report(id, Outcome{false, std::string("exception: ") + e.what()});
    }
  };

  guarded(1, criterion_1);
  guarded(2, criterion_2);
  guarded(3, criterion_3);
  guarded(4, criterion_4);
  guarded(5, criterion_5);

  std::vector<GeneratorRun> clean;
  try {
    clean = run_clean(0.05);
  } catch (const std::exception& e) {
    std::printf("scenario runs failed: %s\n", e.what());
  }
  if (clean.size() == kGenerators.size()) {
    guarded(6, [&] { return criterion_6(clean); });
    guarded(7, criterion_7);
    std::printf("    note: %s\n", criterion_7_default_profiles().c_str());
    guarded(8, [&] { return criterion_8(clean); });
    guarded(9, [&] { return criterion_9(clean); });
  } else {
    for (int id = 6; id <= 9; ++id) report(id, Outcome{false, "scenario runs failed"});
  }
  guarded(10, criterion_10);
  guarded(11, criterion_11);

  std::printf("%d of 11 criteria failed\n", failed);
  return failed == 0 ? 0 : 1;
}
