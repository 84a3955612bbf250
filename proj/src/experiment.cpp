#include "sybiledge/experiment.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "sybiledge/error.hpp"
#include "sybiledge/io.hpp"
#include "sybiledge/rates.hpp"
#include "sybiledge/scorer.hpp"

namespace sybiledge {

using io::format_double;

std::string_view to_string(Method m) {
  switch (m) {
    case Method::SybilEdge: return "sybiledge";
    case Method::SybilEdgeTR: return "sybiledge_tr";
    case Method::RejectRate: return "reject_rate";
    case Method::SybilRank: return "sybil_rank";
    case Method::SybilScarC: return "sybil_scar_c";
  }
  return "sybiledge";
}

Method parse_method(std::string_view text) {
  for (const auto m : {Method::SybilEdge, Method::SybilEdgeTR, Method::RejectRate, Method::SybilRank,
                       Method::SybilScarC}) {
    if (text == to_string(m)) return m;
  }
  throw Error(ErrorCode::ParseError, "unknown method '" + std::string(text) + "'");
}

double known_fake_fraction(const LabelTable& labels) {
  double sum = 0.0;
  std::size_t known = 0;
  for (const auto& l : labels.values()) {
    if (!l) continue;
    sum += *l;
    ++known;
  }
  if (known == 0) throw Error(ErrorCode::EmptyTrainingSet, "no labeled users");
  return sum / static_cast<double>(known);
}

std::vector<double> run_method(Method method, const RequestGraph& graph, const LabelTable& training,
                               std::span<const NodeId> test_nodes, const MethodOptions& options) {
  std::vector<double> scores;
  scores.reserve(test_nodes.size());
  switch (method) {
    case Method::SybilEdge:
    case Method::SybilEdgeTR: {
      const bool tr = method == Method::SybilEdgeTR;
      RateOptions ro;
      ro.sigma = ConfidencePriors::uniform(tr ? std::numeric_limits<double>::infinity() : options.sigma);
      ro.phi = ConfidencePriors::uniform(options.phi);
      ro.clamp_eps = options.clamp_eps;
      const auto rates = build_rate_table(graph, training, ro);
      ScoringConfig sc;
      sc.prior = Prior::global(options.prior ? *options.prior : known_fake_fraction(training));
      sc.variant = tr ? Variant::ResponseOnly : Variant::Full;
      sc.clamp_eps = options.clamp_eps;
      sc.threads = options.threads;
      // Ranking uses log-odds: posteriors saturate at 0/1 in double precision
      // for long request lists, which would manufacture ties.
      for (const auto& u : score_users(graph, rates, test_nodes, sc).users) scores.push_back(u.log_odds);
      break;
    }
    case Method::RejectRate:
      for (const auto v : test_nodes) scores.push_back(reject_rate(graph, v));
      break;
    case Method::SybilRank: {
      std::vector<NodeId> seeds;
      for (NodeId v = 0; v < training.size(); ++v) {
        if (training[v] && *training[v] < 0.5) seeds.push_back(v);
      }
      const auto friends = FriendshipGraph::from_requests(graph);
      const auto iterations = options.rank_iterations ? *options.rank_iterations
                                                      : default_sybil_rank_iterations(graph.num_nodes());
      const auto trust = sybil_rank(friends, seeds, iterations);
      for (const auto v : test_nodes) scores.push_back(-trust.normalized_trust[v]);
      break;
    }
    case Method::SybilScarC: {
      const auto friends = FriendshipGraph::from_requests(graph);
      const auto posterior = sybil_scar_c(friends, training, options.scar);
      for (const auto v : test_nodes) scores.push_back(posterior[v]);
      break;
    }
  }
  return scores;
}

std::vector<PointResult> evaluate_scenario(const Scenario& scenario, const LabelTable& training,
                                           const std::vector<Method>& methods,
                                           const MethodOptions& options,
                                           const BucketScheme& buckets) {
  const auto test = split_known_unknown(training).unknown;
  std::vector<PointResult> out;
  for (const auto m : methods) {
    const auto start = std::chrono::steady_clock::now();
    const auto scores = run_method(m, scenario.graph, training, test, options);
    const auto stop = std::chrono::steady_clock::now();
    PointResult r;
    r.method = m;
    r.auc = evaluate_bucketed(scenario.graph, test, scores, scenario.truth, buckets);
    r.runtime_ms = std::chrono::duration<double, std::milli>(stop - start).count();
    out.push_back(std::move(r));
  }
  return out;
}

namespace {

using Params = std::vector<std::pair<std::string, std::string>>;

struct Task {
  Params params;
  SynthConfig config;
  std::optional<double> flip;
  std::uint64_t seed = 0;
};

// Runs tasks on up to `threads` workers; results keep task order.
std::vector<std::vector<PointResult>> run_tasks(const std::vector<Task>& tasks,
                                                const SweepOptions& options) {
  std::vector<std::vector<PointResult>> results(tasks.size());
  std::vector<std::exception_ptr> errors(tasks.size());
  std::atomic<std::size_t> next{0};

  auto worker = [&] {
    for (;;) {
      const auto t = next.fetch_add(1);
      if (t >= tasks.size()) return;
      try {
        const auto& task = tasks[t];
        const auto scenario = build_scenario(task.config);
        LabelTable training = scenario.training;
        if (task.flip && *task.flip > 0.0) {
          training = inject_label_noise(scenario.training, *task.flip,
                                        task.seed * 1000003ULL + static_cast<std::uint64_t>(*task.flip * 1e6));
        }
        auto cells = evaluate_scenario(scenario, training, options.methods, options.method_options,
                                       options.buckets);
        for (auto& c : cells) {
          c.params = task.params;
          c.seed = task.seed;
        }
        results[t] = std::move(cells);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    }
  };

  const auto workers = std::max<std::size_t>(1, std::min<std::size_t>(options.threads, tasks.size()));
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return results;
}

std::vector<SummaryRow> summarize(const std::vector<PointResult>& points) {
  std::vector<SummaryRow> rows;
  std::map<std::pair<Params, Method>, std::size_t> index;
  std::vector<std::vector<double>> samples;
  for (const auto& p : points) {
    const auto key = std::make_pair(p.params, p.method);
    auto it = index.find(key);
    if (it == index.end()) {
      it = index.emplace(key, rows.size()).first;
      rows.push_back({p.params, p.method, 0, 0.0, 0.0});
      samples.emplace_back();
    }
    if (p.auc.overall) samples[it->second].push_back(*p.auc.overall);
  }
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const auto& s = samples[r];
    rows[r].n_seeds = s.size();
    if (s.empty()) {
      rows[r].mean_auc = std::nan("");
      continue;
    }
    double mean = 0.0;
    for (const double x : s) mean += x;
    mean /= static_cast<double>(s.size());
    double var = 0.0;
    for (const double x : s) var += (x - mean) * (x - mean);
    rows[r].mean_auc = mean;
    rows[r].stdev_auc = s.size() > 1 ? std::sqrt(var / static_cast<double>(s.size() - 1)) : 0.0;
  }
  return rows;
}

Params base_config_echo(const SynthConfig& c, const SweepOptions& o) {
  Params echo{
      {"n", std::to_string(c.n)},
      {"fraction_fake", format_double(c.fraction_fake)},
      {"fraction_known", format_double(c.fraction_known)},
      {"stratified_split", c.stratified_split ? "true" : "false"},
      {"generator", std::string(to_string(c.generator))},
      {"mean_degree", format_double(c.mean_degree)},
      {"degree_exponent", format_double(c.degree_exponent)},
      {"degree_cap", std::to_string(c.degree_cap)},
      {"sbm_real_ratio", format_double(c.sbm_real_ratio)},
      {"sbm_fake_ratio", format_double(c.sbm_fake_ratio)},
      {"pa_mode", std::string(to_string(c.pa_mode))},
      {"pa_shape_real", format_double(c.pa_shape_real)},
      {"pa_shape_fake", format_double(c.pa_shape_fake)},
      {"profile_real_accepts_real", c.profiles.real_accepts_real.to_string()},
      {"profile_real_accepts_fake", c.profiles.real_accepts_fake.to_string()},
      {"profile_fake_accepts_real", c.profiles.fake_accepts_real.to_string()},
      {"profile_fake_accepts_fake", c.profiles.fake_accepts_fake.to_string()},
      {"profile_real_indifferent", format_double(c.profiles.real_indifferent_fraction)},
      {"sigma", format_double(o.method_options.sigma)},
      {"phi", format_double(o.method_options.phi)},
      {"clamp_eps", format_double(o.method_options.clamp_eps)},
      {"buckets", o.buckets.to_string()},
  };
  if (o.method_options.prior) echo.emplace_back("prior", format_double(*o.method_options.prior));
  std::string methods;
  for (const auto m : o.methods) methods += (methods.empty() ? "" : ",") + std::string(to_string(m));
  echo.emplace_back("methods", methods);
  return echo;
}

ExperimentReport assemble(std::string kind, Params echo, const SweepOptions& options,
                          std::vector<std::vector<PointResult>> cells) {
  ExperimentReport report;
  report.kind = std::move(kind);
  report.config = std::move(echo);
  report.seeds = options.seeds;
  report.include_timing = options.include_timing;
  for (auto& c : cells) {
    for (auto& p : c) report.points.push_back(std::move(p));
  }
  report.summary = summarize(report.points);
  return report;
}

}  // namespace

ExperimentReport run_noise_sweep(const SynthConfig& base, std::span<const double> flip_probs,
                                 const SweepOptions& options) {
  std::vector<Task> tasks;
  for (const double flip : flip_probs) {
    for (const auto seed : options.seeds) {
      Task t;
      t.params = {{"flip_prob", format_double(flip)}};
      t.config = base;
      t.config.seed = seed;
      t.flip = flip;
      t.seed = seed;
      tasks.push_back(std::move(t));
    }
  }
  auto echo = base_config_echo(base, options);
  std::string flips;
  for (const double f : flip_probs) flips += (flips.empty() ? "" : ",") + format_double(f);
  echo.emplace_back("flip_probs", flips);
  return assemble("noise", std::move(echo), options, run_tasks(tasks, options));
}

ExperimentReport run_generator_sweep(const SynthConfig& base, const GeneratorGrid& grid,
                                     const SweepOptions& options) {
  std::vector<Task> tasks;
  for (const auto g : grid.generators) {
    for (const double d : grid.mean_degrees) {
      for (const double f : grid.fake_fractions) {
        for (const auto seed : options.seeds) {
          Task t;
          t.params = {{"generator", std::string(to_string(g))},
                      {"mean_degree", format_double(d)},
                      {"fraction_fake", format_double(f)}};
          t.config = base;
          t.config.generator = g;
          t.config.mean_degree = d;
          t.config.er_edge_prob.reset();
          t.config.fraction_fake = f;
          t.config.seed = seed;
          t.seed = seed;
          tasks.push_back(std::move(t));
        }
      }
    }
  }
  return assemble("grid", base_config_echo(base, options), options, run_tasks(tasks, options));
}

std::string ExperimentReport::to_json() const {
  using nlohmann::ordered_json;
  auto num = [](double x) -> ordered_json {
    if (std::isfinite(x)) return x;
    return format_double(x);
  };
  auto opt = [&](const std::optional<double>& x) -> ordered_json {
    return x ? num(*x) : ordered_json(nullptr);
  };
  auto params_json = [](const Params& p) {
    ordered_json j = ordered_json::object();
    for (const auto& [k, v] : p) j[k] = v;
    return j;
  };

  ordered_json root;
  if (!header.empty()) root["header"] = header;
  root["kind"] = kind;
  root["config"] = params_json(config);
  root["seeds"] = seeds;
  ordered_json pts = ordered_json::array();
  for (const auto& p : points) {
    ordered_json j;
    j["params"] = params_json(p.params);
    j["seed"] = p.seed;
    j["method"] = std::string(to_string(p.method));
    j["n_fakes"] = p.auc.n_fakes;
    j["n_reals"] = p.auc.n_reals;
    j["overall_auc"] = opt(p.auc.overall);
    ordered_json buckets = ordered_json::array();
    for (const auto& b : p.auc.buckets) {
      buckets.push_back({{"bucket", b.bucket.label()},
                         {"n_fakes", b.n_fakes},
                         {"n_reals", b.n_reals},
                         {"auc", opt(b.auc)}});
    }
    j["buckets"] = std::move(buckets);
    if (include_timing) j["runtime_ms"] = p.runtime_ms;
    pts.push_back(std::move(j));
  }
  root["points"] = std::move(pts);
  ordered_json sum = ordered_json::array();
  for (const auto& s : summary) {
    sum.push_back({{"params", params_json(s.params)},
                   {"method", std::string(to_string(s.method))},
                   {"n_seeds", s.n_seeds},
                   {"mean_auc", num(s.mean_auc)},
                   {"stdev_auc", num(s.stdev_auc)}});
  }
  root["summary"] = std::move(sum);
  return root.dump(2) + "\n";
}

std::string ExperimentReport::to_tsv() const {
  std::ostringstream os;
  std::vector<std::string> keys;
  if (!points.empty()) {
    for (const auto& [k, v] : points.front().params) keys.push_back(k);
  }
  os << '#';
  for (const auto& k : keys) os << k << '\t';
  os << "seed\tmethod\tbucket\tn_fakes\tn_reals\tauc";
  if (include_timing) os << "\truntime_ms";
  os << '\n';
  auto auc_text = [](const std::optional<double>& a) { return a ? format_double(*a) : std::string("NA"); };
  for (const auto& p : points) {
    auto prefix = [&] {
      for (const auto& [k, v] : p.params) os << v << '\t';
      os << p.seed << '\t' << to_string(p.method) << '\t';
    };
    auto suffix = [&] {
      if (include_timing) os << '\t' << format_double(p.runtime_ms);
      os << '\n';
    };
    for (const auto& b : p.auc.buckets) {
      prefix();
      os << b.bucket.label() << '\t' << b.n_fakes << '\t' << b.n_reals << '\t' << auc_text(b.auc);
      suffix();
    }
    prefix();
    os << "all\t" << p.auc.n_fakes << '\t' << p.auc.n_reals << '\t' << auc_text(p.auc.overall);
    suffix();
  }
  return os.str();
}

}  // namespace sybiledge
