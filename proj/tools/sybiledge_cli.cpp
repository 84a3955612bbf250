#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "sybiledge/baselines.hpp"
#include "sybiledge/config.hpp"
#include "sybiledge/error.hpp"
#include "sybiledge/evaluation.hpp"
#include "sybiledge/experiment.hpp"
#include "sybiledge/io.hpp"
#include "sybiledge/rates.hpp"
#include "sybiledge/scorer.hpp"
#include "sybiledge/synth.hpp"

namespace fs = std::filesystem;
using namespace sybiledge;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;

// Bad flags, bad config files: exit code 1.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

using Echo = std::vector<std::pair<std::string, std::string>>;

struct Context {
  std::string command_line;
  unsigned threads = 1;
};

std::string header(const Context& ctx, std::optional<std::uint64_t> seed, const Echo& config) {
  std::string h = io::provenance_header(ctx.command_line, seed);
  if (!config.empty()) {
    h += "# config:";
    for (const auto& [k, v] : config) h += " " + k + "=" + v;
    h += "\n";
  }
  return h;
}

std::ofstream open_output(const std::string& path) {
  const auto parent = fs::path(path).parent_path();
  if (!parent.empty()) fs::create_directories(parent);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw UsageError("cannot write '" + path + "'");
  return out;
}

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open '" + path + "'");
  return in;
}

double parse_number_flag(const std::string& flag, const std::string& text) {
  try {
    return io::parse_double(text);
  } catch (const Error&) {
    throw UsageError(flag + ": '" + text + "' is not a number");
  }
}

BucketScheme parse_buckets(const std::string& text) {
  try {
    if (text == "fine") return BucketScheme::fine();
    if (text == "coarse") return BucketScheme::coarse();
    return BucketScheme::parse(text);
  } catch (const Error& e) {
    throw UsageError("--buckets: " + e.detail());
  }
}

// ---------------------------------------------------------------- generate

struct GenerateArgs {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out = ".";
  std::vector<std::string> overrides;
};

int cmd_generate(const Context& ctx, const GenerateArgs& a) {
  SynthConfig cfg;
  try {
    auto kv = KeyValueConfig::load(a.config);
    for (const auto& o : a.overrides) {
      const auto eq = o.find('=');
      if (eq == std::string::npos) throw UsageError("--set expects key=value, got '" + o + "'");
      kv.set(o.substr(0, eq), o.substr(eq + 1));
    }
    if (a.seed) kv.set("seed", std::to_string(*a.seed));
    cfg = synth_config_from(kv);
    kv.reject_unused();
  } catch (const Error& e) {
    throw UsageError(e.what());
  }

  const auto scenario = build_scenario(cfg);
  Echo echo{{"n", std::to_string(cfg.n)},
            {"fraction_fake", io::format_double(cfg.fraction_fake)},
            {"fraction_known", io::format_double(cfg.fraction_known)},
            {"stratified_split", cfg.stratified_split ? "true" : "false"},
            {"generator", std::string(to_string(cfg.generator))},
            {"mean_degree", io::format_double(cfg.mean_degree)}};
  if (cfg.er_edge_prob) echo.emplace_back("er_edge_prob", io::format_double(*cfg.er_edge_prob));
  echo.insert(echo.end(),
              {{"degree_exponent", io::format_double(cfg.degree_exponent)},
               {"degree_cap", std::to_string(cfg.degree_cap)},
               {"degree_rescale", cfg.degree_rescale ? "true" : "false"},
               {"sbm_real_ratio", io::format_double(cfg.sbm_real_ratio)},
               {"sbm_fake_ratio", io::format_double(cfg.sbm_fake_ratio)},
               {"pa_mode", std::string(to_string(cfg.pa_mode))},
               {"pa_shape_real", io::format_double(cfg.pa_shape_real)},
               {"pa_shape_fake", io::format_double(cfg.pa_shape_fake)},
               {"profile_real_accepts_real", cfg.profiles.real_accepts_real.to_string()},
               {"profile_real_accepts_fake", cfg.profiles.real_accepts_fake.to_string()},
               {"profile_fake_accepts_real", cfg.profiles.fake_accepts_real.to_string()},
               {"profile_fake_accepts_fake", cfg.profiles.fake_accepts_fake.to_string()},
               {"profile_real_indifferent", io::format_double(cfg.profiles.real_indifferent_fraction)},
               {"dropped_pairs", std::to_string(scenario.dropped_pairs)}});
  const auto h = header(ctx, cfg.seed, echo);
  const auto nodes = io::NodeDictionary::identity(cfg.n);

  fs::create_directories(a.out);
  {
    auto out = open_output((fs::path(a.out) / "edges.tsv").string());
    out << h << "# source\ttarget\tresponse\n";
    io::write_edges(out, scenario.graph, nodes);
  }
  {
    auto out = open_output((fs::path(a.out) / "truth.tsv").string());
    out << h;
    io::write_labels(out, scenario.truth, nodes);
  }
  {
    auto out = open_output((fs::path(a.out) / "training.tsv").string());
    out << h;
    io::write_labels(out, scenario.training, nodes);
  }
  std::cerr << "wrote " << scenario.graph.num_edges() << " requests over " << cfg.n << " nodes to "
            << a.out << "\n";
  return 0;
}

// ---------------------------------------------------------------- train

struct TrainArgs {
  std::string edges;
  std::string labels;
  std::string sigma = io::format_double(kDefaultSigma);
  std::string phi = io::format_double(kDefaultPhi);
  std::string sigma_file;
  std::string phi_file;
  double clamp_eps = kDefaultClampEpsilon;
  std::string out;
};

int cmd_train(const Context& ctx, const TrainArgs& a) {
  const double sigma = parse_number_flag("--sigma", a.sigma);
  const double phi = parse_number_flag("--phi", a.phi);
  if (!(sigma >= 0.0) || !(phi >= 0.0)) throw UsageError("--sigma and --phi must be >= 0");

  const std::vector<std::string> label_paths{a.labels};
  const auto ds = io::load_dataset(a.edges, label_paths);

  RateOptions opts;
  opts.clamp_eps = a.clamp_eps;
  opts.sigma = ConfidencePriors::uniform(sigma);
  opts.phi = ConfidencePriors::uniform(phi);
  if (!a.sigma_file.empty()) {
    auto in = open_input(a.sigma_file);
    opts.sigma = io::read_priors(in, a.sigma_file, ds.nodes, sigma);
  }
  if (!a.phi_file.empty()) {
    auto in = open_input(a.phi_file);
    opts.phi = io::read_priors(in, a.phi_file, ds.nodes, phi);
  }
  const auto rates = build_rate_table(ds.graph, ds.labels.front(), opts);

  Echo echo{{"sigma", io::format_double(sigma)}, {"phi", io::format_double(phi)},
            {"clamp_eps", io::format_double(a.clamp_eps)}};
  if (!a.sigma_file.empty()) echo.emplace_back("sigma_file", a.sigma_file);
  if (!a.phi_file.empty()) echo.emplace_back("phi_file", a.phi_file);
  auto out = open_output(a.out);
  out << header(ctx, std::nullopt, echo);
  io::write_rate_table(out, rates, ds.nodes);
  return 0;
}

// ---------------------------------------------------------------- score

struct ScoreArgs {
  std::string edges;
  std::string rates;
  std::string labels;
  std::string prior;
  std::string prior_file;
  std::string variant = "full";
  std::string method = "sybiledge";
  std::string explain;
  double clamp_eps = kDefaultClampEpsilon;
  std::optional<std::size_t> rank_iterations;
  std::optional<double> scar_weight;
  std::string out;
};

int cmd_score(const Context& ctx, const ScoreArgs& a) {
  Method method;
  Variant variant;
  try {
    method = parse_method(a.method);
    variant = parse_variant(a.variant);
  } catch (const Error& e) {
    throw UsageError(e.detail());
  }
  if (method == Method::SybilEdgeTR) variant = Variant::ResponseOnly;
  const bool sybiledge = method == Method::SybilEdge || method == Method::SybilEdgeTR;
  if (sybiledge && a.rates.empty()) throw UsageError("--rates is required for SybilEdge scoring");
  if (!sybiledge && a.labels.empty() && method != Method::RejectRate) {
    throw UsageError("--labels is required for " + std::string(to_string(method)));
  }
  std::optional<double> global_prior;
  if (!a.prior.empty()) {
    global_prior = parse_number_flag("--prior", a.prior);
    if (!(*global_prior >= 0.0 && *global_prior <= 1.0)) throw UsageError("--prior must lie in [0, 1]");
  }

  std::vector<std::string> label_paths;
  if (!a.labels.empty()) label_paths.push_back(a.labels);
  const auto ds = io::load_dataset(a.edges, label_paths);

  std::vector<NodeId> users;
  if (ds.labels.empty()) {
    users.resize(ds.nodes.size());
    for (NodeId v = 0; v < users.size(); ++v) users[v] = v;
  } else {
    users = split_known_unknown(ds.labels.front()).unknown;
  }

  Echo echo{{"method", std::string(to_string(method))}};
  auto out = open_output(a.out);

  if (!sybiledge) {
    MethodOptions mo;
    mo.rank_iterations = a.rank_iterations;
    if (a.scar_weight) mo.scar.weight = *a.scar_weight;
    const LabelTable training = ds.labels.empty() ? LabelTable(ds.nodes.size()) : ds.labels.front();
    const auto scores = run_method(method, ds.graph, training, users, mo);
    out << header(ctx, std::nullopt, echo);
    io::write_baseline_scores(out, users, scores, to_string(method), ds.nodes);
    return 0;
  }

  RateTable rates;
  {
    auto in = open_input(a.rates);
    rates = io::read_rate_table(in, a.rates, ds.nodes);
  }

  ScoringConfig sc;
  sc.variant = variant;
  sc.clamp_eps = a.clamp_eps;
  sc.explain = !a.explain.empty();
  sc.threads = ctx.threads;
  if (!a.prior_file.empty()) {
    std::vector<double> per_node(ds.nodes.size(), global_prior.value_or(0.5));
    auto in = open_input(a.prior_file);
    for (const auto& r : io::read_label_records(in, a.prior_file)) per_node[ds.nodes.id(r.node)] = r.p_fake;
    sc.prior = Prior::per_node(std::move(per_node));
    echo.emplace_back("prior_file", a.prior_file);
  } else {
    if (!global_prior) {
      if (ds.labels.empty()) throw UsageError("--prior is required when no --labels are given");
      global_prior = known_fake_fraction(ds.labels.front());
    }
    sc.prior = Prior::global(*global_prior);
    echo.emplace_back("prior", io::format_double(*global_prior));
  }
  echo.emplace_back("variant", std::string(to_string(variant)));
  echo.emplace_back("clamp_eps", io::format_double(a.clamp_eps));

  const auto scores = score_users(ds.graph, rates, users, sc);
  const auto h = header(ctx, std::nullopt, echo);
  out << h;
  io::write_scores(out, scores, ds.nodes);
  if (sc.explain) {
    auto ex = open_output(a.explain);
    ex << h;
    io::write_contributions(ex, scores, ds.nodes);
  }
  return 0;
}

// ---------------------------------------------------------------- eval

struct EvalArgs {
  std::vector<std::string> scores;
  std::string truth;
  std::string edges;
  std::string buckets = "fine";
  std::string out;
};

int cmd_eval(const Context& ctx, const EvalArgs& a) {
  const auto scheme = parse_buckets(a.buckets);
  const std::vector<std::string> label_paths{a.truth};
  const auto ds = io::load_dataset(a.edges, label_paths);
  const auto& truth = ds.labels.front();

  std::vector<std::string> names;
  std::vector<BucketedAuc> results;
  std::vector<NodeId> reference;
  for (const auto& path : a.scores) {
    io::ScoreFile file;
    {
      auto in = open_input(path);
      file = io::read_score_file(in, path);
    }
    std::vector<NodeId> nodes;
    std::vector<double> values;
    for (const auto& r : file.rows) {
      nodes.push_back(ds.nodes.id(r.node));
      values.push_back(r.score);
    }
    auto sorted = nodes;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
      throw Error(ErrorCode::InvalidArgument, path + ": a node is scored twice");
    }
    if (results.empty()) {
      reference = sorted;
    } else if (sorted != reference) {
      throw Error(ErrorCode::InvalidArgument, path + ": scores a different node set than " + a.scores.front());
    }
    names.push_back(file.method.empty() ? fs::path(path).stem().string() : file.method);
    results.push_back(evaluate_bucketed(ds.graph, nodes, values, truth, scheme));
  }

  Echo echo{{"buckets", scheme.to_string()}};
  auto out = open_output(a.out);
  out << header(ctx, std::nullopt, echo);
  out << "# bucket\tn_fakes\tn_reals";
  for (const auto& n : names) out << '\t' << n;
  out << '\n';
  auto text = [](const std::optional<double>& x) { return x ? io::format_double(*x) : std::string("NA"); };
  for (std::size_t b = 0; b < scheme.size(); ++b) {
    const auto& first = results.front().buckets[b];
    out << first.bucket.label() << '\t' << first.n_fakes << '\t' << first.n_reals;
    for (const auto& r : results) out << '\t' << text(r.buckets[b].auc);
    out << '\n';
  }
  out << "all\t" << results.front().n_fakes << '\t' << results.front().n_reals;
  for (const auto& r : results) out << '\t' << text(r.overall);
  out << '\n';
  return 0;
}

// ---------------------------------------------------------------- experiment

struct ExperimentArgs {
  std::string config;
  std::string out;
  std::vector<std::string> overrides;
  bool timing = false;
};

int cmd_experiment(const Context& ctx, const ExperimentArgs& a) {
  SweepConfig sweep;
  try {
    auto kv = KeyValueConfig::load(a.config);
    for (const auto& o : a.overrides) {
      const auto eq = o.find('=');
      if (eq == std::string::npos) throw UsageError("--set expects key=value, got '" + o + "'");
      kv.set(o.substr(0, eq), o.substr(eq + 1));
    }
    sweep = sweep_config_from(kv);
    kv.reject_unused();
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
  if (sweep.options.threads <= 1) sweep.options.threads = ctx.threads;
  if (a.timing) sweep.options.include_timing = true;

  auto report = run_experiment(sweep);
  const auto h = io::provenance_header(ctx.command_line, std::nullopt);
  report.header = h.substr(0, h.size() - 1);
  {
    auto out = open_output(a.out + ".json");
    out << report.to_json();
  }
  {
    auto out = open_output(a.out + ".tsv");
    out << h;
    out << "# config:";
    for (const auto& [k, v] : report.config) out << ' ' << k << '=' << v;
    out << '\n' << report.to_tsv();
  }
  for (const auto& s : report.summary) {
    for (const auto& [k, v] : s.params) std::cout << k << '=' << v << ' ';
    std::cout << to_string(s.method) << " mean_auc=" << io::format_double(s.mean_auc)
              << " stdev=" << io::format_double(s.stdev_auc) << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sybil detection from friend-request edges."};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(io::kVersion));

  Context ctx;
  for (int i = 0; i < argc; ++i) {
    if (i) ctx.command_line += ' ';
    ctx.command_line += i == 0 ? fs::path(argv[0]).filename().string() : argv[i];
  }
  app.add_option("--threads", ctx.threads, "Worker thread cap")->check(CLI::PositiveNumber);

  GenerateArgs gen;
  auto* g = app.add_subcommand("generate", "Build a synthetic scenario");
  g->add_option("--config", gen.config, "Scenario config (key = value)")->required()->check(CLI::ExistingFile);
  g->add_option("--seed", gen.seed, "Overrides the config seed");
  g->add_option("--out", gen.out, "Output directory");
  g->add_option("--set", gen.overrides, "Extra key=value entries");

  TrainArgs train;
  auto* t = app.add_subcommand("train", "Estimate per-target rates");
  t->add_option("--edges", train.edges)->required()->check(CLI::ExistingFile);
  t->add_option("--labels", train.labels)->required()->check(CLI::ExistingFile);
  t->add_option("--sigma", train.sigma, "Selection confidence prior (number or inf)")->capture_default_str();
  t->add_option("--phi", train.phi, "Accept confidence prior (number or inf)")->capture_default_str();
  t->add_option("--sigma-file", train.sigma_file, "Per-target sigma (target<TAB>value)")->check(CLI::ExistingFile);
  t->add_option("--phi-file", train.phi_file, "Per-target phi (target<TAB>value)")->check(CLI::ExistingFile);
  t->add_option("--clamp-eps", train.clamp_eps)->capture_default_str();
  t->add_option("--out", train.out)->required();

  ScoreArgs score;
  auto* s = app.add_subcommand("score", "Score users");
  s->add_option("--edges", score.edges)->required()->check(CLI::ExistingFile);
  s->add_option("--rates", score.rates, "Rate file from train")->check(CLI::ExistingFile);
  s->add_option("--labels", score.labels, "Training labels; only unlabeled users are scored")
      ->check(CLI::ExistingFile);
  s->add_option("--prior", score.prior, "Global prior fake probability");
  s->add_option("--prior-file", score.prior_file, "Per-user priors (node<TAB>p)")->check(CLI::ExistingFile);
  s->add_option("--variant", score.variant, "full, selection_only or response_only")->capture_default_str();
  s->add_option("--method", score.method,
                "sybiledge, sybiledge_tr, reject_rate, sybil_rank or sybil_scar_c")
      ->capture_default_str();
  s->add_option("--explain", score.explain, "Write per-edge contributions here");
  s->add_option("--clamp-eps", score.clamp_eps)->capture_default_str();
  s->add_option("--rank-iterations", score.rank_iterations);
  s->add_option("--scar-weight", score.scar_weight);
  s->add_option("--out", score.out)->required();

  EvalArgs eval;
  auto* e = app.add_subcommand("eval", "Bucketed AUC of score files");
  e->add_option("--scores", eval.scores)->required()->check(CLI::ExistingFile);
  e->add_option("--truth", eval.truth)->required()->check(CLI::ExistingFile);
  e->add_option("--edges", eval.edges, "Edge file (for out-degrees)")->required()->check(CLI::ExistingFile);
  e->add_option("--buckets", eval.buckets, "fine, coarse or LOW:HIGH,...,LOW:")->capture_default_str();
  e->add_option("--out", eval.out)->required();

  ExperimentArgs exp;
  auto* x = app.add_subcommand("experiment", "Run a sweep");
  x->add_option("--config", exp.config)->required()->check(CLI::ExistingFile);
  x->add_option("--out", exp.out, "Output prefix (.json and .tsv are appended)")->required();
  x->add_option("--set", exp.overrides, "Extra key=value entries");
  x->add_flag("--timing", exp.timing, "Include runtimes (output no longer byte-reproducible)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    const int code = app.exit(err);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (*g) return cmd_generate(ctx, gen);
    if (*t) return cmd_train(ctx, train);
    if (*s) return cmd_score(ctx, score);
    if (*e) return cmd_eval(ctx, eval);
    if (*x) return cmd_experiment(ctx, exp);
  } catch (const UsageError& err) {
    std::cerr << "error: " << err.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return kExitData;
  }
  return kExitUsage;
}
