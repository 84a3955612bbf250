#include "sybiledge/synth.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>
#include <unordered_set>

#include "sybiledge/error.hpp"

namespace sybiledge {

namespace {

std::uint64_t pair_key(NodeId s, NodeId t) { return (std::uint64_t{s} << 32) | t; }

void check_probability(double p, const char* what) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw Error(ErrorCode::InvalidArgument, std::string(what) + " must lie in [0, 1]");
  }
}

// Appends every candidate from `pool` (skipping `self`) independently with
// probability p, using geometric gaps instead of one coin per candidate.
void sample_bernoulli_subset(std::span<const NodeId> pool, NodeId self, double p, Rng& rng,
                             NodeId source, PairList& out) {
  if (p <= 0.0 || pool.empty()) return;
  if (p >= 1.0) {
    for (const auto t : pool) {
      if (t != self) out.emplace_back(source, t);
    }
    return;
  }
  std::geometric_distribution<long long> gap(p);
  long long pos = gap(rng);
  const auto size = static_cast<long long>(pool.size());
  while (pos < size) {
    const auto t = pool[pos];
    if (t != self) out.emplace_back(source, t);
    pos += 1 + gap(rng);
  }
}

}  // namespace

std::size_t ClassAssignment::num_fakes() const {
  return static_cast<std::size_t>(std::count(classes.begin(), classes.end(), NodeClass::Fake));
}

std::vector<NodeId> ClassAssignment::members(NodeClass c) const {
  std::vector<NodeId> out;
  for (NodeId v = 0; v < classes.size(); ++v) {
    if (classes[v] == c) out.push_back(v);
  }
  return out;
}

ClassAssignment assign_classes(std::size_t n, double fraction_fake, Rng& rng) {
  check_probability(fraction_fake, "fraction_fake");
  const auto fakes = static_cast<std::size_t>(std::llround(fraction_fake * static_cast<double>(n)));
  std::vector<NodeId> ids(n);
  std::iota(ids.begin(), ids.end(), NodeId{0});
  std::shuffle(ids.begin(), ids.end(), rng);
  ClassAssignment assignment;
  assignment.classes.assign(n, NodeClass::Real);
  for (std::size_t k = 0; k < fakes; ++k) assignment.classes[ids[k]] = NodeClass::Fake;
  return assignment;
}

PairList gen_erdos_renyi(std::size_t n, double edge_prob, Rng& rng) {
  if (!(edge_prob > 0.0 && edge_prob <= 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "edge probability must lie in (0, 1]");
  }
  std::vector<NodeId> all(n);
  std::iota(all.begin(), all.end(), NodeId{0});
  PairList pairs;
  pairs.reserve(static_cast<std::size_t>(edge_prob * static_cast<double>(n) * static_cast<double>(n > 0 ? n - 1 : 0) * 1.05) + 16);
  for (NodeId i = 0; i < n; ++i) sample_bernoulli_subset(all, i, edge_prob, rng, i, pairs);
  return pairs;
}

DegreeSampler DegreeSampler::power_law(double exponent, std::uint32_t cap,
                                       std::optional<double> target_mean) {
  if (cap < 1) throw Error(ErrorCode::InvalidArgument, "degree cap must be >= 1");
  DegreeSampler s;
  s.weights_.assign(cap + 1, 0.0);
  for (std::uint32_t d = 1; d <= cap; ++d) s.weights_[d] = std::pow(static_cast<double>(d), -exponent);
  if (target_mean && !(*target_mean >= 0.0)) throw Error(ErrorCode::InvalidArgument, "target mean must be >= 0");
  s.draw_ = std::discrete_distribution<std::uint32_t>(s.weights_.begin(), s.weights_.end());
  s.target_mean_ = target_mean;
  return s;
}

DegreeSampler DegreeSampler::histogram(std::vector<double> weights, std::optional<double> target_mean) {
  double total = 0.0;
  for (const double w : weights) {
    if (!(w >= 0.0)) throw Error(ErrorCode::InvalidArgument, "histogram weights must be >= 0");
    total += w;
  }
  if (!(total > 0.0)) throw Error(ErrorCode::DegenerateSequence, "degree histogram is empty");
  DegreeSampler s;
  s.weights_ = std::move(weights);
  s.draw_ = std::discrete_distribution<std::uint32_t>(s.weights_.begin(), s.weights_.end());
  s.target_mean_ = target_mean;
  return s;
}

double DegreeSampler::base_mean() const {
  double total = 0.0;
  double moment = 0.0;
  for (std::size_t d = 0; d < weights_.size(); ++d) {
    total += weights_[d];
    moment += weights_[d] * static_cast<double>(d);
  }
  return moment / total;
}

std::uint32_t DegreeSampler::operator()(Rng& rng) const {
  const auto x = draw_(rng);
  if (!target_mean_) return x;
  const double base = base_mean();
  if (base <= 0.0) return 0;
  const double scaled = (*target_mean_ / base) * static_cast<double>(x) + uniform01(rng);
  return static_cast<std::uint32_t>(std::floor(scaled));
}

ConfigurationGraph gen_configuration(std::size_t n, const DegreeSampler& degrees, Rng& rng,
                                     std::size_t max_retries) {
  ConfigurationGraph result;
  result.degrees.resize(n);
  std::size_t total = 0;
  for (auto& d : result.degrees) {
    d = degrees(rng);
    if (n > 0) d = std::min<std::uint32_t>(d, static_cast<std::uint32_t>(n - 1));
    total += d;
  }
  if (total == 0) throw Error(ErrorCode::DegenerateSequence, "every sampled degree is zero");

  std::vector<NodeId> out_stubs;
  out_stubs.reserve(total);
  for (NodeId v = 0; v < n; ++v) out_stubs.insert(out_stubs.end(), result.degrees[v], v);
  std::vector<NodeId> in_stubs = out_stubs;
  std::shuffle(in_stubs.begin(), in_stubs.end(), rng);

  std::unordered_set<std::uint64_t> used;
  used.reserve(total * 2);
  std::vector<char> dropped(total, 0);
  std::uniform_int_distribution<std::size_t> pick(0, total - 1);

  for (std::size_t k = 0; k < total; ++k) {
    auto fine = [&](NodeId s, NodeId t) { return s != t && !used.contains(pair_key(s, t)); };
    if (fine(out_stubs[k], in_stubs[k])) {
      used.insert(pair_key(out_stubs[k], in_stubs[k]));
      continue;
    }
    bool placed = false;
    for (std::size_t attempt = 0; attempt < max_retries && !placed && total > 1; ++attempt) {
      const auto m = pick(rng);
      if (m == k) continue;
      const NodeId sk = out_stubs[k], tk = in_stubs[m];
      const NodeId sm = out_stubs[m], tm = in_stubs[k];
      if (m > k || dropped[m]) {
        // Pair m is not materialized yet (or never will be); only k must be valid.
        if (!fine(sk, tk)) continue;
        used.insert(pair_key(sk, tk));
      } else {
        // Pair m is already placed: both new pairs must be valid once m's old pair is released.
        const auto old_m = pair_key(sm, in_stubs[m]);
        used.erase(old_m);
        if (!fine(sk, tk) || !fine(sm, tm) || pair_key(sk, tk) == pair_key(sm, tm)) {
          used.insert(old_m);
          continue;
        }
        used.insert(pair_key(sk, tk));
        used.insert(pair_key(sm, tm));
      }
      std::swap(in_stubs[k], in_stubs[m]);
      placed = true;
    }
    if (!placed) {
      dropped[k] = 1;
      ++result.dropped_pairs;
    }
  }

  result.pairs.reserve(total - result.dropped_pairs);
  for (std::size_t k = 0; k < total; ++k) {
    if (!dropped[k]) result.pairs.emplace_back(out_stubs[k], in_stubs[k]);
  }
  return result;
}

PairList gen_sbm(const ClassAssignment& classes, const BlockMatrix& block, Rng& rng) {
  for (const auto& row : block) {
    for (const double p : row) check_probability(p, "block matrix entry");
  }
  const std::array<std::vector<NodeId>, 2> pools{classes.members(NodeClass::Real),
                                                 classes.members(NodeClass::Fake)};
  PairList pairs;
  PairList row;
  for (NodeId i = 0; i < classes.size(); ++i) {
    row.clear();
    const auto sender = static_cast<std::size_t>(classes.classes[i]);
    for (std::size_t c = 0; c < 2; ++c) sample_bernoulli_subset(pools[c], i, block[sender][c], rng, i, row);
    std::sort(row.begin(), row.end());
    pairs.insert(pairs.end(), row.begin(), row.end());
  }
  return pairs;
}

BlockMatrix default_block_matrix(std::size_t n_real, std::size_t n_fake, double mean_degree,
                                 double real_ratio, double fake_ratio) {
  // Expected out-degree of a real sender: p_rf * (real_ratio * (n_real - 1) + n_fake).
  const auto nr = static_cast<double>(n_real);
  const auto nf = static_cast<double>(n_fake);
  BlockMatrix m{};
  const double real_denom = real_ratio * std::max(0.0, nr - 1.0) + nf;
  const double real_to_fake = real_denom > 0.0 ? mean_degree / real_denom : 0.0;
  m[0][0] = std::min(1.0, real_ratio * real_to_fake);
  m[0][1] = std::min(1.0, real_to_fake);
  const double fake_denom = fake_ratio * nr + std::max(0.0, nf - 1.0);
  const double fake_to_fake = fake_denom > 0.0 ? mean_degree / fake_denom : 0.0;
  m[1][0] = std::min(1.0, fake_ratio * fake_to_fake);
  m[1][1] = std::min(1.0, fake_to_fake);
  return m;
}

PairList gen_preferential_attachment(const ClassAssignment& classes, std::size_t k,
                                     const AttractionWeights& weights, Rng& rng) {
  const auto n = classes.size();
  if (k < 1) throw Error(ErrorCode::InvalidArgument, "k must be >= 1");
  if (n == 0 || k > n - 1) {
    throw Error(ErrorCode::InsufficientTargets,
                "k=" + std::to_string(k) + " exceeds the " + std::to_string(n == 0 ? 0 : n - 1) +
                    " possible targets");
  }
  if (weights.by_fake.size() != n || weights.by_real.size() != n) {
    throw Error(ErrorCode::InvalidArgument, "attraction weights must cover every node");
  }

  struct ClassSampler {
    const std::vector<double>* weights;
    std::discrete_distribution<NodeId> draw;
    std::size_t positive = 0;
  };
  auto make = [&](const std::vector<double>& w) {
    ClassSampler s{&w, {}, 0};
    for (const double x : w) {
      if (!(x >= 0.0) || !std::isfinite(x)) {
        throw Error(ErrorCode::InvalidArgument, "attraction weights must be finite and >= 0");
      }
      if (x > 0.0) ++s.positive;
    }
    if (s.positive > 0) s.draw = std::discrete_distribution<NodeId>(w.begin(), w.end());
    return s;
  };
  std::array<ClassSampler, 2> samplers{make(weights.by_real), make(weights.by_fake)};

  PairList pairs;
  pairs.reserve(n * k);
  std::vector<char> chosen(n, 0);
  std::vector<NodeId> picks;
  std::vector<std::pair<double, NodeId>> keys;

  for (NodeId i = 0; i < n; ++i) {
    auto& sampler = samplers[static_cast<std::size_t>(classes.classes[i])];
    const auto& w = *sampler.weights;
    const std::size_t available = sampler.positive - (w[i] > 0.0 ? 1 : 0);
    if (available < k) {
      throw Error(ErrorCode::InsufficientTargets,
                  "node " + std::to_string(i) + " has only " + std::to_string(available) +
                      " positive-weight targets for k=" + std::to_string(k));
    }

    picks.clear();
    bool exact = 4 * k > available;
    if (!exact) {
      // Successive sampling by rejection; falls back when the draw keeps hitting taken targets.
      std::size_t rejections = 0;
      while (picks.size() < k) {
        const NodeId t = sampler.draw(rng);
        if (t == i || chosen[t]) {
          if (++rejections > 64 * k + 1024) {
            exact = true;
            break;
          }
          continue;
        }
        chosen[t] = 1;
        picks.push_back(t);
      }
      for (const auto t : picks) chosen[t] = 0;
    }
    if (exact) {
      // Efraimidis-Spirakis keys log(u)/w; the k largest form a weighted
      // sample without replacement with the same law as successive sampling.
      picks.clear();
      keys.clear();
      for (NodeId t = 0; t < n; ++t) {
        if (t == i || w[t] <= 0.0) continue;
        const double u = 1.0 - uniform01(rng);
        keys.emplace_back(std::log(u) / w[t], t);
      }
      std::nth_element(keys.begin(), keys.begin() + static_cast<std::ptrdiff_t>(k - 1), keys.end(),
                       [](const auto& a, const auto& b) { return a.first > b.first; });
      for (std::size_t r = 0; r < k; ++r) picks.push_back(keys[r].second);
    }
    std::sort(picks.begin(), picks.end());
    for (const auto t : picks) pairs.emplace_back(i, t);
  }
  return pairs;
}

RateDistribution RateDistribution::beta(double alpha, double beta) {
  if (!(alpha > 0.0 && beta > 0.0)) throw Error(ErrorCode::InvalidArgument, "Beta parameters must be > 0");
  return {Kind::Beta, alpha, beta};
}

RateDistribution RateDistribution::constant(double value) {
  check_probability(value, "constant rate");
  return {Kind::Constant, value, 0.0};
}

RateDistribution RateDistribution::parse(std::string_view text) {
  auto number = [&](std::string_view s) {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) {
      throw Error(ErrorCode::ParseError, "bad number '" + std::string(s) + "' in rate distribution");
    }
    return v;
  };
  if (text.starts_with("beta:")) {
    const auto body = text.substr(5);
    const auto comma = body.find(',');
    if (comma == std::string_view::npos) {
      throw Error(ErrorCode::ParseError, "expected beta:ALPHA,BETA, got '" + std::string(text) + "'");
    }
    return beta(number(body.substr(0, comma)), number(body.substr(comma + 1)));
  }
  if (text.starts_with("const:")) return constant(number(text.substr(6)));
  throw Error(ErrorCode::ParseError,
              "rate distribution must be beta:A,B or const:C, got '" + std::string(text) + "'");
}

std::string RateDistribution::to_string() const {
  std::ostringstream os;
  if (kind == Kind::Beta) {
    os << "beta:" << a << ',' << b;
  } else {
    os << "const:" << a;
  }
  return os.str();
}

double RateDistribution::mean() const { return kind == Kind::Beta ? a / (a + b) : a; }

double RateDistribution::sample(Rng& rng) const {
  return kind == Kind::Beta ? beta_variate(rng, a, b) : a;
}

ResponseProfile assign_profiles(const ClassAssignment& classes, const ProfileParams& params, Rng& rng) {
  ResponseProfile profile;
  profile.accept_real.resize(classes.size());
  profile.accept_fake.resize(classes.size());
  const double indifferent = params.real_indifferent_fraction;
  if (!(indifferent >= 0.0 && indifferent <= 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "real_indifferent_fraction must lie in [0, 1]");
  }
  for (NodeId v = 0; v < classes.size(); ++v) {
    if (classes.is_fake(v)) {
      profile.accept_real[v] = params.fake_accepts_real.sample(rng);
      profile.accept_fake[v] = params.fake_accepts_fake.sample(rng);
    } else {
      profile.accept_real[v] = params.real_accepts_real.sample(rng);
      profile.accept_fake[v] = params.real_accepts_fake.sample(rng);
      if (indifferent > 0.0 && bernoulli(rng, indifferent)) profile.accept_fake[v] = profile.accept_real[v];
    }
  }
  return profile;
}

RequestGraph simulate_responses(const PairList& pairs, const ClassAssignment& classes,
                                const ResponseProfile& profiles, Rng& rng) {
  const auto n = classes.size();
  if (profiles.accept_real.size() != n || profiles.accept_fake.size() != n) {
    throw Error(ErrorCode::InvalidArgument, "response profiles must cover every node");
  }
  std::vector<RequestEdge> edges;
  edges.reserve(pairs.size());
  for (const auto& [s, t] : pairs) {
    if (s >= n || t >= n) throw Error(ErrorCode::NodeOutOfRange, "request endpoint >= n");
    const double p = classes.is_fake(s) ? profiles.accept_fake[t] : profiles.accept_real[t];
    edges.push_back({s, t, bernoulli(rng, p)});
  }
  return RequestGraph::build(n, edges);
}

std::string_view to_string(Generator g) {
  switch (g) {
    case Generator::ErdosRenyi: return "erdos_renyi";
    case Generator::Configuration: return "configuration";
    case Generator::Sbm: return "sbm";
    case Generator::PreferentialAttachment: return "preferential_attachment";
  }
  return "erdos_renyi";
}

Generator parse_generator(std::string_view text) {
  if (text == "erdos_renyi" || text == "er") return Generator::ErdosRenyi;
  if (text == "configuration") return Generator::Configuration;
  if (text == "sbm") return Generator::Sbm;
  if (text == "preferential_attachment" || text == "pa") return Generator::PreferentialAttachment;
  throw Error(ErrorCode::ParseError, "unknown generator '" + std::string(text) + "'");
}

std::string_view to_string(AttractionMode m) {
  switch (m) {
    case AttractionMode::Independent: return "independent";
    case AttractionMode::Shared: return "shared";
    case AttractionMode::Uniform: return "uniform";
  }
  return "independent";
}

AttractionMode parse_attraction_mode(std::string_view text) {
  if (text == "independent") return AttractionMode::Independent;
  if (text == "shared") return AttractionMode::Shared;
  if (text == "uniform") return AttractionMode::Uniform;
  throw Error(ErrorCode::ParseError, "unknown attraction mode '" + std::string(text) + "'");
}

LabelTable hide_labels(const LabelTable& truth, const ClassAssignment& classes,
                       double fraction_known, bool stratified, Rng& rng) {
  check_probability(fraction_known, "fraction_known");
  const auto n = truth.size();
  LabelTable training(n);
  auto keep = [&](std::vector<NodeId> group) {
    const auto count = static_cast<std::size_t>(
        std::llround(fraction_known * static_cast<double>(group.size())));
    std::shuffle(group.begin(), group.end(), rng);
    for (std::size_t k = 0; k < count; ++k) {
      if (truth[group[k]]) training.set(group[k], *truth[group[k]]);
    }
  };
  if (stratified) {
    keep(classes.members(NodeClass::Real));
    keep(classes.members(NodeClass::Fake));
  } else {
    std::vector<NodeId> all(n);
    std::iota(all.begin(), all.end(), NodeId{0});
    keep(std::move(all));
  }
  return training;
}

Scenario build_scenario(const SynthConfig& config) {
  if (config.n < 2) throw Error(ErrorCode::InvalidArgument, "scenario needs n >= 2");
  check_probability(config.fraction_known, "fraction_known");

  Scenario sc;
  auto class_rng = make_rng(config.seed, 1);
  sc.classes = assign_classes(config.n, config.fraction_fake, class_rng);

  auto edge_rng = make_rng(config.seed, 2);
  PairList pairs;
  const auto n = config.n;
  switch (config.generator) {
    case Generator::ErdosRenyi: {
      const double p = config.er_edge_prob ? *config.er_edge_prob
                                           : std::min(1.0, config.mean_degree / static_cast<double>(n - 1));
      pairs = gen_erdos_renyi(n, p, edge_rng);
      break;
    }
    case Generator::Configuration: {
      std::optional<double> mean;
      if (config.degree_rescale) mean = config.mean_degree;
      const auto sampler = config.degree_histogram.empty()
                               ? DegreeSampler::power_law(config.degree_exponent, config.degree_cap, mean)
                               : DegreeSampler::histogram(config.degree_histogram, mean);
      auto cg = gen_configuration(n, sampler, edge_rng);
      sc.dropped_pairs = cg.dropped_pairs;
      pairs = std::move(cg.pairs);
      break;
    }
    case Generator::Sbm: {
      const auto fakes = sc.classes.num_fakes();
      const auto block = config.sbm_block ? *config.sbm_block
                                          : default_block_matrix(n - fakes, fakes, config.mean_degree,
                                                                 config.sbm_real_ratio,
                                                                 config.sbm_fake_ratio);
      pairs = gen_sbm(sc.classes, block, edge_rng);
      break;
    }
    case Generator::PreferentialAttachment: {
      auto weight_rng = make_rng(config.seed, 6);
      AttractionWeights w;
      auto gamma_vector = [&](double shape) {
        if (!(shape > 0.0)) throw Error(ErrorCode::InvalidArgument, "attraction shape must be > 0");
        std::gamma_distribution<double> g(shape, 1.0);
        std::vector<double> v(n);
        for (auto& x : v) x = g(weight_rng);
        return v;
      };
      switch (config.pa_mode) {
        case AttractionMode::Independent:
          w.by_real = gamma_vector(config.pa_shape_real);
          w.by_fake = gamma_vector(config.pa_shape_fake);
          break;
        case AttractionMode::Shared:
          w.by_real = gamma_vector(config.pa_shape_real);
          w.by_fake = w.by_real;
          break;
        case AttractionMode::Uniform:
          w.by_real.assign(n, 1.0);
          w.by_fake.assign(n, 1.0);
          break;
      }
      const auto k = static_cast<std::size_t>(std::max(1L, std::lround(config.mean_degree)));
      pairs = gen_preferential_attachment(sc.classes, k, w, edge_rng);
      break;
    }
  }

  auto profile_rng = make_rng(config.seed, 3);
  sc.profiles = assign_profiles(sc.classes, config.profiles, profile_rng);

  auto response_rng = make_rng(config.seed, 4);
  sc.graph = simulate_responses(pairs, sc.classes, sc.profiles, response_rng);

  sc.truth = LabelTable(n);
  for (NodeId v = 0; v < n; ++v) sc.truth.set(v, sc.classes.is_fake(v) ? 1.0 : 0.0);

  auto split_rng = make_rng(config.seed, 5);
  sc.training = hide_labels(sc.truth, sc.classes, config.fraction_known, config.stratified_split, split_rng);
  return sc;
}

}  // namespace sybiledge
