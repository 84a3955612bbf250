#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "sybiledge/graph.hpp"
#include "sybiledge/rng.hpp"

namespace sybiledge {

enum class NodeClass : std::uint8_t { Real = 0, Fake = 1 };

struct ClassAssignment {
  std::vector<NodeClass> classes;

  std::size_t size() const { return classes.size(); }
  bool is_fake(NodeId v) const { return classes[v] == NodeClass::Fake; }
  std::size_t num_fakes() const;
  std::vector<NodeId> members(NodeClass c) const;
};

/// Marks exactly round(fraction_fake * n) uniformly chosen nodes as fake.
ClassAssignment assign_classes(std::size_t n, double fraction_fake, Rng& rng);

// Request pairs before responses are drawn.
using PairList = std::vector<std::pair<NodeId, NodeId>>;

/// Directed G(n, p): every ordered pair (i != j) independently with probability p.
PairList gen_erdos_renyi(std::size_t n, double edge_prob, Rng& rng);

/**
 * Degree distribution for the configuration model: a discrete power law
 * P(d) ~ d^-exponent on [1, cap], or an empirical histogram (weight of degree
 * d at index d). When `target_mean` is set, each draw x is rescaled to
 * floor(s * x + U) with s = target_mean / E[x] and U ~ U[0, 1), which keeps
 * the heavy tail and makes the mean exact.
 */
class DegreeSampler {
 public:
  static DegreeSampler power_law(double exponent, std::uint32_t cap,
                                 std::optional<double> target_mean = std::nullopt);
  static DegreeSampler histogram(std::vector<double> weights,
                                 std::optional<double> target_mean = std::nullopt);

  std::uint32_t operator()(Rng& rng) const;
  double base_mean() const;
  double mean() const { return target_mean_ ? *target_mean_ : base_mean(); }

 private:
  std::vector<double> weights_;  // index = degree
  mutable std::discrete_distribution<std::uint32_t> draw_;
  std::optional<double> target_mean_;
};

struct ConfigurationGraph {
  PairList pairs;
  std::vector<std::uint32_t> degrees;  // sampled stub count per node (in = out)
  std::size_t dropped_pairs = 0;       // stub pairs discarded after bounded retries
};

/// Directed configuration model; each node's sampled degree is used as both
/// its out- and in-stub count. Throws Error{DegenerateSequence} if all degrees are 0.
ConfigurationGraph gen_configuration(std::size_t n, const DegreeSampler& degrees, Rng& rng,
                                     std::size_t max_retries = 100);

// Row = sender class, column = target class, indexed by NodeClass.
using BlockMatrix = std::array<std::array<double, 2>, 2>;

PairList gen_sbm(const ClassAssignment& classes, const BlockMatrix& block, Rng& rng);

/**
 * Block matrix giving both classes expected out-degree `mean_degree`.
 * `real_ratio` is P(real -> real) / P(real -> fake) and `fake_ratio` is
 * P(fake -> real) / P(fake -> fake), per ordered pair.
 */
BlockMatrix default_block_matrix(std::size_t n_real, std::size_t n_fake, double mean_degree,
                                 double real_ratio = 4.0, double fake_ratio = 1.0);

// a priori weight of each target as seen by fake senders and by real senders.
struct AttractionWeights {
  std::vector<double> by_fake;
  std::vector<double> by_real;
};

/**
 * k-out attachment: every sender picks k distinct targets (never itself),
 * each draw proportional to the sender class's weights over the targets not
 * yet chosen. Throws Error{InsufficientTargets} when fewer than k targets
 * have positive weight.
 */
PairList gen_preferential_attachment(const ClassAssignment& classes, std::size_t k,
                                     const AttractionWeights& weights, Rng& rng);

/// Beta(a, b) or a point mass.
struct RateDistribution {
  enum class Kind { Beta, Constant } kind = Kind::Beta;
  double a = 1.0;  // alpha, or the constant
  double b = 1.0;

  static RateDistribution beta(double alpha, double beta);
  static RateDistribution constant(double value);
  /// "beta:ALPHA,BETA" or "const:VALUE". Throws Error{ParseError}.
  static RateDistribution parse(std::string_view text);
  std::string to_string() const;
  double mean() const;
  double sample(Rng& rng) const;
};

struct ProfileParams {
  // acceptance rates of real targets
  RateDistribution real_accepts_real = RateDistribution::beta(8, 2);
  RateDistribution real_accepts_fake = RateDistribution::beta(2, 4);
  // acceptance rates of fake targets
  RateDistribution fake_accepts_real = RateDistribution::beta(5, 5);
  RateDistribution fake_accepts_fake = RateDistribution::beta(6, 2);
  // share of real targets that answer fakes like reals (accept_fake := accept_real)
  double real_indifferent_fraction = 0.0;
};

struct ResponseProfile {
  std::vector<double> accept_real;  // P(accept | sender real)
  std::vector<double> accept_fake;  // P(accept | sender fake)
};

ResponseProfile assign_profiles(const ClassAssignment& classes, const ProfileParams& params, Rng& rng);

/// Draws every response independently from the target's profile for the sender's class.
RequestGraph simulate_responses(const PairList& pairs, const ClassAssignment& classes,
                                const ResponseProfile& profiles, Rng& rng);

enum class Generator { ErdosRenyi, Configuration, Sbm, PreferentialAttachment };

std::string_view to_string(Generator g);
Generator parse_generator(std::string_view text);

enum class AttractionMode {
  Independent,  // fake and real senders draw separate Gamma weights
  Shared,       // one Gamma weight vector for both classes
  Uniform,      // all weights 1
};

std::string_view to_string(AttractionMode m);
AttractionMode parse_attraction_mode(std::string_view text);

struct SynthConfig {
  std::size_t n = 10000;
  double fraction_fake = 0.05;
  double fraction_known = 0.8;
  bool stratified_split = false;
  Generator generator = Generator::ErdosRenyi;
  double mean_degree = 20.0;

  std::optional<double> er_edge_prob;  // overrides mean_degree for Erdos-Renyi

  double degree_exponent = 2.5;
  std::uint32_t degree_cap = 50;
  bool degree_rescale = true;             // rescale power law to mean_degree
  std::vector<double> degree_histogram;   // non-empty: used instead of the power law

  std::optional<BlockMatrix> sbm_block;   // overrides the default matrix
  double sbm_real_ratio = 4.0;
  double sbm_fake_ratio = 1.0;

  AttractionMode pa_mode = AttractionMode::Independent;
  double pa_shape_real = 1.0;
  double pa_shape_fake = 1.0;

  ProfileParams profiles;
  std::uint64_t seed = 1;
};

struct Scenario {
  RequestGraph graph;
  LabelTable truth;     // every node labeled 0/1
  LabelTable training;  // truth with the test nodes hidden
  ClassAssignment classes;
  ResponseProfile profiles;
  std::size_t dropped_pairs = 0;
};

/// Full pipeline: classes, request pairs, profiles, responses, known/unknown split.
Scenario build_scenario(const SynthConfig& config);

/// Hides labels so that round(fraction_known * n) nodes stay known, uniformly
/// or per class when `stratified`.
LabelTable hide_labels(const LabelTable& truth, const ClassAssignment& classes,
                       double fraction_known, bool stratified, Rng& rng);

}  // namespace sybiledge
