#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "sybiledge/baselines.hpp"
#include "sybiledge/evaluation.hpp"
#include "sybiledge/graph.hpp"
#include "sybiledge/rates.hpp"
#include "sybiledge/synth.hpp"

namespace sybiledge {

enum class Method { SybilEdge, SybilEdgeTR, RejectRate, SybilRank, SybilScarC };

std::string_view to_string(Method m);
Method parse_method(std::string_view text);

struct MethodOptions {
  double sigma = kDefaultSigma;  // +inf allowed
  double phi = kDefaultPhi;      // +inf allowed
  double clamp_eps = 1e-6;
  std::optional<double> prior;  // unset: fraction of fakes among training labels
  std::optional<std::size_t> rank_iterations;  // unset: ceil(log2 n)
  ScarOptions scar;
  unsigned threads = 1;
};

/// Mean of the known training labels (the prior fake fraction).
double known_fake_fraction(const LabelTable& labels);

/// Fake-likeness scores (higher = more fake-like) for `test_nodes` under one method.
std::vector<double> run_method(Method method, const RequestGraph& graph, const LabelTable& training,
                               std::span<const NodeId> test_nodes, const MethodOptions& options);

// One evaluated (grid point, seed, method) cell.
struct PointResult {
  std::vector<std::pair<std::string, std::string>> params;  // grid coordinates
  std::uint64_t seed = 0;
  Method method = Method::SybilEdge;
  BucketedAuc auc;
  double runtime_ms = 0.0;
};

// Mean and sample standard deviation of overall AUC across seeds.
struct SummaryRow {
  std::vector<std::pair<std::string, std::string>> params;
  Method method = Method::SybilEdge;
  std::size_t n_seeds = 0;
  double mean_auc = 0.0;
  double stdev_auc = 0.0;
};

struct ExperimentReport {
  std::string kind;
  std::vector<std::pair<std::string, std::string>> config;  // resolved configuration echo
  std::vector<std::uint64_t> seeds;
  std::vector<PointResult> points;
  std::vector<SummaryRow> summary;
  bool include_timing = false;
  std::string header;  // emitted first in JSON when non-empty

  std::string to_json() const;
  /// One row per grid point, seed, method and bucket (bucket "all" = pooled).
  std::string to_tsv() const;
};

struct SweepOptions {
  std::vector<Method> methods{Method::SybilEdge, Method::SybilEdgeTR, Method::RejectRate};
  std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
  MethodOptions method_options;
  BucketScheme buckets = BucketScheme::fine();
  unsigned threads = 1;  // sweep points run concurrently
  bool include_timing = false;
};

/// Retrains on label-flipped training sets, scoring the unknown nodes of the
/// clean scenario against the clean truth. One scenario per seed.
ExperimentReport run_noise_sweep(const SynthConfig& base, std::span<const double> flip_probs,
                                 const SweepOptions& options);

struct GeneratorGrid {
  std::vector<Generator> generators;
  std::vector<double> mean_degrees;
  std::vector<double> fake_fractions;
};

/// Full cross product generator x mean degree x fake fraction, each over every seed.
ExperimentReport run_generator_sweep(const SynthConfig& base, const GeneratorGrid& grid,
                                     const SweepOptions& options);

/// Evaluates every method once on one scenario.
std::vector<PointResult> evaluate_scenario(const Scenario& scenario, const LabelTable& training,
                                           const std::vector<Method>& methods,
                                           const MethodOptions& options,
                                           const BucketScheme& buckets);

}  // namespace sybiledge
