#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "sybiledge/graph.hpp"

namespace sybiledge {

inline constexpr double kDefaultClampEpsilon = 1e-6;

/**
 * Labeled-request tallies per target plus sender-side totals.
 *
 * A sender with fake-probability l contributes l to the fake-side counts and
 * 1 - l to the real-side counts of each target it requested (and to the
 * accepted counts when the request was accepted). Requests from unlabeled
 * senders are not counted. All counts are real-valued.
 */
struct TargetCounts {
  std::vector<double> received_fake;   // requests j received from known fakes
  std::vector<double> received_real;   // ... from known reals
  std::vector<double> accepted_fake;   // of those, accepted by j
  std::vector<double> accepted_real;
  double sent_fake = 0.0;              // all requests sent by known fakes
  double sent_real = 0.0;              // all requests sent by known reals

  TargetCounts() = default;
  explicit TargetCounts(std::size_t n)
      : received_fake(n), received_real(n), accepted_fake(n), accepted_real(n) {}

  std::size_t size() const { return received_fake.size(); }
  double received(NodeId j) const { return received_fake[j] + received_real[j]; }
  double accepted(NodeId j) const { return accepted_fake[j] + accepted_real[j]; }
  double sent_known() const { return sent_fake + sent_real; }

  /// Adds another shard's counts. Shards must cover the same node range.
  void merge(const TargetCounts& other);
};

/// Tallies every labeled-sender request in `graph`.
TargetCounts accumulate_counts(const RequestGraph& graph, const LabelTable& labels);

/// Tallies one shard of edges into a fresh table of `n` targets; combine shards with merge().
TargetCounts accumulate_counts(std::size_t n, std::span<const RequestEdge> edges,
                               const LabelTable& labels);

/**
 * Per-target pseudo-count (sigma for selection rates, phi for accept rates).
 * Either one uniform value or a per-target vector. +infinity is legal and
 * collapses both class rates onto the target's overall rate exactly.
 */
class ConfidencePriors {
 public:
  static ConfidencePriors uniform(double value);
  static ConfidencePriors per_target(std::vector<double> values);

  double operator[](NodeId j) const { return values_.empty() ? uniform_ : values_[j]; }
  bool is_uniform() const { return values_.empty(); }
  double uniform_value() const { return uniform_; }
  std::size_t size() const { return values_.size(); }

 private:
  double uniform_ = 0.0;
  std::vector<double> values_;
};

struct ClassRates {
  double fake = 0.0;
  double real = 0.0;
};

/// Shrinkage accept rates. Targets with no labeled requests get the global
/// mean accept rate for both classes. Output clamped to [eps, 1 - eps].
std::vector<ClassRates> estimate_accept_rates(const TargetCounts& counts,
                                              const ConfidencePriors& phi,
                                              double clamp_eps = kDefaultClampEpsilon);

/// Shrinkage selection rates. Targets with no labeled requests get equal
/// (zero before clamping) rates for both classes. Output floored at eps.
/// Throws Error{EmptyTrainingSet} when no labeled requests exist.
std::vector<ClassRates> estimate_selection_rates(const TargetCounts& counts,
                                                 const ConfidencePriors& sigma,
                                                 double clamp_eps = kDefaultClampEpsilon);

struct TargetRates {
  double select_fake = 0.0;
  double select_real = 0.0;
  double accept_fake = 0.0;
  double accept_real = 0.0;
  bool informative = false;  // received at least one labeled request
};

struct RateTable {
  std::vector<TargetRates> targets;
  double sent_known = 0.0;
  double sent_fake = 0.0;
  double sent_real = 0.0;

  std::size_t size() const { return targets.size(); }
  const TargetRates& operator[](NodeId j) const { return targets[j]; }
};

// Tuned on the synthetic scenarios at n = 10000, mean out-degree 20. The
// selection prior competes with the class totals (rho_LS is in the thousands
// there), so it sits on that scale; the accept prior competes with per-target
// counts.
inline constexpr double kDefaultSigma = 1e5;
inline constexpr double kDefaultPhi = 1.0;

// Zero priors give the raw ratios.
struct RateOptions {
  ConfidencePriors sigma = ConfidencePriors::uniform(0.0);
  ConfidencePriors phi = ConfidencePriors::uniform(0.0);
  double clamp_eps = kDefaultClampEpsilon;
};

RateTable build_rate_table(const TargetCounts& counts, const RateOptions& options);
RateTable build_rate_table(const RequestGraph& graph, const LabelTable& labels,
                           const RateOptions& options);

}  // namespace sybiledge
