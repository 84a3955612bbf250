#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sybiledge/graph.hpp"

namespace sybiledge {

/**
 * Area under the ROC curve as the Mann-Whitney statistic. Tied scores get
 * the average of the ranks they span, so a tie between a fake and a real
 * counts as half a win. `is_fake` is parallel to `scores`; higher scores mean
 * more fake-like.
 *
 * Throws Error{SingleClass} if either class is empty.
 */
double roc_auc(std::span<const double> scores, std::span<const std::uint8_t> is_fake);

// Inclusive out-degree range; `high` empty means unbounded.
struct DegreeBucket {
  std::size_t low = 0;
  std::optional<std::size_t> high;

  bool contains(std::size_t d) const { return d >= low && (!high || d <= *high); }
  std::string label() const;  // "0-5", "46+"
};

class BucketScheme {
 public:
  /// Buckets must be contiguous, start at 0 and end unbounded.
  /// Throws Error{InvalidArgument}.
  explicit BucketScheme(std::vector<DegreeBucket> buckets);

  /// "0:5,6:10,46:" (empty upper bound = unbounded). Throws Error{ParseError}.
  static BucketScheme parse(std::string_view text);
  /// [[0,5],[6,10],...,[41,45],[46,inf]]
  static BucketScheme fine();
  /// [[0,10],[11,20],[21,45],[46,inf]]
  static BucketScheme coarse();

  std::size_t size() const { return buckets_.size(); }
  const DegreeBucket& operator[](std::size_t k) const { return buckets_[k]; }
  std::size_t index_of(std::size_t degree) const;
  std::string to_string() const;

 private:
  std::vector<DegreeBucket> buckets_;
};

/// Groups `nodes` by out-degree; one (possibly empty) list per bucket.
std::vector<std::vector<NodeId>> bucket_by_out_degree(const RequestGraph& graph,
                                                      std::span<const NodeId> nodes,
                                                      const BucketScheme& scheme);

struct BucketAuc {
  DegreeBucket bucket;
  std::size_t n_fakes = 0;
  std::size_t n_reals = 0;
  std::optional<double> auc;  // empty when the bucket lacks one class
};

struct BucketedAuc {
  std::vector<BucketAuc> buckets;
  std::size_t n_fakes = 0;
  std::size_t n_reals = 0;
  std::optional<double> overall;
};

/**
 * Per-bucket and pooled AUC of `scores` (parallel to `nodes`) against `truth`
 * (label >= 0.5 counts as fake). Every evaluated node must have a truth label.
 */
BucketedAuc evaluate_bucketed(const RequestGraph& graph, std::span<const NodeId> nodes,
                              std::span<const double> scores, const LabelTable& truth,
                              const BucketScheme& scheme);

}  // namespace sybiledge
