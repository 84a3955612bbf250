#include "sybiledge/evaluation.hpp"

#include <algorithm>
#include <charconv>
#include <numeric>

#include "sybiledge/error.hpp"

namespace sybiledge {

double roc_auc(std::span<const double> scores, std::span<const std::uint8_t> is_fake) {
  if (scores.size() != is_fake.size()) {
    throw Error(ErrorCode::InvalidArgument, "scores and truth differ in length");
  }
  const auto n = scores.size();
  std::size_t n_pos = 0;
  for (const auto f : is_fake) n_pos += f ? 1 : 0;
  const std::size_t n_neg = n - n_pos;
  if (n_pos == 0 || n_neg == 0) {
    throw Error(ErrorCode::SingleClass, "AUC needs at least one fake and one real (got " +
                                            std::to_string(n_pos) + " fakes, " +
                                            std::to_string(n_neg) + " reals)");
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  // Rank sums are kept doubled so tie averages stay integral.
  std::uint64_t doubled_rank_sum = 0;
  std::size_t start = 0;
  while (start < n) {
    std::size_t end = start + 1;
    while (end < n && scores[order[end]] == scores[order[start]]) ++end;
    const std::uint64_t doubled_avg_rank = (start + 1) + end;  // ranks start+1 .. end
    for (std::size_t k = start; k < end; ++k) {
      if (is_fake[order[k]]) doubled_rank_sum += doubled_avg_rank;
    }
    start = end;
  }
  const double rank_sum = static_cast<double>(doubled_rank_sum) / 2.0;
  const double pos = static_cast<double>(n_pos);
  return (rank_sum - pos * (pos + 1.0) / 2.0) / (pos * static_cast<double>(n_neg));
}

std::string DegreeBucket::label() const {
  return high ? std::to_string(low) + "-" + std::to_string(*high) : std::to_string(low) + "+";
}

BucketScheme::BucketScheme(std::vector<DegreeBucket> buckets) : buckets_(std::move(buckets)) {
  if (buckets_.empty()) throw Error(ErrorCode::InvalidArgument, "bucket scheme is empty");
  if (buckets_.front().low != 0) throw Error(ErrorCode::InvalidArgument, "first bucket must start at 0");
  for (std::size_t k = 0; k < buckets_.size(); ++k) {
    const auto& b = buckets_[k];
    const bool last = k + 1 == buckets_.size();
    if (!b.high) {
      if (!last) throw Error(ErrorCode::InvalidArgument, "only the last bucket may be unbounded");
      continue;
    }
    if (*b.high < b.low) throw Error(ErrorCode::InvalidArgument, "bucket " + b.label() + " is empty");
    if (last) throw Error(ErrorCode::InvalidArgument, "last bucket must be unbounded");
    if (buckets_[k + 1].low != *b.high + 1) {
      throw Error(ErrorCode::InvalidArgument,
                  "buckets " + b.label() + " and " + buckets_[k + 1].label() +
                      " leave a gap or overlap");
    }
  }
}

BucketScheme BucketScheme::parse(std::string_view text) {
  auto number = [&](std::string_view s) {
    std::size_t v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) {
      throw Error(ErrorCode::ParseError, "bad bucket bound '" + std::string(s) + "'");
    }
    return v;
  };
  std::vector<DegreeBucket> buckets;
  while (!text.empty()) {
    const auto comma = text.find(',');
    const auto item = text.substr(0, comma);
    const auto colon = item.find(':');
    if (colon == std::string_view::npos) {
      throw Error(ErrorCode::ParseError, "bucket '" + std::string(item) + "' must be LOW:HIGH or LOW:");
    }
    DegreeBucket b;
    b.low = number(item.substr(0, colon));
    if (colon + 1 < item.size()) b.high = number(item.substr(colon + 1));
    buckets.push_back(b);
    text = comma == std::string_view::npos ? std::string_view{} : text.substr(comma + 1);
  }
  return BucketScheme(std::move(buckets));
}

BucketScheme BucketScheme::fine() {
  std::vector<DegreeBucket> b{{0, 5}};
  for (std::size_t low = 6; low <= 41; low += 5) b.push_back({low, low + 4});
  b.push_back({46, std::nullopt});
  return BucketScheme(std::move(b));
}

BucketScheme BucketScheme::coarse() {
  return BucketScheme({{0, 10}, {11, 20}, {21, 45}, {46, std::nullopt}});
}

std::size_t BucketScheme::index_of(std::size_t degree) const {
  for (std::size_t k = 0; k < buckets_.size(); ++k) {
    if (buckets_[k].contains(degree)) return k;
  }
  return buckets_.size() - 1;  // unreachable for a valid scheme
}

std::string BucketScheme::to_string() const {
  std::string out;
  for (const auto& b : buckets_) {
    if (!out.empty()) out += ',';
    out += std::to_string(b.low) + ":" + (b.high ? std::to_string(*b.high) : "");
  }
  return out;
}

std::vector<std::vector<NodeId>> bucket_by_out_degree(const RequestGraph& graph,
                                                      std::span<const NodeId> nodes,
                                                      const BucketScheme& scheme) {
  std::vector<std::vector<NodeId>> groups(scheme.size());
  for (const auto v : nodes) {
    if (v >= graph.num_nodes()) {
      throw Error(ErrorCode::UnknownNode, "node " + std::to_string(v) + " is not in the graph");
    }
    groups[scheme.index_of(graph.out_degree(v))].push_back(v);
  }
  return groups;
}

BucketedAuc evaluate_bucketed(const RequestGraph& graph, std::span<const NodeId> nodes,
                              std::span<const double> scores, const LabelTable& truth,
                              const BucketScheme& scheme) {
  if (nodes.size() != scores.size()) {
    throw Error(ErrorCode::InvalidArgument, "nodes and scores differ in length");
  }
  std::vector<std::uint8_t> fake(nodes.size());
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    const auto v = nodes[k];
    if (v >= truth.size() || !truth[v]) {
      throw Error(ErrorCode::InvalidArgument, "node " + std::to_string(v) + " has no truth label");
    }
    fake[k] = *truth[v] >= 0.5 ? 1 : 0;
  }

  std::vector<std::vector<std::size_t>> members(scheme.size());
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    if (nodes[k] >= graph.num_nodes()) {
      throw Error(ErrorCode::UnknownNode, "node " + std::to_string(nodes[k]) + " is not in the graph");
    }
    members[scheme.index_of(graph.out_degree(nodes[k]))].push_back(k);
  }

  auto summarize = [&](std::span<const std::size_t> idx, std::size_t& n_fakes, std::size_t& n_reals)
      -> std::optional<double> {
    std::vector<double> s;
    std::vector<std::uint8_t> f;
    s.reserve(idx.size());
    f.reserve(idx.size());
    for (const auto k : idx) {
      s.push_back(scores[k]);
      f.push_back(fake[k]);
      (fake[k] ? n_fakes : n_reals) += 1;
    }
    if (n_fakes == 0 || n_reals == 0) return std::nullopt;
    return roc_auc(s, f);
  };

  BucketedAuc result;
  for (std::size_t b = 0; b < scheme.size(); ++b) {
    BucketAuc entry;
    entry.bucket = scheme[b];
    entry.auc = summarize(members[b], entry.n_fakes, entry.n_reals);
    result.buckets.push_back(entry);
  }
  std::vector<std::size_t> all(nodes.size());
  std::iota(all.begin(), all.end(), std::size_t{0});
  result.overall = summarize(all, result.n_fakes, result.n_reals);
  return result;
}

}  // namespace sybiledge
