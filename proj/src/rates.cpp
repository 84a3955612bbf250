#include "sybiledge/rates.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

#include "sybiledge/error.hpp"

namespace sybiledge {

namespace {

void check_prior_size(const ConfidencePriors& priors, std::size_t n, const char* name) {
  if (!priors.is_uniform() && priors.size() != n) {
    throw Error(ErrorCode::InvalidArgument, std::string(name) + " covers " +
                                                std::to_string(priors.size()) +
                                                " targets, expected " + std::to_string(n));
  }
}

// (observed + prior * overall) / (trials + prior), with the two degenerate
// limits resolved toward the overall rate.
double shrink(double observed, double trials, double prior, double overall) {
  if (std::isinf(prior)) return overall;
  const double denom = trials + prior;
  if (denom <= 0.0) return overall;
  return (observed + prior * overall) / denom;
}

}  // namespace

void TargetCounts::merge(const TargetCounts& other) {
  if (other.size() != size()) {
    throw Error(ErrorCode::InvalidArgument, "cannot merge count tables of different sizes");
  }
  for (std::size_t j = 0; j < size(); ++j) {
    received_fake[j] += other.received_fake[j];
    received_real[j] += other.received_real[j];
    accepted_fake[j] += other.accepted_fake[j];
    accepted_real[j] += other.accepted_real[j];
  }
  sent_fake += other.sent_fake;
  sent_real += other.sent_real;
}

TargetCounts accumulate_counts(std::size_t n, std::span<const RequestEdge> edges,
                               const LabelTable& labels) {
  if (labels.size() != n) {
    throw Error(ErrorCode::InvalidArgument, "label table has " + std::to_string(labels.size()) +
                                                " entries for a graph of " + std::to_string(n));
  }
  TargetCounts counts(n);
  for (const auto& e : edges) {
    const auto& label = labels[e.source];
    if (!label) continue;
    const double fake = *label;
    const double real = 1.0 - fake;
    counts.received_fake[e.target] += fake;
    counts.received_real[e.target] += real;
    if (e.accepted) {
      counts.accepted_fake[e.target] += fake;
      counts.accepted_real[e.target] += real;
    }
    counts.sent_fake += fake;
    counts.sent_real += real;
  }
  return counts;
}

TargetCounts accumulate_counts(const RequestGraph& graph, const LabelTable& labels) {
  return accumulate_counts(graph.num_nodes(), graph.edges(), labels);
}

ConfidencePriors ConfidencePriors::uniform(double value) {
  if (!(value >= 0.0)) throw Error(ErrorCode::InvalidArgument, "confidence prior must be >= 0");
  ConfidencePriors p;
  p.uniform_ = value;
  return p;
}

ConfidencePriors ConfidencePriors::per_target(std::vector<double> values) {
  for (std::size_t j = 0; j < values.size(); ++j) {
    if (!(values[j] >= 0.0)) {
      throw Error(ErrorCode::InvalidArgument,
                  "confidence prior of target " + std::to_string(j) + " must be >= 0");
    }
  }
  ConfidencePriors p;
  p.values_ = std::move(values);
  return p;
}

std::vector<ClassRates> estimate_accept_rates(const TargetCounts& counts,
                                              const ConfidencePriors& phi, double clamp_eps) {
  check_prior_size(phi, counts.size(), "phi");
  double total_received = 0.0;
  double total_accepted = 0.0;
  for (NodeId j = 0; j < counts.size(); ++j) {
    total_received += counts.received(j);
    total_accepted += counts.accepted(j);
  }
  const double global_mean = total_received > 0.0 ? total_accepted / total_received : 0.5;
  const double lo = clamp_eps;
  const double hi = 1.0 - clamp_eps;

  std::vector<ClassRates> rates(counts.size());
  for (NodeId j = 0; j < counts.size(); ++j) {
    const double received = counts.received(j);
    if (received <= 0.0) {
      rates[j].fake = rates[j].real = std::clamp(global_mean, lo, hi);
      continue;
    }
    const double overall = counts.accepted(j) / received;
    rates[j].fake =
        std::clamp(shrink(counts.accepted_fake[j], counts.received_fake[j], phi[j], overall), lo, hi);
    rates[j].real =
        std::clamp(shrink(counts.accepted_real[j], counts.received_real[j], phi[j], overall), lo, hi);
  }
  return rates;
}

std::vector<ClassRates> estimate_selection_rates(const TargetCounts& counts,
                                                 const ConfidencePriors& sigma, double clamp_eps) {
  check_prior_size(sigma, counts.size(), "sigma");
  const double sent_known = counts.sent_known();
  if (!(sent_known > 0.0)) {
    throw Error(ErrorCode::EmptyTrainingSet, "no requests were sent by labeled users");
  }

  std::vector<ClassRates> rates(counts.size());
  for (NodeId j = 0; j < counts.size(); ++j) {
    const double received = counts.received(j);
    if (received <= 0.0) {
      rates[j].fake = rates[j].real = std::max(0.0, clamp_eps);
      continue;
    }
    const double overall = received / sent_known;
    rates[j].fake = std::clamp(
        shrink(counts.received_fake[j], counts.sent_fake, sigma[j], overall), clamp_eps, 1.0);
    rates[j].real = std::clamp(
        shrink(counts.received_real[j], counts.sent_real, sigma[j], overall), clamp_eps, 1.0);
  }
  return rates;
}

RateTable build_rate_table(const TargetCounts& counts, const RateOptions& options) {
  const auto selection = estimate_selection_rates(counts, options.sigma, options.clamp_eps);
  const auto accept = estimate_accept_rates(counts, options.phi, options.clamp_eps);

  RateTable table;
  table.sent_known = counts.sent_known();
  table.sent_fake = counts.sent_fake;
  table.sent_real = counts.sent_real;
  table.targets.resize(counts.size());
  for (NodeId j = 0; j < counts.size(); ++j) {
    auto& t = table.targets[j];
    t.select_fake = selection[j].fake;
    t.select_real = selection[j].real;
    t.accept_fake = accept[j].fake;
    t.accept_real = accept[j].real;
    t.informative = counts.received(j) > 0.0;
  }
  return table;
}

RateTable build_rate_table(const RequestGraph& graph, const LabelTable& labels,
                           const RateOptions& options) {
  return build_rate_table(accumulate_counts(graph, labels), options);
}

}  // namespace sybiledge
