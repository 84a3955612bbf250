#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "sybiledge/baselines.hpp"
#include "sybiledge/graph.hpp"
#include "sybiledge/rates.hpp"
#include "sybiledge/scorer.hpp"

// Tab-separated file formats. Lines starting with '#' are comments/headers;
// blank lines are ignored. Node columns hold names; when every name in a
// dataset is a non-negative integer the names are used directly as ids.
namespace sybiledge::io {

inline constexpr std::string_view kVersion = "0.1.0";

/// Shortest round-trippable decimal text; "inf"/"-inf"/"nan" for non-finite values.
std::string format_double(double value);
/// Accepts everything format_double produces. Throws Error{ParseError}.
double parse_double(std::string_view text);

/// "# sybiledge <version> | command: <cmd> | seed: <seed>"
std::string provenance_header(std::string_view command_line, std::optional<std::uint64_t> seed);

class NodeDictionary {
 public:
  /// Numeric mode (ids = integer names, n = max + 1) when every name is a
  /// non-negative integer, otherwise ids follow first appearance.
  static NodeDictionary build(std::span<const std::string> names);
  static NodeDictionary identity(std::size_t n);

  std::size_t size() const { return size_; }
  bool numeric() const { return numeric_; }
  std::optional<NodeId> find(std::string_view name) const;
  NodeId id(std::string_view name) const;  // throws Error{UnknownNode}
  std::string name(NodeId id) const;

 private:
  bool numeric_ = true;
  std::size_t size_ = 0;
  std::vector<std::string> names_;
  std::unordered_map<std::string, NodeId> ids_;
};

struct EdgeRecord {
  std::string source;
  std::string target;
  bool accepted = false;
  std::size_t line = 0;
};

struct LabelRecord {
  std::string node;
  double p_fake = 0.0;
  std::size_t line = 0;
};

/// `source<TAB>target<TAB>response`, response in {0, 1}.
std::vector<EdgeRecord> read_edge_records(std::istream& in, std::string_view origin);
/// `node<TAB>p_fake`, p_fake in [0, 1].
std::vector<LabelRecord> read_label_records(std::istream& in, std::string_view origin);

struct Dataset {
  NodeDictionary nodes;
  RequestGraph graph;
  std::vector<LabelTable> labels;  // one per label file, in argument order
};

/// Reads one edge file and any number of label files sharing one node dictionary.
Dataset load_dataset(const std::string& edges_path, std::span<const std::string> label_paths);

void write_edges(std::ostream& out, const RequestGraph& graph, const NodeDictionary& nodes);
void write_labels(std::ostream& out, const LabelTable& labels, const NodeDictionary& nodes);

/// Globals line "# n_targets=.. rho_L=.. rho_LS=.. rho_LB=..", a column line,
/// then `target_id r_s r_b a_s a_b informative` per target.
void write_rate_table(std::ostream& out, const RateTable& rates, const NodeDictionary& nodes);
/// Rows for names outside `nodes` are ignored; nodes without a row are
/// non-informative.
RateTable read_rate_table(std::istream& in, std::string_view origin, const NodeDictionary& nodes);

/// `node_id p_fake log_odds n_edges_used`
void write_scores(std::ostream& out, const ScoreTable& scores, const NodeDictionary& nodes);
/// `node_id target_id response delta_selection delta_response`
void write_contributions(std::ostream& out, const ScoreTable& scores, const NodeDictionary& nodes);
/// `node_id score method`
void write_baseline_scores(std::ostream& out, std::span<const NodeId> users,
                           std::span<const double> scores, std::string_view method,
                           const NodeDictionary& nodes);

struct ScoreRecord {
  std::string node;
  double score = 0.0;
};

struct ScoreFile {
  std::string method;  // third column of baseline files, else empty
  std::vector<ScoreRecord> rows;
};

/// Reads the first two columns of either score format.
ScoreFile read_score_file(std::istream& in, std::string_view origin);

/// Per-target confidence priors: `target_id value`; unlisted targets get `fallback`.
ConfidencePriors read_priors(std::istream& in, std::string_view origin, const NodeDictionary& nodes,
                             double fallback);

}  // namespace sybiledge::io
