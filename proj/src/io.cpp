#include "sybiledge/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>

#include "sybiledge/error.hpp"

namespace sybiledge::io {

namespace {

[[noreturn]] void parse_fail(std::string_view origin, std::size_t line, const std::string& msg) {
  throw Error(ErrorCode::ParseError, std::string(origin) + ":" + std::to_string(line) + ": " + msg);
}

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  for (;;) {
    const auto tab = line.find('\t', start);
    fields.push_back(line.substr(start, tab == std::string_view::npos ? std::string_view::npos : tab - start));
    if (tab == std::string_view::npos) break;
    start = tab + 1;
  }
  return fields;
}

// Calls `row(fields, line_number)` for every data line.
template <typename Fn>
void for_each_row(std::istream& in, Fn&& row) {
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    row(split_tabs(line), number);
  }
}

std::optional<std::uint64_t> as_index(std::string_view s) {
  if (s.empty()) return std::nullopt;
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::InvalidArgument, "cannot open '" + path + "'");
  return in;
}

}  // namespace

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, ptr);
}

double parse_double(std::string_view text) {
  if (text == "inf" || text == "+inf" || text == "infinity") return std::numeric_limits<double>::infinity();
  if (text == "-inf") return -std::numeric_limits<double>::infinity();
  if (text == "nan") return std::numeric_limits<double>::quiet_NaN();
  double v = 0.0;
  const auto* begin = text.data();
  if (!text.empty() && text.front() == '+') ++begin;
  const auto [ptr, ec] = std::from_chars(begin, text.data() + text.size(), v);
  if (text.empty() || ec != std::errc() || ptr != text.data() + text.size()) {
    throw Error(ErrorCode::ParseError, "'" + std::string(text) + "' is not a number");
  }
  return v;
}

std::string provenance_header(std::string_view command_line, std::optional<std::uint64_t> seed) {
  std::string h = "# sybiledge " + std::string(kVersion) + " | command: " + std::string(command_line);
  h += " | seed: " + (seed ? std::to_string(*seed) : std::string("none"));
  return h + "\n";
}

NodeDictionary NodeDictionary::build(std::span<const std::string> names) {
  NodeDictionary d;
  std::uint64_t max_id = 0;
  bool any = false;
  for (const auto& name : names) {
    const auto v = as_index(name);
    if (!v || *v >= std::numeric_limits<NodeId>::max()) {
      d.numeric_ = false;
      break;
    }
    max_id = std::max(max_id, *v);
    any = true;
  }
  if (d.numeric_) {
    d.size_ = any ? static_cast<std::size_t>(max_id) + 1 : 0;
    return d;
  }
  for (const auto& name : names) {
    if (d.ids_.emplace(name, static_cast<NodeId>(d.names_.size())).second) d.names_.push_back(name);
  }
  d.size_ = d.names_.size();
  return d;
}

NodeDictionary NodeDictionary::identity(std::size_t n) {
  NodeDictionary d;
  d.size_ = n;
  return d;
}

std::optional<NodeId> NodeDictionary::find(std::string_view name) const {
  if (numeric_) {
    const auto v = as_index(name);
    if (!v || *v >= size_) return std::nullopt;
    return static_cast<NodeId>(*v);
  }
  const auto it = ids_.find(std::string(name));
  if (it == ids_.end()) return std::nullopt;
  return it->second;
}

NodeId NodeDictionary::id(std::string_view name) const {
  const auto v = find(name);
  if (!v) throw Error(ErrorCode::UnknownNode, "node '" + std::string(name) + "' is not in the dataset");
  return *v;
}

std::string NodeDictionary::name(NodeId id) const {
  return numeric_ ? std::to_string(id) : names_.at(id);
}

std::vector<EdgeRecord> read_edge_records(std::istream& in, std::string_view origin) {
  std::vector<EdgeRecord> records;
  for_each_row(in, [&](const std::vector<std::string_view>& f, std::size_t line) {
    if (f.size() != 3) parse_fail(origin, line, "expected source<TAB>target<TAB>response");
    if (f[0].empty() || f[1].empty()) parse_fail(origin, line, "empty node name");
    if (f[2] != "0" && f[2] != "1") parse_fail(origin, line, "response must be 0 or 1");
    records.push_back({std::string(f[0]), std::string(f[1]), f[2] == "1", line});
  });
  return records;
}

std::vector<LabelRecord> read_label_records(std::istream& in, std::string_view origin) {
  std::vector<LabelRecord> records;
  for_each_row(in, [&](const std::vector<std::string_view>& f, std::size_t line) {
    if (f.size() != 2) parse_fail(origin, line, "expected node<TAB>p_fake");
    double p = 0.0;
    try {
      p = parse_double(f[1]);
    } catch (const Error&) {
      parse_fail(origin, line, "p_fake '" + std::string(f[1]) + "' is not a number");
    }
    if (!(p >= 0.0 && p <= 1.0)) parse_fail(origin, line, "p_fake must lie in [0, 1]");
    records.push_back({std::string(f[0]), p, line});
  });
  return records;
}

Dataset load_dataset(const std::string& edges_path, std::span<const std::string> label_paths) {
  std::vector<EdgeRecord> edges;
  {
    auto in = open_input(edges_path);
    edges = read_edge_records(in, edges_path);
  }
  std::vector<std::vector<LabelRecord>> label_sets;
  for (const auto& path : label_paths) {
    auto in = open_input(path);
    label_sets.push_back(read_label_records(in, path));
  }

  std::vector<std::string> names;
  names.reserve(2 * edges.size());
  for (const auto& e : edges) {
    names.push_back(e.source);
    names.push_back(e.target);
  }
  for (const auto& set : label_sets) {
    for (const auto& l : set) names.push_back(l.node);
  }

  Dataset ds;
  ds.nodes = NodeDictionary::build(names);
  std::vector<RequestEdge> resolved;
  resolved.reserve(edges.size());
  for (const auto& e : edges) resolved.push_back({ds.nodes.id(e.source), ds.nodes.id(e.target), e.accepted});
  try {
    ds.graph = RequestGraph::build(ds.nodes.size(), resolved);
  } catch (const Error& err) {
    throw Error(err.code(), edges_path + ": " + err.detail());
  }

  for (std::size_t s = 0; s < label_sets.size(); ++s) {
    LabelTable table(ds.nodes.size());
    for (const auto& l : label_sets[s]) {
      const auto id = ds.nodes.id(l.node);
      if (table.is_known(id)) parse_fail(label_paths[s], l.line, "node '" + l.node + "' labeled twice");
      table.set(id, l.p_fake);
    }
    ds.labels.push_back(std::move(table));
  }
  return ds;
}

void write_edges(std::ostream& out, const RequestGraph& graph, const NodeDictionary& nodes) {
  for (const auto& e : graph.edges()) {
    out << nodes.name(e.source) << '\t' << nodes.name(e.target) << '\t' << (e.accepted ? 1 : 0) << '\n';
  }
}

void write_labels(std::ostream& out, const LabelTable& labels, const NodeDictionary& nodes) {
  out << "# node\tp_fake\n";
  for (NodeId v = 0; v < labels.size(); ++v) {
    if (labels[v]) out << nodes.name(v) << '\t' << format_double(*labels[v]) << '\n';
  }
}

void write_rate_table(std::ostream& out, const RateTable& rates, const NodeDictionary& nodes) {
  out << "# n_targets=" << rates.size() << " rho_L=" << format_double(rates.sent_known)
      << " rho_LS=" << format_double(rates.sent_fake) << " rho_LB=" << format_double(rates.sent_real)
      << '\n';
  out << "# target_id\tr_s\tr_b\ta_s\ta_b\tinformative\n";
  for (NodeId j = 0; j < rates.size(); ++j) {
    const auto& t = rates[j];
    out << nodes.name(j) << '\t' << format_double(t.select_fake) << '\t' << format_double(t.select_real)
        << '\t' << format_double(t.accept_fake) << '\t' << format_double(t.accept_real) << '\t'
        << (t.informative ? 1 : 0) << '\n';
  }
}

RateTable read_rate_table(std::istream& in, std::string_view origin, const NodeDictionary& nodes) {
  RateTable table;
  table.targets.assign(nodes.size(), TargetRates{0.5, 0.5, 0.5, 0.5, false});
  std::string line;
  std::size_t number = 0;
  bool any_row = false;
  while (std::getline(in, line)) {
    ++number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line.front() == '#') {
      if (line.find("n_targets=") == std::string::npos) continue;
      // "# n_targets=.. rho_L=.. rho_LS=.. rho_LB=.."
      std::string_view rest(line);
      auto value_of = [&](std::string_view key) -> std::optional<double> {
        const auto pos = rest.find(key);
        if (pos == std::string_view::npos) return std::nullopt;
        auto tail = rest.substr(pos + key.size());
        return parse_double(tail.substr(0, tail.find(' ')));
      };
      if (auto v = value_of(" rho_L=")) table.sent_known = *v;
      if (auto v = value_of(" rho_LS=")) table.sent_fake = *v;
      if (auto v = value_of(" rho_LB=")) table.sent_real = *v;
      continue;
    }
    const auto f = split_tabs(line);
    if (f.size() != 6) parse_fail(origin, number, "expected target_id, r_s, r_b, a_s, a_b, informative");
    any_row = true;
    const auto id = nodes.find(f[0]);
    if (!id) continue;
    TargetRates t;
    try {
      t.select_fake = parse_double(f[1]);
      t.select_real = parse_double(f[2]);
      t.accept_fake = parse_double(f[3]);
      t.accept_real = parse_double(f[4]);
    } catch (const Error& e) {
      parse_fail(origin, number, e.detail());
    }
    if (f[5] != "0" && f[5] != "1") parse_fail(origin, number, "informative must be 0 or 1");
    t.informative = f[5] == "1";
    for (const double r : {t.select_fake, t.select_real, t.accept_fake, t.accept_real}) {
      if (!(r >= 0.0 && r <= 1.0)) parse_fail(origin, number, "rates must lie in [0, 1]");
    }
    table.targets[*id] = t;
  }
  if (!any_row) throw Error(ErrorCode::ParseError, std::string(origin) + ": rate file has no rows");
  return table;
}

void write_scores(std::ostream& out, const ScoreTable& scores, const NodeDictionary& nodes) {
  out << "# node_id\tp_fake\tlog_odds\tn_edges_used\n";
  for (const auto& u : scores.users) {
    out << nodes.name(u.node) << '\t' << format_double(u.p_fake) << '\t' << format_double(u.log_odds)
        << '\t' << u.edges_used << '\n';
  }
}

void write_contributions(std::ostream& out, const ScoreTable& scores, const NodeDictionary& nodes) {
  out << "# node_id\ttarget_id\tresponse\tdelta_selection\tdelta_response\n";
  for (const auto& u : scores.users) {
    for (const auto& c : u.contributions) {
      out << nodes.name(u.node) << '\t' << nodes.name(c.target) << '\t' << (c.accepted ? 1 : 0) << '\t'
          << format_double(c.evidence.selection) << '\t' << format_double(c.evidence.response) << '\n';
    }
  }
}

void write_baseline_scores(std::ostream& out, std::span<const NodeId> users,
                           std::span<const double> scores, std::string_view method,
                           const NodeDictionary& nodes) {
  out << "# node_id\tscore\tmethod\n";
  for (std::size_t k = 0; k < users.size(); ++k) {
    out << nodes.name(users[k]) << '\t' << format_double(scores[k]) << '\t' << method << '\n';
  }
}

ScoreFile read_score_file(std::istream& in, std::string_view origin) {
  ScoreFile file;
  for_each_row(in, [&](const std::vector<std::string_view>& f, std::size_t line) {
    if (f.size() < 2) parse_fail(origin, line, "expected at least node_id<TAB>score");
    double s = 0.0;
    try {
      s = parse_double(f[1]);
    } catch (const Error& e) {
      parse_fail(origin, line, e.detail());
    }
    if (std::isnan(s)) parse_fail(origin, line, "score is NaN");
    if (f.size() == 3 && file.method.empty()) file.method = std::string(f[2]);
    file.rows.push_back({std::string(f[0]), s});
  });
  return file;
}

ConfidencePriors read_priors(std::istream& in, std::string_view origin, const NodeDictionary& nodes,
                             double fallback) {
  std::vector<double> values(nodes.size(), fallback);
  for_each_row(in, [&](const std::vector<std::string_view>& f, std::size_t line) {
    if (f.size() != 2) parse_fail(origin, line, "expected target_id<TAB>value");
    const auto id = nodes.find(f[0]);
    if (!id) return;
    double v = 0.0;
    try {
      v = parse_double(f[1]);
    } catch (const Error& e) {
      parse_fail(origin, line, e.detail());
    }
    if (!(v >= 0.0)) parse_fail(origin, line, "confidence prior must be >= 0");
    values[*id] = v;
  });
  return ConfidencePriors::per_target(std::move(values));
}

}  // namespace sybiledge::io
