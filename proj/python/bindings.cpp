#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "sybiledge/baselines.hpp"
#include "sybiledge/config.hpp"
#include "sybiledge/error.hpp"
#include "sybiledge/evaluation.hpp"
#include "sybiledge/experiment.hpp"
#include "sybiledge/graph.hpp"
#include "sybiledge/rates.hpp"
#include "sybiledge/scorer.hpp"
#include "sybiledge/synth.hpp"

namespace py = pybind11;
using namespace sybiledge;

namespace {

using EdgeTuple = std::tuple<NodeId, NodeId, bool>;
using Labels = std::vector<std::optional<double>>;

RequestGraph make_graph(std::size_t n, const std::vector<EdgeTuple>& edges) {
  std::vector<RequestEdge> e;
  e.reserve(edges.size());
  for (const auto& [s, t, a] : edges) e.push_back({s, t, a});
  return RequestGraph::build(n, e);
}

std::vector<EdgeTuple> edge_tuples(const RequestGraph& g) {
  std::vector<EdgeTuple> out;
  out.reserve(g.num_edges());
  for (const auto& e : g.edges()) out.emplace_back(e.source, e.target, e.accepted);
  return out;
}

Labels label_list(const LabelTable& t) { return {t.values().begin(), t.values().end()}; }

ConfidencePriors priors_from(const py::object& value) {
  if (py::isinstance<py::float_>(value) || py::isinstance<py::int_>(value)) {
    return ConfidencePriors::uniform(value.cast<double>());
  }
  return ConfidencePriors::per_target(value.cast<std::vector<double>>());
}

Prior prior_from(const py::object& value) {
  if (py::isinstance<py::float_>(value) || py::isinstance<py::int_>(value)) {
    return Prior::global(value.cast<double>());
  }
  return Prior::per_node(value.cast<std::vector<double>>());
}

ScoringConfig scoring_config(const py::object& prior, const std::string& variant, double clamp_eps,
                             bool explain, unsigned threads) {
  ScoringConfig c;
  c.prior = prior_from(prior);
  c.variant = parse_variant(variant);
  c.clamp_eps = clamp_eps;
  c.explain = explain;
  c.threads = threads;
  return c;
}

KeyValueConfig config_from_dict(const py::dict& d, const std::string& origin) {
  std::istringstream empty;
  auto kv = KeyValueConfig::parse(empty, origin);
  for (const auto& [k, v] : d) {
    std::string value;
    if (py::isinstance<py::bool_>(v)) {
      value = v.cast<bool>() ? "true" : "false";
    } else if (py::isinstance<py::list>(v) || py::isinstance<py::tuple>(v)) {
      for (const auto& item : v) {
        if (!value.empty()) value += ",";
        value += py::str(item).cast<std::string>();
      }
    } else {
      value = py::str(v).cast<std::string>();
    }
    kv.set(py::str(k).cast<std::string>(), value);
  }
  return kv;
}

}  // namespace

PYBIND11_MODULE(_sybiledge, m) {
  m.doc() = "Sybil detection from friend-request targets and responses.";

  // Messages start with the error code, e.g. "EmptyTrainingSet: ...".
  py::register_exception<Error>(m, "SybilEdgeError", PyExc_ValueError);

  py::class_<RequestGraph>(m, "RequestGraph")
      .def(py::init(&make_graph), py::arg("n"), py::arg("edges"),
           "Directed request graph from (source, target, accepted) tuples.")
      .def_property_readonly("num_nodes", &RequestGraph::num_nodes)
      .def_property_readonly("num_edges", &RequestGraph::num_edges)
      .def("edges", &edge_tuples)
      .def("out_degree", &RequestGraph::out_degree)
      .def("out", [](const RequestGraph& g, NodeId v) {
        if (v >= g.num_nodes()) throw Error(ErrorCode::UnknownNode, "node " + std::to_string(v));
        std::vector<std::pair<NodeId, bool>> out;
        for (const auto& nb : g.out(v)) out.emplace_back(nb.node, nb.accepted);
        return out;
      });

  py::class_<TargetRates>(m, "TargetRates")
      .def_readonly("select_fake", &TargetRates::select_fake)
      .def_readonly("select_real", &TargetRates::select_real)
      .def_readonly("accept_fake", &TargetRates::accept_fake)
      .def_readonly("accept_real", &TargetRates::accept_real)
      .def_readonly("informative", &TargetRates::informative)
      .def("__repr__", [](const TargetRates& r) {
        return "TargetRates(r_s=" + std::to_string(r.select_fake) + ", r_b=" + std::to_string(r.select_real) +
               ", a_s=" + std::to_string(r.accept_fake) + ", a_b=" + std::to_string(r.accept_real) + ")";
      });

  py::class_<RateTable>(m, "RateTable")
      .def("__len__", &RateTable::size)
      .def("__getitem__", [](const RateTable& t, NodeId j) {
        if (j >= t.size()) throw py::index_error();
        return t[j];
      })
      .def_readonly("sent_fake", &RateTable::sent_fake)
      .def_readonly("sent_real", &RateTable::sent_real)
      .def_readonly("sent_known", &RateTable::sent_known);

  py::class_<EdgeContribution>(m, "EdgeContribution")
      .def_readonly("target", &EdgeContribution::target)
      .def_readonly("accepted", &EdgeContribution::accepted)
      .def_property_readonly("selection", [](const EdgeContribution& c) { return c.evidence.selection; })
      .def_property_readonly("response", [](const EdgeContribution& c) { return c.evidence.response; });

  py::class_<UserScore>(m, "UserScore")
      .def_readonly("node", &UserScore::node)
      .def_readonly("p_fake", &UserScore::p_fake)
      .def_readonly("log_odds", &UserScore::log_odds)
      .def_readonly("edges_used", &UserScore::edges_used)
      .def_readonly("contributions", &UserScore::contributions);

  m.def(
      "train",
      [](const RequestGraph& g, const Labels& labels, const py::object& sigma, const py::object& phi,
         double clamp_eps) {
        RateOptions o;
        o.sigma = priors_from(sigma);
        o.phi = priors_from(phi);
        o.clamp_eps = clamp_eps;
        return build_rate_table(g, LabelTable(labels), o);
      },
      py::arg("graph"), py::arg("labels"), py::arg("sigma") = kDefaultSigma, py::arg("phi") = kDefaultPhi,
      py::arg("clamp_eps") = kDefaultClampEpsilon,
      "Per-target selection and accept rates from labeled senders. sigma/phi are a number "
      "(float('inf') allowed) or one value per node.");

  m.def(
      "score",
      [](const RequestGraph& g, const RateTable& rates, const std::optional<Labels>& labels,
         const std::optional<std::vector<NodeId>>& users, const py::object& prior, const std::string& variant,
         double clamp_eps, bool explain, unsigned threads) {
        const auto cfg = scoring_config(prior, variant, clamp_eps, explain, threads);
        if (users) return score_users(g, rates, *users, cfg).users;
        if (labels) return score_all(g, rates, LabelTable(*labels), cfg).users;
        std::vector<NodeId> all(g.num_nodes());
        for (NodeId v = 0; v < all.size(); ++v) all[v] = v;
        return score_users(g, rates, all, cfg).users;
      },
      py::arg("graph"), py::arg("rates"), py::arg("labels") = py::none(), py::arg("users") = py::none(),
      py::arg("prior") = 0.5, py::arg("variant") = "full", py::arg("clamp_eps") = kDefaultClampEpsilon,
      py::arg("explain") = false, py::arg("threads") = 1,
      "Posterior fake probabilities. Scores `users` if given, else the unlabeled nodes of `labels`, "
      "else every node.");

  m.def(
      "product_form_posterior",
      [](const RequestGraph& g, const RateTable& rates, NodeId user, const py::object& prior,
         const std::string& variant) {
        return product_form_posterior(g, rates, user, scoring_config(prior, variant, kDefaultClampEpsilon, false, 1));
      },
      py::arg("graph"), py::arg("rates"), py::arg("user"), py::arg("prior") = 0.5, py::arg("variant") = "full");

  m.def("roc_auc", [](const std::vector<double>& scores, const std::vector<std::uint8_t>& is_fake) {
    return roc_auc(scores, is_fake);
  }, py::arg("scores"), py::arg("is_fake"));

  m.def("reject_rate", &reject_rate, py::arg("graph"), py::arg("user"));

  m.def(
      "run_method",
      [](const std::string& method, const RequestGraph& g, const Labels& training,
         const std::vector<NodeId>& test_nodes, double sigma, double phi, std::optional<double> prior) {
        MethodOptions o;
        o.sigma = sigma;
        o.phi = phi;
        o.prior = prior;
        return run_method(parse_method(method), g, LabelTable(training), test_nodes, o);
      },
      py::arg("method"), py::arg("graph"), py::arg("training"), py::arg("test_nodes"),
      py::arg("sigma") = kDefaultSigma, py::arg("phi") = kDefaultPhi, py::arg("prior") = py::none(),
      "Fake-likeness scores (higher = more fake-like) from sybiledge, sybiledge_tr, reject_rate, "
      "sybil_rank or sybil_scar_c.");

  m.def(
      "generate",
      [](const py::dict& config) {
        const auto kv = config_from_dict(config, "<dict>");
        const auto cfg = synth_config_from(kv, false);
        kv.reject_unused();
        const auto s = build_scenario(cfg);
        py::dict out;
        out["graph"] = s.graph;
        out["truth"] = label_list(s.truth);
        out["training"] = label_list(s.training);
        out["dropped_pairs"] = s.dropped_pairs;
        return out;
      },
      py::arg("config"),
      "Synthetic scenario from scenario keys (generator, n, mean_degree, seed, ...). Returns a dict "
      "with graph, truth, training and dropped_pairs.");

  m.def(
      "experiment",
      [](const py::dict& config) {
        const auto kv = config_from_dict(config, "<dict>");
        const auto sc = sweep_config_from(kv);
        kv.reject_unused();
        return run_experiment(sc).to_json();
      },
      py::arg("config"), "Runs a grid, noise or prevalence sweep and returns the JSON report.");

  m.attr("DEFAULT_SIGMA") = kDefaultSigma;
  m.attr("DEFAULT_PHI") = kDefaultPhi;
}
