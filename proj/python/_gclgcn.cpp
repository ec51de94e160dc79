// SPDX-License-Identifier: Apache-2.0
#include <pybind11/eigen.h>
#include <pybind11/operators.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "gclgcn/config.hpp"
#include "gclgcn/experiments.hpp"

namespace py = pybind11;
using namespace gclgcn;

namespace {

std::vector<Edge> to_edges(const std::vector<std::pair<std::size_t, std::size_t>>& pairs) {
  std::vector<Edge> out;
  out.reserve(pairs.size());
  for (const auto& [u, v] : pairs) out.push_back({u, v});
  return out;
}

py::dict metrics_dict(const MetricRow& m) {
  py::dict d;
  d["acc"] = m.acc;
  d["nmi"] = m.nmi;
  d["ari"] = m.ari;
  d["f1"] = m.f1;
  d["composite"] = m.composite();
  return d;
}

py::dict loss_dict(const LossParts& l) {
  py::dict d;
  d["L"] = l.total;
  d["L_AE"] = l.ae;
  d["L_w"] = l.w;
  d["L_a1"] = l.a1;
  d["L_a2"] = l.a2;
  d["L_clu"] = l.clu;
  d["L_con"] = l.con;
  return d;
}

NmiNormalization nmi_mode(const std::string& s) {
  if (s == "geometric") return NmiNormalization::Geometric;
  if (s == "arithmetic") return NmiNormalization::Arithmetic;
  throw ConfigError("nmi must be geometric or arithmetic");
}

std::vector<CentralityMeasure> measures(const std::vector<std::string>& names) {
  std::vector<CentralityMeasure> out;
  for (const auto& n : names) out.push_back(parse_centrality_measure(n));
  return out;
}

}  // namespace

PYBIND11_MODULE(_gclgcn, m) {
  m.doc() = "Deep graph clustering with GCN, attention and contrastive channels";

  auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
  py::register_exception<ParseError>(m, "ParseError", base.ptr());
  py::register_exception<NumericError>(m, "NumericError", base.ptr());
  py::register_exception<MismatchError>(m, "MismatchError", base.ptr());
  py::register_exception<ContractError>(m, "ContractError", base.ptr());
  py::register_exception<DimensionError>(m, "DimensionError", base.ptr());

  py::class_<Graph>(m, "Graph")
      .def(py::init([](const Matrix& features, const std::vector<std::pair<std::size_t, std::size_t>>& edges,
                       std::optional<std::vector<int>> labels) {
             return Graph(features, to_edges(edges), std::move(labels));
           }),
           py::arg("features"), py::arg("edges"), py::arg("labels") = py::none())
      .def_property_readonly("n", &Graph::n)
      .def_property_readonly("f", &Graph::f)
      .def_property_readonly("features", &Graph::features)
      .def_property_readonly("edges",
                             [](const Graph& g) {
                               std::vector<std::pair<std::size_t, std::size_t>> out;
                               for (const auto& e : g.edges()) out.emplace_back(e.u, e.v);
                               return out;
                             })
      .def_property_readonly("labels", &Graph::labels)
      .def("save", [](const Graph& g, const std::filesystem::path& dir) { save_graph(g, dir); }, py::arg("dir"))
      .def("__repr__", [](const Graph& g) {
        return "<Graph n=" + std::to_string(g.n()) + " f=" + std::to_string(g.f()) +
               " edges=" + std::to_string(g.edges().size()) + ">";
      });

  m.def("load_graph", &load_graph, py::arg("features"), py::arg("edges"), py::arg("labels") = py::none());

  m.def(
      "generate_sbm",
      [](const std::vector<std::size_t>& blocks, double p_in, double p_out, std::size_t dims, double separation,
         double noise, std::uint64_t seed) {
        SbmSpec spec;
        spec.block_sizes = blocks;
        spec.p_in = p_in;
        spec.p_out = p_out;
        spec.noise_std = noise;
        spec.block_means = separated_block_means(blocks.size(), dims, separation * noise);
        spec.validate();
        return generate_sbm(spec, seed);
      },
      py::arg("blocks"), py::arg("p_in"), py::arg("p_out"), py::arg("dims") = 16, py::arg("separation") = 3.0,
      py::arg("noise") = 1.0, py::arg("seed") = 0);

  m.def(
      "centrality",
      [](const Graph& g, const std::vector<std::string>& names) { return composite_centrality(g, measures(names)).values; },
      py::arg("graph"), py::arg("measures") = std::vector<std::string>{"degree", "betweenness", "closeness"});
  m.def("normalized_adjacency", [](const Graph& g) { return normalize_adjacency(g).matrix; }, py::arg("graph"));

  py::class_<ConfigFile>(m, "Config")
      .def_static("from_text", &parse_config_text, py::arg("text"), py::arg("base_dir") = std::filesystem::path{})
      .def_static("from_file", &parse_config, py::arg("path"))
      .def_static("preset", [](const std::string& name) { return parse_config_text("preset = " + name); },
                  py::arg("name"))
      .def(
          "set",
          [](ConfigFile& c, const std::string& key, const std::string& value) {
            apply_setting(c, key, value);
            c.experiment.validate();
          },
          py::arg("key"), py::arg("value"))
      .def("to_text", &write_config)
      .def_property_readonly("dataset", [](const ConfigFile& c) { return c.dataset; })
      .def_property_readonly("epochs", [](const ConfigFile& c) { return c.experiment.epochs; })
      .def_property_readonly("seed", [](const ConfigFile& c) { return c.experiment.seed; })
      .def_property_readonly("lr", [](const ConfigFile& c) { return c.experiment.lr; })
      .def_property_readonly("variant", [](const ConfigFile& c) { return std::string(to_string(c.experiment.variant)); })
      .def_property_readonly("fusion",
                             [](const ConfigFile& c) {
                               return py::make_tuple(c.experiment.lambda, c.experiment.theta, c.experiment.gamma);
                             })
      .def(py::self == py::self)
      .def("__repr__", [](const ConfigFile& c) { return "<Config\n" + write_config(c) + ">"; });

  m.def("preset_names", &preset_names);

  m.def(
      "train",
      [](const Graph& g, const ConfigFile& cfg) {
        TrainResult r;
        {
          py::gil_scoped_release release;
          r = train(g, cfg.experiment);
        }
        py::list history;
        for (const auto& h : r.history) {
          py::dict row = loss_dict(h.loss);
          row["epoch"] = h.epoch;
          if (h.metrics) row["metrics"] = metrics_dict(*h.metrics);
          history.append(row);
        }
        py::dict out;
        out["labels"] = r.labels;
        out["initial_labels"] = r.initial_labels;
        out["q"] = r.q;
        out["history"] = history;
        return out;
      },
      py::arg("graph"), py::arg("config"));

  m.def(
      "evaluate",
      [](const std::vector<int>& pred, const std::vector<int>& truth, const std::string& nmi) {
        return metrics_dict(evaluate(pred, truth, nmi_mode(nmi)));
      },
      py::arg("pred"), py::arg("truth"), py::arg("nmi") = "geometric");

  m.def(
      "kmeans",
      [](const Matrix& points, std::size_t k, std::uint64_t seed) {
        const KMeansResult r = kmeans(points, k, seed);
        return py::make_tuple(r.labels, r.centroids, r.sse);
      },
      py::arg("points"), py::arg("k"), py::arg("seed") = 0);

  m.def("target_distribution", &target_distribution, py::arg("q"));

  m.def(
      "ablation_study",
      [](const Graph& g, const ConfigFile& c, const std::string& dataset) {
        py::gil_scoped_release release;
        return ablation_study(g, c.experiment, dataset).csv();
      },
      py::arg("graph"), py::arg("config"), py::arg("dataset") = "graph");
  m.def(
      "encoding_study",
      [](const Graph& g, const ConfigFile& c, const std::string& dataset) {
        py::gil_scoped_release release;
        return encoding_study(g, c.experiment, dataset).csv();
      },
      py::arg("graph"), py::arg("config"), py::arg("dataset") = "graph");
  m.def(
      "layer_study",
      [](const Graph& g, const ConfigFile& c, const std::vector<std::size_t>& depths, const std::string& dataset) {
        py::gil_scoped_release release;
        return layer_study(g, c.experiment, dataset, depths).csv();
      },
      py::arg("graph"), py::arg("config"), py::arg("depths") = std::vector<std::size_t>{1, 2, 3, 4},
      py::arg("dataset") = "graph");
  m.def(
      "sweep_loss_weights",
      [](const Graph& g, const ConfigFile& c, std::optional<std::vector<double>> alphas,
         std::optional<std::vector<double>> betas, const std::string& dataset) {
        py::gil_scoped_release release;
        const auto a = alphas.value_or(loss_weight_values());
        const auto b = betas.value_or(loss_weight_values());
        return sweep_loss_weights(g, c.experiment, dataset, a, b).csv();
      },
      py::arg("graph"), py::arg("config"), py::arg("alphas") = py::none(), py::arg("betas") = py::none(),
      py::arg("dataset") = "graph");
  m.def(
      "sweep_fusion",
      [](const Graph& g, const ConfigFile& c, const std::vector<double>& lambdas, const std::vector<double>& thetas,
         const std::string& dataset) {
        std::vector<std::string> notes;
        std::string csv;
        {
          py::gil_scoped_release release;
          csv = sweep_fusion(g, c.experiment, dataset, lambdas, thetas, &notes).csv();
        }
        return py::make_tuple(csv, notes);
      },
      py::arg("graph"), py::arg("config"), py::arg("lambdas"), py::arg("thetas"), py::arg("dataset") = "graph");
}
