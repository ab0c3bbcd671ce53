#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "citegcn/corpus.hpp"
#include "citegcn/errors.hpp"
#include "citegcn/eval.hpp"
#include "citegcn/features.hpp"
#include "citegcn/graph.hpp"
#include "citegcn/harness.hpp"
#include "citegcn/synth.hpp"
#include "citegcn/topics.hpp"

namespace py = pybind11;
using namespace citegcn;
using namespace citegcn::corpus;

namespace {

py::dict metrics_dict(const eval::MetricsReport& report) {
  py::dict out;
  out["mae"] = report.mae;
  out["rmse"] = report.rmse;
  out["mape"] = report.mape;
  out["r2"] = report.r2;
  out["adjusted_r2"] = report.adjusted_r2;
  out["n"] = report.n;
  out["p"] = report.p;
  out["mape_support"] = report.mape_support;
  return out;
}

}  // namespace

PYBIND11_MODULE(_citegcn, m) {
  m.doc() = "citation count prediction toolkit";

  py::register_exception<ConfigError>(m, "ConfigError");
  py::register_exception<DataError>(m, "DataError");
  py::register_exception<NumericError>(m, "NumericError");

  py::class_<PaperRecord>(m, "PaperRecord")
      .def(py::init<>())
      .def_readwrite("id", &PaperRecord::id)
      .def_readwrite("title", &PaperRecord::title)
      .def_readwrite("abstract", &PaperRecord::abstract)
      .def_readwrite("authors", &PaperRecord::authors)
      .def_readwrite("affiliations", &PaperRecord::affiliations)
      .def_readwrite("venue", &PaperRecord::venue)
      .def_readwrite("year", &PaperRecord::year)
      .def_readwrite("references", &PaperRecord::references)
      .def("__repr__", [](const PaperRecord& r) {
        return "<PaperRecord id=" + std::to_string(r.id) + " year=" +
               std::to_string(r.year) + ">";
      });

  py::class_<ParseDiagnostic>(m, "ParseDiagnostic")
      .def_readonly("line", &ParseDiagnostic::line)
      .def_readonly("message", &ParseDiagnostic::message);

  py::class_<CleanReport>(m, "CleanReport")
      .def_readonly("input_records", &CleanReport::input_records)
      .def_readonly("kept", &CleanReport::kept)
      .def_readonly("dropped_missing_author", &CleanReport::dropped_missing_author)
      .def_readonly("dropped_missing_venue", &CleanReport::dropped_missing_venue)
      .def_readonly("dropped_anomalous_productivity",
                    &CleanReport::dropped_anomalous_productivity)
      .def("to_json", &CleanReport::to_json);

  // ---------------------------------------------------------------------
  // Corpus handling

  m.def("parse_records_text", [](const std::string& text) {
    ParseResult res = parse_records_text(text);
    return py::make_tuple(res.records, res.diagnostics);
  });
  m.def("parse_records_file", [](const std::string& path) {
    ParseResult res = parse_records_file(path);
    return py::make_tuple(res.records, res.diagnostics);
  });
  m.def("clean", [](const std::vector<PaperRecord>& records) {
    auto [kept, report] = clean(records);
    return py::make_tuple(kept, report);
  });
  m.def("write_aminer", [](const std::vector<PaperRecord>& records) {
    std::ostringstream out;
    write_aminer(records, out);
    return out.str();
  });
  m.def("tokenize_text", &topics::tokenize_text,
        "Lowercased alphanumeric tokens, as used for topic modeling.");

  // ---------------------------------------------------------------------
  // Synthetic corpora

  m.def(
      "generate_corpus",
      [](const std::string& config_json) {
        auto cfg = harness::synth_config_from_json(config_json);
        auto result = synth::generate(cfg);
        std::ostringstream corpus_text, truth_csv;
        write_aminer(result.records, corpus_text);
        synth::write_truth_csv(result, truth_csv);
        return py::make_tuple(corpus_text.str(), truth_csv.str());
      },
      py::arg("config_json"),
      "Returns (corpus_text, truth_csv) from the \"synth\" config section.");

  // ---------------------------------------------------------------------
  // Metrics

  m.def("mae", &eval::mae, py::arg("y"), py::arg("y_hat"));
  m.def("rmse", &eval::rmse, py::arg("y"), py::arg("y_hat"));
  m.def("mape", &eval::mape, py::arg("y"), py::arg("y_hat"));
  m.def("r2", &eval::r2, py::arg("y"), py::arg("y_hat"));
  m.def("adjusted_r2", &eval::adjusted_r2, py::arg("r2"), py::arg("n"),
        py::arg("p"));
  m.def(
      "evaluate",
      [](const std::vector<double>& y, const std::vector<double>& y_hat,
         std::size_t p) { return metrics_dict(eval::evaluate(y, y_hat, p)); },
      py::arg("y"), py::arg("y_hat"), py::arg("p"),
      "All five regression metrics plus sample counts, as a dict.");

  m.def("h_index", &features::h_index, py::arg("counts"),
        "Largest h such that at least h entries are >= h.");

  // ---------------------------------------------------------------------
  // Graph

  m.def(
      "adjacency_fingerprint",
      [](const std::vector<PaperRecord>& records, int cutoff_year) {
        auto snapshot = build_snapshot(records, cutoff_year);
        std::vector<PaperId> ids;
        for (const auto& [id, rec] : snapshot.papers) ids.push_back(id);
        return graph::fingerprint(graph::normalized_adjacency(
            graph::build_citation_graph(snapshot, ids)));
      },
      py::arg("records"), py::arg("cutoff_year"),
      "Structure hash of the normalized adjacency at the given cutoff.");

  // ---------------------------------------------------------------------
  // Experiments

  m.def("default_config", [] {
    return harness::config_to_json(harness::ExperimentConfig{});
  });
  m.def(
      "run_experiment",
      [](const std::string& config_json) {
        auto config = harness::config_from_json(config_json);
        auto results = harness::run_experiment(config);
        py::list rows;
        for (const auto& row : results) {
          py::dict entry;
          entry["model"] = row.model;
          entry["fold"] = row.fold;
          entry["metrics"] = metrics_dict(row.metrics);
          rows.append(entry);
        }
        return rows;
      },
      py::arg("config_json"),
      "Full pipeline from a config JSON string; writes artifacts to the "
      "configured output directory and returns per-model metric rows.");
}
