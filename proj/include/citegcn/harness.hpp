#pragma once

// Experiment orchestration: wires corpus -> topics -> graph -> features ->
// models -> metrics into deterministic, scriptable pipelines behind the CLI.
// Every stage failure is re-thrown with the stage name attached, and a whole
// run is a pure function of (input bytes, config, seed).

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "citegcn/baselines.hpp"
#include "citegcn/corpus.hpp"
#include "citegcn/eval.hpp"
#include "citegcn/features.hpp"
#include "citegcn/gcn.hpp"
#include "citegcn/graph.hpp"
#include "citegcn/synth.hpp"
#include "citegcn/topics.hpp"

namespace citegcn::harness {

struct ExperimentConfig {
  std::string input_path;     // raw corpus (text, jsonl, either gzipped)
  std::string snapshot_path;  // prebuilt snapshot cache, alternative input
  std::string truth_path;     // ground-truth csv from the generator
  bool use_planted_targets = false;  // truth csv column: planted vs future
  std::string case_label = "5yr";
  std::optional<corpus::CaseWindow> custom_window;
  std::vector<std::string> models = {"lr", "rf", "gbt", "dnn", "gcn"};
  std::size_t cv_folds = 0;  // per-fold rows within the training portion
  double ridge_lambda = 1e-8;
  bool log_targets = false;  // one transform policy shared by every model
  std::string venue_ranks_path;
  topics::LdaConfig lda = topics::LdaConfig::with_topics(50);
  gcn::TrainConfig gcn_train;
  baselines::RandomForestConfig rf;
  baselines::GbtConfig gbt;
  baselines::DnnConfig dnn;
  std::uint64_t seed = 0;
  std::string out_dir = ".";
};

// Strict JSON schema: unknown keys anywhere are a configuration error, so
// typos surface instead of silently keeping defaults.
ExperimentConfig config_from_json(const std::string& text);
std::string config_to_json(const ExperimentConfig& config);

// The generator section of the same config file.
synth::SynthConfig synth_config_from_json(const std::string& text);

// Everything the models consume for one case, fully materialized.
struct CaseData {
  corpus::CorpusSnapshot snapshot;
  corpus::CaseWindow window;
  corpus::SplitSpec split;
  graph::CitationGraph citation_graph;
  graph::NormalizedAdjacency adjacency;
  topics::TopicModel topic_model;
  topics::DocTopics doc_topics;
  features::FeatureMatrix feature_matrix;   // normalized, all snapshot nodes
  std::vector<double> node_targets;         // per node; 0 outside the sample
  std::vector<std::size_t> train_rows;      // node indices
  std::vector<std::size_t> test_rows;
  std::vector<double> train_targets;
  std::vector<double> test_targets;
};

// Builds the case from cleaned full-timeline records. Targets come from the
// truth csv when one is configured, otherwise from the horizon extension of
// the records themselves.
CaseData prepare_case(const std::vector<corpus::PaperRecord>& cleaned,
                      const ExperimentConfig& config);

struct ModelResult {
  std::string model;
  std::string fold;  // "final" or "cv<k>"
  eval::MetricsReport metrics;
  std::vector<double> test_predictions;
  std::vector<double> loss_history;  // gcn and dnn only
};

// Trains one model and scores it on the held-out rows; save_path, when given,
// receives the fitted model in its binary format.
ModelResult run_model(const std::string& name, const CaseData& data,
                      const ExperimentConfig& config,
                      const std::string& save_path = "");

// Every configured model, plus cross-validation fold rows when cv_folds > 0.
// A nonempty model_save_dir receives each final-fold model as
// <name>_<case>.bin.
std::vector<ModelResult> run_case(const CaseData& data,
                                  const ExperimentConfig& config,
                                  const std::string& model_save_dir = "");

// Loads a saved model of any supported kind (sniffed from its header) and
// scores it on the case's held-out rows.
eval::MetricsReport evaluate_saved_model(const std::string& path,
                                         const CaseData& data,
                                         const ExperimentConfig& config);

// Full pipeline: load/clean input, prepare the case, run the models, write
// results_<case>.csv, per-model metrics json, loss histories, and model
// files under out_dir. Returns the in-memory results.
std::vector<ModelResult> run_experiment(const ExperimentConfig& config);

void write_results_csv(const std::string& case_label,
                       const std::vector<ModelResult>& results,
                       std::ostream& out);

// ---------------------------------------------------------------------------
// Report merging

struct ReportRow {
  std::string model;
  std::string case_label;
  std::string fold;
  eval::MetricsReport metrics;

  bool operator==(const ReportRow&) const = default;
};

std::vector<ReportRow> read_metrics_csv(std::istream& in);

struct MergedReport {
  std::vector<ReportRow> rows;  // deduplicated, sorted by case, model, fold
  // Flags aligned to rows: {mae, rmse, mape, r2, adjusted_r2} best-in-case
  // over the final rows.
  std::vector<std::array<bool, 5>> best;
};

MergedReport merge_reports(const std::vector<std::vector<ReportRow>>& inputs);
void write_report_text(const MergedReport& report, std::ostream& out);
std::string report_to_json(const MergedReport& report);

}  // namespace citegcn::harness
