#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "citegcn/corpus.hpp"
#include "citegcn/errors.hpp"
#include "citegcn/eval.hpp"
#include "citegcn/features.hpp"
#include "citegcn/format.hpp"
#include "citegcn/graph.hpp"
#include "citegcn/harness.hpp"
#include "citegcn/synth.hpp"
#include "citegcn/topics.hpp"

namespace fs = std::filesystem;

namespace {

// Output directory resolution: explicit flag, then CITEGCN_CACHE_DIR, then cwd.
std::string resolve_out_dir(const std::string& flag_value) {
  if (!flag_value.empty()) return flag_value;
  if (const char* env = std::getenv("CITEGCN_CACHE_DIR")) return env;
  return ".";
}

void ensure_dir(const std::string& path) {
  std::error_code ec;
  fs::create_directories(path, ec);
  if (ec) throw citegcn::DataError("cannot create directory " + path + ": " + ec.message());
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw citegcn::ConfigError("cannot read config file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

// Flags shared by the pipeline subcommands; each overrides the config file.
struct CommonFlags {
  std::string config_path;
  std::string out;
  std::string case_label;
  std::vector<std::string> models;
  std::int64_t seed = -1;
  std::string input;
  std::string snapshot;
  std::string truth;

  void attach(CLI::App* cmd, bool config_required) {
    auto* opt = cmd->add_option("--config", config_path, "experiment config (json)");
    if (config_required) opt->required();
    cmd->add_option("--out", out, "output directory (default: $CITEGCN_CACHE_DIR or .)");
    cmd->add_option("--case", case_label, "prediction case")
        ->check(CLI::IsMember({"1yr", "5yr", "10yr"}));
    cmd->add_option("--models", models, "models to run")->delimiter(',');
    cmd->add_option("--seed", seed, "master seed (overrides config)");
    cmd->add_option("--input", input, "corpus file (overrides config)");
    cmd->add_option("--snapshot", snapshot, "snapshot cache (overrides config)");
    cmd->add_option("--truth", truth, "ground-truth csv (overrides config)");
  }

  citegcn::harness::ExperimentConfig resolve() const {
    citegcn::harness::ExperimentConfig config;
    if (!config_path.empty())
      config = citegcn::harness::config_from_json(read_text_file(config_path));
    if (!out.empty()) config.out_dir = out;
    config.out_dir = resolve_out_dir(config.out_dir == "." ? "" : config.out_dir);
    if (!case_label.empty()) config.case_label = case_label;
    if (!models.empty()) config.models = models;
    if (seed >= 0) config.seed = static_cast<std::uint64_t>(seed);
    if (!input.empty()) config.input_path = input;
    if (!snapshot.empty()) config.snapshot_path = snapshot;
    if (!truth.empty()) config.truth_path = truth;
    return config;
  }
};

std::vector<citegcn::corpus::PaperRecord> load_cleaned_records(
    const citegcn::harness::ExperimentConfig& config) {
  using namespace citegcn::corpus;
  if (!config.input_path.empty()) {
    ParseResult parsed = parse_records_file(config.input_path);
    for (const auto& d : parsed.diagnostics)
      std::cerr << config.input_path << ":" << d.line << ": " << d.message << "\n";
    if (parsed.records.empty())
      throw citegcn::DataError("no usable records in " + config.input_path);
    return clean(parsed.records).first;
  }
  if (!config.snapshot_path.empty()) {
    CorpusSnapshot snap = load_snapshot(config.snapshot_path);
    std::vector<PaperRecord> records;
    records.reserve(snap.papers.size());
    for (const auto& [id, rec] : snap.papers) records.push_back(rec);
    return records;
  }
  throw citegcn::ConfigError("either --input or --snapshot is required");
}

int cmd_ingest(const std::string& input, const std::string& out_flag, bool quiet) {
  using namespace citegcn::corpus;
  const std::string out_dir = resolve_out_dir(out_flag);
  ensure_dir(out_dir);

  ParseResult parsed = parse_records_file(input);
  for (const auto& d : parsed.diagnostics)
    std::cerr << input << ":" << d.line << ": " << d.message << "\n";
  if (parsed.records.empty())
    throw citegcn::DataError("no usable records in " + input);

  auto [records, report] = clean(parsed.records);
  if (records.empty()) throw citegcn::DataError("all records dropped by cleaning");

  int max_year = records.front().year;
  for (const auto& rec : records) max_year = std::max(max_year, rec.year);
  CorpusSnapshot snap = build_snapshot(records, max_year);

  const std::string cache_path = (fs::path(out_dir) / "snapshot.bin").string();
  save_snapshot(snap, cache_path);

  std::ofstream rf(fs::path(out_dir) / "clean_report.json");
  rf << report.to_json() << "\n";

  if (!quiet) {
    std::cout << report.to_json() << "\n";
    std::cout << "snapshot: " << cache_path << " (" << snap.papers.size()
              << " papers, cutoff " << snap.cutoff_year << ")\n";
  }
  return 0;
}

int cmd_synth(const CommonFlags& flags, bool quiet) {
  citegcn::synth::SynthConfig config;
  if (!flags.config_path.empty())
    config = citegcn::harness::synth_config_from_json(read_text_file(flags.config_path));
  if (flags.seed >= 0) config.seed = static_cast<std::uint64_t>(flags.seed);

  const std::string out_dir = resolve_out_dir(flags.out);
  ensure_dir(out_dir);

  auto result = citegcn::synth::generate(config);

  const fs::path corpus_path = fs::path(out_dir) / "corpus_synth.txt";
  {
    std::ofstream out(corpus_path, std::ios::binary);
    if (!out) throw citegcn::DataError("cannot write " + corpus_path.string());
    citegcn::corpus::write_aminer(result.records, out);
  }
  const fs::path truth_path = fs::path(out_dir) / "truth.csv";
  {
    std::ofstream out(truth_path, std::ios::binary);
    if (!out) throw citegcn::DataError("cannot write " + truth_path.string());
    citegcn::synth::write_truth_csv(result, out);
  }
  if (!quiet)
    std::cout << "synth: " << result.records.size() << " papers, cutoff "
              << result.cutoff_year << " -> " << corpus_path.string() << ", "
              << truth_path.string() << "\n";
  return 0;
}

int cmd_topics(const CommonFlags& flags, bool quiet) {
  auto config = flags.resolve();
  ensure_dir(config.out_dir);
  auto cleaned = load_cleaned_records(config);

  const auto window = config.custom_window
                          ? *config.custom_window
                          : citegcn::corpus::case_window(config.case_label);
  auto snapshot = citegcn::corpus::build_snapshot(cleaned, window.window_end);

  std::vector<std::vector<std::string>> docs;
  std::vector<citegcn::corpus::PaperId> ids;
  for (const auto& [id, rec] : snapshot.papers) {
    ids.push_back(id);
    docs.push_back(citegcn::topics::tokenize(rec));
  }
  citegcn::topics::LdaConfig lda = config.lda;
  lda.seed = config.seed ^ 0x10da;
  auto model = citegcn::topics::fit_lda(docs, lda);
  auto doc_topics = citegcn::topics::compute_doc_topics(
      model, snapshot, config.lda.infer_iterations, config.seed ^ 0x10db);

  const fs::path model_path = fs::path(config.out_dir) / "topic_model.bin";
  citegcn::topics::save_topic_model(model, model_path.string());
  const fs::path mix_path = fs::path(config.out_dir) / "doc_topics.csv";
  {
    std::ofstream out(mix_path, std::ios::binary);
    if (!out) throw citegcn::DataError("cannot write " + mix_path.string());
    citegcn::topics::write_doc_topics_csv(doc_topics, out);
  }
  if (!quiet)
    std::cout << "topics: " << model.num_topics << " topics over " << ids.size()
              << " docs -> " << model_path.string() << ", " << mix_path.string()
              << "\n";
  return 0;
}

int cmd_features(const CommonFlags& flags, bool quiet) {
  auto config = flags.resolve();
  ensure_dir(config.out_dir);
  auto cleaned = load_cleaned_records(config);
  auto data = citegcn::harness::prepare_case(cleaned, config);

  const fs::path feat_path = fs::path(config.out_dir) / "features.csv";
  {
    std::ofstream out(feat_path, std::ios::binary);
    if (!out) throw citegcn::DataError("cannot write " + feat_path.string());
    citegcn::features::write_features_csv(data.feature_matrix, out);
  }
  const fs::path edge_path = fs::path(config.out_dir) / "edges.csv";
  {
    std::ofstream out(edge_path, std::ios::binary);
    if (!out) throw citegcn::DataError("cannot write " + edge_path.string());
    citegcn::graph::write_edge_list(data.citation_graph, out);
  }
  const fs::path stats_path = fs::path(config.out_dir) / "norm_stats.json";
  {
    std::ofstream out(stats_path, std::ios::binary);
    out << citegcn::features::norm_stats_json(data.feature_matrix) << "\n";
  }
  if (!quiet)
    std::cout << "features: " << data.feature_matrix.node_ids.size() << " rows x "
              << data.feature_matrix.columns.size() << " columns -> "
              << feat_path.string() << " (graph fingerprint "
              << citegcn::graph::fingerprint(data.adjacency) << ")\n";
  return 0;
}

int cmd_train(const CommonFlags& flags, bool quiet) {
  auto config = flags.resolve();
  ensure_dir(config.out_dir);
  ensure_dir((fs::path(config.out_dir) / "models").string());
  auto cleaned = load_cleaned_records(config);
  auto data = citegcn::harness::prepare_case(cleaned, config);

  for (const auto& name : config.models) {
    const fs::path model_path =
        fs::path(config.out_dir) / "models" / (name + "_" + config.case_label + ".bin");
    auto result = citegcn::harness::run_model(name, data, config, model_path.string());
    if (!result.loss_history.empty()) {
      std::ofstream lh(fs::path(config.out_dir) /
                       ("loss_" + name + "_" + config.case_label + ".csv"));
      lh << "epoch,loss\n";
      for (std::size_t e = 0; e < result.loss_history.size(); ++e)
        lh << e << ',' << citegcn::format_double(result.loss_history[e]) << "\n";
    }
    if (!quiet)
      std::cout << "train " << name << ": saved " << model_path.string()
                << " (test mae " << citegcn::format_double(result.metrics.mae)
                << ")\n";
  }
  return 0;
}

int cmd_evaluate(const CommonFlags& flags, const std::vector<std::string>& model_files,
                 bool quiet) {
  auto config = flags.resolve();
  ensure_dir(config.out_dir);
  auto cleaned = load_cleaned_records(config);
  auto data = citegcn::harness::prepare_case(cleaned, config);

  const fs::path csv_path = fs::path(config.out_dir) /
                            ("evaluation_" + config.case_label + ".csv");
  std::ofstream csv(csv_path, std::ios::binary);
  if (!csv) throw citegcn::DataError("cannot write " + csv_path.string());
  citegcn::eval::write_metrics_csv_header(csv);
  for (const auto& path : model_files) {
    auto metrics = citegcn::harness::evaluate_saved_model(path, data, config);
    const std::string label = fs::path(path).stem().string();
    citegcn::eval::write_metrics_csv_row(label, config.case_label, "final",
                                         metrics, csv);
    if (!quiet)
      std::cout << "evaluate " << label << ": "
                << citegcn::eval::to_json(metrics) << "\n";
  }
  return 0;
}

int cmd_run(const CommonFlags& flags, bool quiet) {
  auto config = flags.resolve();
  ensure_dir(config.out_dir);
  auto results = citegcn::harness::run_experiment(config);
  if (!quiet) {
    std::cout << "run: wrote "
              << (fs::path(config.out_dir) / ("results_" + config.case_label + ".csv")).string()
              << " (" << results.size() << " rows)\n";
    for (const auto& r : results)
      if (r.fold == "final")
        std::cout << "  " << r.model << " mae "
                  << citegcn::format_double(r.metrics.mae) << " rmse "
                  << citegcn::format_double(r.metrics.rmse) << " r2 "
                  << citegcn::format_double(r.metrics.r2) << "\n";
  }
  return 0;
}

int cmd_report(const std::vector<std::string>& csv_paths, const std::string& out_flag,
               bool quiet) {
  std::vector<std::vector<citegcn::harness::ReportRow>> inputs;
  for (const auto& path : csv_paths) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw citegcn::DataError("cannot read " + path);
    try {
      inputs.push_back(citegcn::harness::read_metrics_csv(in));
    } catch (const citegcn::DataError& e) {
      throw citegcn::DataError(path + ": " + e.what());
    }
  }
  auto merged = citegcn::harness::merge_reports(inputs);

  const std::string out_dir = resolve_out_dir(out_flag);
  ensure_dir(out_dir);
  const fs::path json_path = fs::path(out_dir) / "report.json";
  {
    std::ofstream out(json_path, std::ios::binary);
    out << citegcn::harness::report_to_json(merged) << "\n";
  }
  citegcn::harness::write_report_text(merged, std::cout);
  if (!quiet)
    std::cout << "report: " << merged.rows.size() << " rows -> "
              << json_path.string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"citation count prediction toolkit"};
  app.require_subcommand(1);

  bool quiet = false;
  app.add_flag("-q,--quiet", quiet, "suppress progress output");
  app.fallthrough();

  auto* ingest = app.add_subcommand("ingest", "parse, clean and cache a corpus");
  std::string ingest_input;
  std::string ingest_out;
  ingest->add_option("--input", ingest_input, "corpus file (AMiner v1 or JSONL, optionally gzipped)")
      ->required();
  ingest->add_option("--out", ingest_out, "output directory (default: $CITEGCN_CACHE_DIR or .)");

  auto* synth = app.add_subcommand("synth", "generate a synthetic corpus with ground truth");
  CommonFlags synth_flags;
  synth_flags.attach(synth, false);

  auto* topics = app.add_subcommand("topics", "fit the topic model and write document mixtures");
  CommonFlags topics_flags;
  topics_flags.attach(topics, true);

  auto* features = app.add_subcommand("features", "compute the per-paper feature matrix and graph");
  CommonFlags features_flags;
  features_flags.attach(features, true);

  auto* train = app.add_subcommand("train", "train models and save them with loss histories");
  CommonFlags train_flags;
  train_flags.attach(train, true);

  auto* evaluate = app.add_subcommand("evaluate", "evaluate saved models on the held-out split");
  CommonFlags evaluate_flags;
  evaluate_flags.attach(evaluate, true);
  std::vector<std::string> evaluate_models;
  evaluate->add_option("model_files", evaluate_models, "saved model files")->required();

  auto* run = app.add_subcommand("run", "run the full experiment pipeline");
  CommonFlags run_flags;
  run_flags.attach(run, true);

  auto* report = app.add_subcommand("report", "merge metrics CSVs into a comparison table");
  std::vector<std::string> report_csvs;
  std::string report_out;
  report->add_option("csv_files", report_csvs, "metrics CSV files")->required();
  report->add_option("--out", report_out, "output directory (default: $CITEGCN_CACHE_DIR or .)");

  try {
    app.parse(argc, argv);
    if (ingest->parsed()) return cmd_ingest(ingest_input, ingest_out, quiet);
    if (synth->parsed()) return cmd_synth(synth_flags, quiet);
    if (topics->parsed()) return cmd_topics(topics_flags, quiet);
    if (features->parsed()) return cmd_features(features_flags, quiet);
    if (train->parsed()) return cmd_train(train_flags, quiet);
    if (evaluate->parsed()) return cmd_evaluate(evaluate_flags, evaluate_models, quiet);
    if (run->parsed()) return cmd_run(run_flags, quiet);
    if (report->parsed()) return cmd_report(report_csvs, report_out, quiet);
    return 0;
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  } catch (const citegcn::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const citegcn::DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 3;
  } catch (const citegcn::NumericError& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
