#include "citegcn/harness.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>

#include "citegcn/errors.hpp"
#include "citegcn/format.hpp"
#include "citegcn/rng.hpp"
#include "json.hpp"

namespace citegcn::harness {

namespace {

// Seed substreams so each stage draws independent randomness from one knob.
enum : std::uint64_t {
  kSeedSplit = 1,
  kSeedLdaFit = 2,
  kSeedLdaInfer = 3,
  kSeedGcn = 4,
  kSeedRf = 5,
  kSeedGbt = 6,
  kSeedDnn = 7,
  kSeedCv = 9,
};

std::uint64_t substream(std::uint64_t seed, std::uint64_t stream) {
  return splitmix64(seed ^ (0x9e3779b97f4a7c15ULL + stream));
}

// Re-throw with the failing stage attached, preserving the error category.
template <typename Fn>
auto stage(const std::string& name, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const ConfigError& e) {
    throw ConfigError("stage " + name + ": " + e.what());
  } catch (const DataError& e) {
    throw DataError("stage " + name + ": " + e.what());
  } catch (const NumericError& e) {
    throw NumericError("stage " + name + ": " + e.what());
  } catch (const std::exception& e) {
    throw DataError("stage " + name + ": " + e.what());
  }
}

const std::set<std::string>& known_models() {
  static const std::set<std::string> names = {"lr", "rf", "gbt", "dnn", "gcn"};
  return names;
}

// ---------------------------------------------------------------------------
// JSON config parsing

void reject_unknown_keys(const nlohmann::json& obj, const std::string& where,
                         const std::set<std::string>& allowed) {
  for (const auto& [key, value] : obj.items()) {
    if (!allowed.count(key))
      throw ConfigError("unknown key \"" + key + "\" in " + where);
  }
}

template <typename T>
void read_field(const nlohmann::json& obj, const char* key, T& into,
                const std::string& where) {
  if (!obj.contains(key)) return;
  try {
    into = obj.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError(std::string("bad value for \"") + key + "\" in " + where);
  }
}

nlohmann::json parse_config_text(const std::string& text) {
  auto j = nlohmann::json::parse(text, nullptr, false);
  if (j.is_discarded() || !j.is_object())
    throw ConfigError("config is not a json object");
  return j;
}

}  // namespace

ExperimentConfig config_from_json(const std::string& text) {
  const auto j = parse_config_text(text);
  reject_unknown_keys(
      j, "config",
      {"input", "snapshot", "truth", "use_planted_targets", "out", "seed",
       "case", "window", "models", "cv_folds", "ridge_lambda", "log_targets",
       "venue_ranks", "lda", "gcn", "rf", "gbt", "dnn", "synth"});

  ExperimentConfig config;
  read_field(j, "input", config.input_path, "config");
  read_field(j, "snapshot", config.snapshot_path, "config");
  read_field(j, "truth", config.truth_path, "config");
  read_field(j, "use_planted_targets", config.use_planted_targets, "config");
  read_field(j, "out", config.out_dir, "config");
  read_field(j, "seed", config.seed, "config");
  read_field(j, "case", config.case_label, "config");
  read_field(j, "models", config.models, "config");
  read_field(j, "cv_folds", config.cv_folds, "config");
  read_field(j, "ridge_lambda", config.ridge_lambda, "config");
  read_field(j, "log_targets", config.log_targets, "config");
  read_field(j, "venue_ranks", config.venue_ranks_path, "config");

  if (j.contains("window")) {
    const auto& w = j.at("window");
    if (!w.is_object()) throw ConfigError("\"window\" must be an object");
    reject_unknown_keys(w, "window", {"start", "end", "delta"});
    corpus::CaseWindow window;
    read_field(w, "start", window.window_start, "window");
    read_field(w, "end", window.window_end, "window");
    read_field(w, "delta", window.horizon_years, "window");
    if (!w.contains("start") || !w.contains("end") || !w.contains("delta"))
      throw ConfigError("window needs start, end, and delta");
    config.custom_window = window;
  }

  if (j.contains("lda")) {
    const auto& l = j.at("lda");
    if (!l.is_object()) throw ConfigError("\"lda\" must be an object");
    reject_unknown_keys(l, "lda",
                        {"topics", "alpha", "beta", "iterations",
                         "infer_iterations", "min_doc_freq"});
    int k = config.lda.num_topics;
    read_field(l, "topics", k, "lda");
    config.lda = topics::LdaConfig::with_topics(k);
    read_field(l, "alpha", config.lda.alpha, "lda");
    read_field(l, "beta", config.lda.beta, "lda");
    read_field(l, "iterations", config.lda.iterations, "lda");
    read_field(l, "infer_iterations", config.lda.infer_iterations, "lda");
    read_field(l, "min_doc_freq", config.lda.min_doc_freq, "lda");
  }

  if (j.contains("gcn")) {
    const auto& g = j.at("gcn");
    if (!g.is_object()) throw ConfigError("\"gcn\" must be an object");
    reject_unknown_keys(
        g, "gcn", {"hidden1", "hidden2", "learning_rate", "dropout", "epochs"});
    read_field(g, "hidden1", config.gcn_train.hidden1, "gcn");
    read_field(g, "hidden2", config.gcn_train.hidden2, "gcn");
    read_field(g, "learning_rate", config.gcn_train.learning_rate, "gcn");
    read_field(g, "dropout", config.gcn_train.dropout_rate, "gcn");
    read_field(g, "epochs", config.gcn_train.epochs, "gcn");
  }

  if (j.contains("rf")) {
    const auto& r = j.at("rf");
    if (!r.is_object()) throw ConfigError("\"rf\" must be an object");
    reject_unknown_keys(r, "rf",
                        {"n_estimators", "max_depth", "min_samples_split"});
    read_field(r, "n_estimators", config.rf.n_estimators, "rf");
    read_field(r, "max_depth", config.rf.max_depth, "rf");
    read_field(r, "min_samples_split", config.rf.min_samples_split, "rf");
  }

  if (j.contains("gbt")) {
    const auto& g = j.at("gbt");
    if (!g.is_object()) throw ConfigError("\"gbt\" must be an object");
    reject_unknown_keys(
        g, "gbt",
        {"learning_rate", "min_samples_split", "max_depth", "n_estimators"});
    read_field(g, "learning_rate", config.gbt.learning_rate, "gbt");
    read_field(g, "min_samples_split", config.gbt.min_samples_split, "gbt");
    read_field(g, "max_depth", config.gbt.max_depth, "gbt");
    read_field(g, "n_estimators", config.gbt.n_estimators, "gbt");
  }

  if (j.contains("dnn")) {
    const auto& d = j.at("dnn");
    if (!d.is_object()) throw ConfigError("\"dnn\" must be an object");
    reject_unknown_keys(
        d, "dnn", {"batch_size", "learning_rate", "hidden", "dropout", "epochs"});
    read_field(d, "batch_size", config.dnn.batch_size, "dnn");
    read_field(d, "learning_rate", config.dnn.learning_rate, "dnn");
    read_field(d, "hidden", config.dnn.hidden, "dnn");
    read_field(d, "dropout", config.dnn.dropout_rate, "dnn");
    read_field(d, "epochs", config.dnn.epochs, "dnn");
  }

  if (config.models.empty()) throw ConfigError("models must not be empty");
  for (const auto& name : config.models)
    if (!known_models().count(name))
      throw ConfigError("unknown model \"" + name + "\"");
  return config;
}

std::string config_to_json(const ExperimentConfig& config) {
  nlohmann::json j;
  j["input"] = config.input_path;
  j["snapshot"] = config.snapshot_path;
  j["truth"] = config.truth_path;
  j["use_planted_targets"] = config.use_planted_targets;
  j["out"] = config.out_dir;
  j["seed"] = config.seed;
  j["case"] = config.case_label;
  if (config.custom_window) {
    j["window"] = {{"start", config.custom_window->window_start},
                   {"end", config.custom_window->window_end},
                   {"delta", config.custom_window->horizon_years}};
  }
  j["models"] = config.models;
  j["cv_folds"] = config.cv_folds;
  j["ridge_lambda"] = config.ridge_lambda;
  j["log_targets"] = config.log_targets;
  j["venue_ranks"] = config.venue_ranks_path;
  j["lda"] = {{"topics", config.lda.num_topics},
              {"alpha", config.lda.alpha},
              {"beta", config.lda.beta},
              {"iterations", config.lda.iterations},
              {"infer_iterations", config.lda.infer_iterations},
              {"min_doc_freq", config.lda.min_doc_freq}};
  j["gcn"] = {{"hidden1", config.gcn_train.hidden1},
              {"hidden2", config.gcn_train.hidden2},
              {"learning_rate", config.gcn_train.learning_rate},
              {"dropout", config.gcn_train.dropout_rate},
              {"epochs", config.gcn_train.epochs}};
  j["rf"] = {{"n_estimators", config.rf.n_estimators},
             {"max_depth", config.rf.max_depth},
             {"min_samples_split", config.rf.min_samples_split}};
  j["gbt"] = {{"learning_rate", config.gbt.learning_rate},
              {"min_samples_split", config.gbt.min_samples_split},
              {"max_depth", config.gbt.max_depth},
              {"n_estimators", config.gbt.n_estimators}};
  j["dnn"] = {{"batch_size", config.dnn.batch_size},
              {"learning_rate", config.dnn.learning_rate},
              {"hidden", config.dnn.hidden},
              {"dropout", config.dnn.dropout_rate},
              {"epochs", config.dnn.epochs}};
  return j.dump(2);
}

synth::SynthConfig synth_config_from_json(const std::string& text) {
  const auto j = parse_config_text(text);
  synth::SynthConfig config;
  if (!j.contains("synth")) return config;
  const auto& s = j.at("synth");
  if (!s.is_object()) throw ConfigError("\"synth\" must be an object");
  reject_unknown_keys(
      s, "synth",
      {"papers", "authors", "venues", "topics", "start_year", "end_year",
       "delta_years", "attachment", "topic_boost", "popularity",
       "references_mean", "noise", "planted", "seed"});
  read_field(s, "papers", config.num_papers, "synth");
  read_field(s, "authors", config.num_authors, "synth");
  read_field(s, "venues", config.num_venues, "synth");
  read_field(s, "topics", config.num_topics, "synth");
  read_field(s, "start_year", config.start_year, "synth");
  read_field(s, "end_year", config.end_year, "synth");
  read_field(s, "delta_years", config.delta_years, "synth");
  read_field(s, "attachment", config.attachment_strength, "synth");
  read_field(s, "topic_boost", config.same_topic_boost, "synth");
  read_field(s, "popularity", config.topic_popularity, "synth");
  read_field(s, "references_mean", config.references_mean, "synth");
  read_field(s, "noise", config.noise, "synth");
  read_field(s, "planted", config.planted_targets, "synth");
  read_field(s, "seed", config.seed, "synth");
  return config;
}

// ---------------------------------------------------------------------------
// Case preparation

namespace {

std::map<corpus::PaperId, double> resolve_targets(
    const std::vector<corpus::PaperRecord>& cleaned,
    const std::vector<corpus::PaperId>& sample_ids,
    const corpus::CaseWindow& window, const ExperimentConfig& config) {
  std::map<corpus::PaperId, double> targets;
  if (!config.truth_path.empty()) {
    std::ifstream in(config.truth_path);
    if (!in) throw DataError("cannot read truth csv: " + config.truth_path);
    std::map<corpus::PaperId, synth::GroundTruth> by_id;
    for (const auto& row : synth::read_truth_csv(in)) by_id[row.id] = row;
    for (corpus::PaperId id : sample_ids) {
      const auto it = by_id.find(id);
      if (it == by_id.end())
        throw DataError("truth csv has no row for paper " + std::to_string(id));
      targets[id] = config.use_planted_targets
                        ? it->second.planted_target
                        : static_cast<double>(it->second.future_citations);
    }
    return targets;
  }
  // Horizon extension: citations gained in (cutoff, cutoff + delta].
  const int horizon = window.window_end + window.horizon_years;
  auto extended = corpus::build_snapshot(cleaned, horizon);
  for (corpus::PaperId id : sample_ids) {
    targets[id] = static_cast<double>(corpus::citation_count(
        extended, id, window.window_end + 1, horizon));
  }
  return targets;
}

// A feature column that reproduces the prediction target almost exactly is
// evidence the target leaked into feature extraction; shuffled-target corpora
// must never trip this (shuffling destroys any genuine correlation).
void leak_canary(const features::FeatureMatrix& matrix,
                 const std::vector<std::size_t>& sample_rows,
                 const std::vector<double>& sample_targets) {
  const std::size_t n = sample_rows.size();
  if (n < 3) return;

  double target_mean = 0.0;
  for (double t : sample_targets) target_mean += t;
  target_mean /= static_cast<double>(n);
  double target_var = 0.0;
  for (double t : sample_targets)
    target_var += (t - target_mean) * (t - target_mean);
  if (target_var == 0.0) return;

  for (std::size_t c = 0; c < matrix.columns.size(); ++c) {
    double mean = 0.0;
    for (std::size_t r : sample_rows) mean += matrix.values(r, c);
    mean /= static_cast<double>(n);
    double var = 0.0, cov = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      const double dx = matrix.values(sample_rows[k], c) - mean;
      var += dx * dx;
      cov += dx * (sample_targets[k] - target_mean);
    }
    if (var == 0.0) continue;
    const double r = cov / std::sqrt(var * target_var);
    if (std::abs(r) > 0.999)
      throw DataError("leak canary tripped on column " + matrix.columns[c]);
  }
}

}  // namespace

CaseData prepare_case(const std::vector<corpus::PaperRecord>& cleaned,
                      const ExperimentConfig& config) {
  CaseData data;
  data.window = config.custom_window ? *config.custom_window
                                     : corpus::case_window(config.case_label);

  data.snapshot = stage("snapshot", [&] {
    return corpus::build_snapshot(cleaned, data.window.window_end);
  });

  data.split = stage("split", [&] {
    return corpus::temporal_split(data.snapshot, config.case_label, data.window,
                                  substream(config.seed, kSeedSplit));
  });

  const auto targets_by_id = stage("targets", [&] {
    std::vector<corpus::PaperId> sample_ids = data.split.train_ids;
    sample_ids.insert(sample_ids.end(), data.split.test_ids.begin(),
                      data.split.test_ids.end());
    return resolve_targets(cleaned, sample_ids, data.window, config);
  });

  stage("graph", [&] {
    std::vector<corpus::PaperId> node_ids;
    node_ids.reserve(data.snapshot.papers.size());
    for (const auto& [id, rec] : data.snapshot.papers) node_ids.push_back(id);
    data.citation_graph = graph::build_citation_graph(data.snapshot, node_ids);
    data.adjacency = graph::normalized_adjacency(data.citation_graph);
    return 0;
  });

  stage("topics", [&] {
    std::vector<std::vector<std::string>> docs;
    docs.reserve(data.citation_graph.node_ids.size());
    for (corpus::PaperId id : data.citation_graph.node_ids)
      docs.push_back(topics::tokenize(data.snapshot.papers.at(id)));
    topics::LdaConfig lda = config.lda;
    lda.seed = substream(config.seed, kSeedLdaFit);
    data.topic_model = topics::fit_lda(docs, lda);
    data.doc_topics = topics::compute_doc_topics(
        data.topic_model, data.snapshot, config.lda.infer_iterations,
        substream(config.seed, kSeedLdaInfer));
    return 0;
  });

  stage("features", [&] {
    std::map<corpus::PaperId, double> cutoff_counts;
    for (const auto& [id, rec] : data.snapshot.papers)
      cutoff_counts[id] =
          static_cast<double>(features::citations_at_cutoff(data.snapshot, id));
    const auto popularity = features::topic_popularity(
        data.doc_topics, cutoff_counts, data.split.train_ids);

    features::VenueRanks ranks;
    const features::VenueRanks* ranks_ptr = nullptr;
    if (!config.venue_ranks_path.empty()) {
      std::ifstream in(config.venue_ranks_path);
      if (!in)
        throw DataError("cannot read venue ranks: " + config.venue_ranks_path);
      ranks = features::read_venue_ranks_csv(in);
      ranks_ptr = &ranks;
    }
    data.feature_matrix =
        features::compute_features(data.snapshot, data.citation_graph,
                                   data.doc_topics, popularity, ranks_ptr);
    return 0;
  });

  stage("rows", [&] {
    std::map<corpus::PaperId, std::size_t> row_of;
    for (std::size_t i = 0; i < data.feature_matrix.node_ids.size(); ++i)
      row_of[data.feature_matrix.node_ids[i]] = i;
    data.node_targets.assign(data.feature_matrix.node_ids.size(), 0.0);
    for (corpus::PaperId id : data.split.train_ids) {
      const std::size_t row = row_of.at(id);
      data.train_rows.push_back(row);
      data.train_targets.push_back(targets_by_id.at(id));
      data.node_targets[row] = targets_by_id.at(id);
    }
    for (corpus::PaperId id : data.split.test_ids) {
      const std::size_t row = row_of.at(id);
      data.test_rows.push_back(row);
      data.test_targets.push_back(targets_by_id.at(id));
      data.node_targets[row] = targets_by_id.at(id);
    }
    return 0;
  });

  stage("normalize", [&] {
    features::normalize(data.feature_matrix, data.train_rows);
    return 0;
  });

  stage("leak-canary", [&] {
    std::vector<std::size_t> sample_rows = data.train_rows;
    sample_rows.insert(sample_rows.end(), data.test_rows.begin(),
                       data.test_rows.end());
    std::vector<double> sample_targets = data.train_targets;
    sample_targets.insert(sample_targets.end(), data.test_targets.begin(),
                          data.test_targets.end());
    leak_canary(data.feature_matrix, sample_rows, sample_targets);
    return 0;
  });

  return data;
}

// ---------------------------------------------------------------------------
// Model execution

namespace {

Matrix extract_rows(const Matrix& source, const std::vector<std::size_t>& rows) {
  Matrix out(rows.size(), source.cols);
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < source.cols; ++j)
      out(i, j) = source(rows[i], j);
  return out;
}

struct FittedModel {
  std::vector<double> test_predictions;
  std::vector<double> loss_history;
};

FittedModel fit_and_predict(const std::string& name, const CaseData& data,
                            const ExperimentConfig& config,
                            const std::vector<std::size_t>& train_rows,
                            const std::vector<double>& train_targets,
                            const std::vector<std::size_t>& eval_rows,
                            const std::string& save_path) {
  FittedModel fitted;
  if (name == "gcn") {
    gcn::TrainConfig train_cfg = config.gcn_train;
    train_cfg.log_targets = config.log_targets;
    train_cfg.seed = substream(config.seed, kSeedGcn);
    std::vector<double> node_targets(data.feature_matrix.node_ids.size(), 0.0);
    for (std::size_t k = 0; k < train_rows.size(); ++k)
      node_targets[train_rows[k]] = train_targets[k];
    auto trained = gcn::train(data.adjacency, data.feature_matrix.values,
                              node_targets, train_rows, train_cfg);
    const auto all = gcn::predict(trained, data.adjacency,
                                  data.feature_matrix.values);
    for (std::size_t row : eval_rows) fitted.test_predictions.push_back(all[row]);
    fitted.loss_history = trained.loss_history;
    if (!save_path.empty()) gcn::save_model(trained, save_path);
    return fitted;
  }

  const Matrix train_x = extract_rows(data.feature_matrix.values, train_rows);
  const Matrix eval_x = extract_rows(data.feature_matrix.values, eval_rows);
  if (name == "lr") {
    auto model = baselines::fit_linear(train_x, train_targets,
                                       config.ridge_lambda, config.log_targets);
    fitted.test_predictions = baselines::predict(model, eval_x);
    if (!save_path.empty()) baselines::save_linear(model, save_path);
  } else if (name == "rf") {
    auto cfg = config.rf;
    cfg.log_targets = config.log_targets;
    auto model = baselines::fit_random_forest(train_x, train_targets, cfg,
                                              substream(config.seed, kSeedRf));
    fitted.test_predictions = baselines::predict(model, eval_x);
    if (!save_path.empty()) baselines::save_random_forest(model, save_path);
  } else if (name == "gbt") {
    auto cfg = config.gbt;
    cfg.log_targets = config.log_targets;
    auto model = baselines::fit_gbt(train_x, train_targets, cfg,
                                    substream(config.seed, kSeedGbt));
    fitted.test_predictions = baselines::predict(model, eval_x);
    if (!save_path.empty()) baselines::save_gbt(model, save_path);
  } else if (name == "dnn") {
    auto cfg = config.dnn;
    cfg.log_targets = config.log_targets;
    cfg.seed = substream(config.seed, kSeedDnn);
    auto model = baselines::fit_dnn(train_x, train_targets, cfg);
    fitted.test_predictions = baselines::predict(model, eval_x);
    fitted.loss_history = model.loss_history;
    if (!save_path.empty()) baselines::save_dnn(model, save_path);
  } else {
    throw ConfigError("unknown model \"" + name + "\"");
  }
  return fitted;
}

}  // namespace

ModelResult run_model(const std::string& name, const CaseData& data,
                      const ExperimentConfig& config,
                      const std::string& save_path) {
  return stage("model " + name, [&] {
    auto fitted =
        fit_and_predict(name, data, config, data.train_rows, data.train_targets,
                        data.test_rows, save_path);
    ModelResult result;
    result.model = name;
    result.fold = "final";
    result.test_predictions = fitted.test_predictions;
    result.loss_history = fitted.loss_history;
    result.metrics = eval::evaluate(data.test_targets, fitted.test_predictions,
                                    data.feature_matrix.columns.size());
    return result;
  });
}

std::vector<ModelResult> run_case(const CaseData& data,
                                  const ExperimentConfig& config,
                                  const std::string& model_save_dir) {
  if (config.models.empty()) throw ConfigError("models must not be empty");
  std::vector<ModelResult> results;
  for (const auto& name : config.models) {
    std::string save_path;
    if (!model_save_dir.empty())
      save_path = (std::filesystem::path(model_save_dir) /
                   (name + "_" + config.case_label + ".bin"))
                      .string();
    results.push_back(run_model(name, data, config, save_path));

    if (config.cv_folds > 0) {
      std::vector<std::size_t> order(data.train_rows.size());
      for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
      const auto folds = eval::kfold(order, config.cv_folds,
                                     substream(config.seed, kSeedCv));
      for (std::size_t f = 0; f < folds.size(); ++f) {
        std::vector<std::size_t> fold_train_rows, fold_eval_rows;
        std::vector<double> fold_train_targets, fold_eval_targets;
        for (std::size_t i : folds[f].train) {
          fold_train_rows.push_back(data.train_rows[i]);
          fold_train_targets.push_back(data.train_targets[i]);
        }
        for (std::size_t i : folds[f].validation) {
          fold_eval_rows.push_back(data.train_rows[i]);
          fold_eval_targets.push_back(data.train_targets[i]);
        }
        auto fitted = stage("model " + name + " cv" + std::to_string(f), [&] {
          return fit_and_predict(name, data, config, fold_train_rows,
                                 fold_train_targets, fold_eval_rows, "");
        });
        ModelResult row;
        row.model = name;
        row.fold = "cv" + std::to_string(f);
        row.test_predictions = fitted.test_predictions;
        row.metrics = eval::evaluate(fold_eval_targets, fitted.test_predictions,
                                     data.feature_matrix.columns.size());
        results.push_back(std::move(row));
      }
    }
  }
  return results;
}

eval::MetricsReport evaluate_saved_model(const std::string& path,
                                         const CaseData& data,
                                         const ExperimentConfig& config) {
  std::ifstream probe(path, std::ios::binary);
  if (!probe) throw DataError("cannot read model file: " + path);
  std::string magic(7, '\0');
  probe.read(magic.data(), 7);
  probe.close();

  std::vector<double> preds;
  if (magic == "CGGCN00") {
    auto trained = gcn::load_model(path);
    const auto all =
        gcn::predict(trained, data.adjacency, data.feature_matrix.values);
    for (std::size_t row : data.test_rows) preds.push_back(all[row]);
  } else {
    const Matrix test_x = extract_rows(data.feature_matrix.values, data.test_rows);
    if (magic == "CGLRM00")
      preds = baselines::predict(baselines::load_linear(path), test_x);
    else if (magic == "CGRFM00")
      preds = baselines::predict(baselines::load_random_forest(path), test_x);
    else if (magic == "CGGBT00")
      preds = baselines::predict(baselines::load_gbt(path), test_x);
    else if (magic == "CGDNN00")
      preds = baselines::predict(baselines::load_dnn(path), test_x);
    else
      throw DataError("unrecognized model file: " + path);
  }
  return eval::evaluate(data.test_targets, preds,
                        data.feature_matrix.columns.size());
}

// ---------------------------------------------------------------------------
// Full experiment

void write_results_csv(const std::string& case_label,
                       const std::vector<ModelResult>& results,
                       std::ostream& out) {
  eval::write_metrics_csv_header(out);
  for (const auto& result : results)
    eval::write_metrics_csv_row(result.model, case_label, result.fold,
                                result.metrics, out);
}

std::vector<ModelResult> run_experiment(const ExperimentConfig& config) {
  std::vector<corpus::PaperRecord> cleaned;
  if (!config.input_path.empty()) {
    auto parsed = stage("parse", [&] {
      return corpus::parse_records_file(config.input_path);
    });
    cleaned = stage("clean", [&] {
      return corpus::clean(parsed.records).first;
    });
  } else if (!config.snapshot_path.empty()) {
    auto snapshot = stage("load-snapshot", [&] {
      return corpus::load_snapshot(config.snapshot_path);
    });
    for (const auto& [id, rec] : snapshot.papers) cleaned.push_back(rec);
  } else {
    throw ConfigError("either input or snapshot must be configured");
  }

  auto data = prepare_case(cleaned, config);

  const std::filesystem::path out_dir(config.out_dir.empty() ? "." : config.out_dir);
  stage("prepare-output", [&] {
    std::filesystem::create_directories(out_dir);
    std::filesystem::create_directories(out_dir / "models");
    return 0;
  });
  auto results = run_case(data, config, (out_dir / "models").string());

  stage("write-results", [&] {
    std::ofstream csv(out_dir / ("results_" + config.case_label + ".csv"));
    if (!csv) throw DataError("cannot write results csv");
    write_results_csv(config.case_label, results, csv);

    for (const auto& result : results) {
      if (result.fold != "final") continue;
      std::ofstream mj(out_dir / ("metrics_" + result.model + "_" +
                                  config.case_label + ".json"));
      mj << eval::to_json(result.metrics) << "\n";
      if (!result.loss_history.empty()) {
        std::ofstream lh(out_dir / ("loss_" + result.model + "_" +
                                    config.case_label + ".csv"));
        lh << "epoch,loss\n";
        for (std::size_t e = 0; e < result.loss_history.size(); ++e)
          lh << e << ',' << format_double(result.loss_history[e]) << "\n";
      }
    }

    std::ofstream cfg_echo(out_dir / "config_used.json");
    cfg_echo << config_to_json(config) << "\n";
    return 0;
  });
  return results;
}

// ---------------------------------------------------------------------------
// Report merging

std::vector<ReportRow> read_metrics_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) ||
      line != "model,case,fold,mae,rmse,mape,r2,adjusted_r2,n,p,mape_support")
    throw DataError("metrics csv header does not match the expected schema");
  std::vector<ReportRow> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream fields(line);
    std::vector<std::string> parts;
    std::string part;
    while (std::getline(fields, part, ',')) parts.push_back(part);
    if (parts.size() != 11)
      throw DataError("metrics csv line " + std::to_string(line_no) +
                      " does not have 11 fields");
    ReportRow row;
    row.model = parts[0];
    row.case_label = parts[1];
    row.fold = parts[2];
    try {
      row.metrics.mae = std::stod(parts[3]);
      row.metrics.rmse = std::stod(parts[4]);
      row.metrics.mape = std::stod(parts[5]);
      row.metrics.r2 = std::stod(parts[6]);
      row.metrics.adjusted_r2 = std::stod(parts[7]);
      row.metrics.n = std::stoull(parts[8]);
      row.metrics.p = std::stoull(parts[9]);
      row.metrics.mape_support = std::stoull(parts[10]);
    } catch (const std::exception&) {
      throw DataError("metrics csv line " + std::to_string(line_no) +
                      " has an unparseable number");
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

MergedReport merge_reports(const std::vector<std::vector<ReportRow>>& inputs) {
  MergedReport merged;
  for (const auto& rows : inputs)
    merged.rows.insert(merged.rows.end(), rows.begin(), rows.end());
  std::sort(merged.rows.begin(), merged.rows.end(),
            [](const ReportRow& a, const ReportRow& b) {
              return std::tie(a.case_label, a.model, a.fold) <
                     std::tie(b.case_label, b.model, b.fold);
            });
  merged.rows.erase(std::unique(merged.rows.begin(), merged.rows.end()),
                    merged.rows.end());

  merged.best.assign(merged.rows.size(), {false, false, false, false, false});
  std::set<std::string> cases;
  for (const auto& row : merged.rows) cases.insert(row.case_label);
  for (const auto& case_label : cases) {
    std::array<std::size_t, 5> best_index{};
    std::array<double, 5> best_value{};
    bool seen = false;
    for (std::size_t i = 0; i < merged.rows.size(); ++i) {
      const auto& row = merged.rows[i];
      if (row.case_label != case_label || row.fold != "final") continue;
      const std::array<double, 5> values = {row.metrics.mae, row.metrics.rmse,
                                            row.metrics.mape, row.metrics.r2,
                                            row.metrics.adjusted_r2};
      if (!seen) {
        seen = true;
        best_index.fill(i);
        best_value = values;
        continue;
      }
      for (std::size_t m = 0; m < 5; ++m) {
        const bool lower_is_better = m < 3;
        if ((lower_is_better && values[m] < best_value[m]) ||
            (!lower_is_better && values[m] > best_value[m])) {
          best_value[m] = values[m];
          best_index[m] = i;
        }
      }
    }
    if (seen)
      for (std::size_t m = 0; m < 5; ++m) merged.best[best_index[m]][m] = true;
  }
  return merged;
}

void write_report_text(const MergedReport& report, std::ostream& out) {
  out << std::left << std::setw(12) << "case" << std::setw(8) << "model"
      << std::setw(8) << "fold";
  for (const char* name : {"mae", "rmse", "mape", "r2", "adj_r2"})
    out << std::right << std::setw(13) << name;
  out << "\n";
  for (std::size_t i = 0; i < report.rows.size(); ++i) {
    const auto& row = report.rows[i];
    out << std::left << std::setw(12) << row.case_label << std::setw(8)
        << row.model << std::setw(8) << row.fold;
    const std::array<double, 5> values = {row.metrics.mae, row.metrics.rmse,
                                          row.metrics.mape, row.metrics.r2,
                                          row.metrics.adjusted_r2};
    for (std::size_t m = 0; m < 5; ++m) {
      // Rounded for the table; report.json carries the exact values.
      std::ostringstream cell;
      cell << std::fixed << std::setprecision(4) << values[m];
      if (report.best[i][m]) cell << "*";
      out << std::right << std::setw(13) << cell.str();
    }
    out << "\n";
  }
}

std::string report_to_json(const MergedReport& report) {
  nlohmann::json rows = nlohmann::json::array();
  static const std::array<const char*, 5> metric_names = {"mae", "rmse", "mape",
                                                          "r2", "adjusted_r2"};
  for (std::size_t i = 0; i < report.rows.size(); ++i) {
    const auto& row = report.rows[i];
    nlohmann::json j;
    j["model"] = row.model;
    j["case"] = row.case_label;
    j["fold"] = row.fold;
    j["mae"] = row.metrics.mae;
    j["rmse"] = row.metrics.rmse;
    j["mape"] = row.metrics.mape;
    j["r2"] = row.metrics.r2;
    j["adjusted_r2"] = row.metrics.adjusted_r2;
    j["n"] = row.metrics.n;
    j["p"] = row.metrics.p;
    j["mape_support"] = row.metrics.mape_support;
    nlohmann::json best = nlohmann::json::array();
    for (std::size_t m = 0; m < 5; ++m)
      if (report.best[i][m]) best.push_back(metric_names[m]);
    j["best"] = best;
    rows.push_back(j);
  }
  nlohmann::json root;
  root["rows"] = rows;
  return root.dump(2);
}

}  // namespace citegcn::harness
