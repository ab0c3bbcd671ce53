#include "citegcn/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <ostream>

#include "citegcn/binio.hpp"
#include "citegcn/errors.hpp"
#include "citegcn/format.hpp"

namespace citegcn::baselines {

namespace {

void check_training_inputs(const Matrix& x, const std::vector<double>& y) {
  if (x.rows == 0) throw DataError("training set is empty");
  if (x.rows != y.size())
    throw DataError("feature rows and target count differ: " +
                    std::to_string(x.rows) + " vs " + std::to_string(y.size()));
}

std::vector<double> maybe_log(const std::vector<double>& y, bool log_targets) {
  if (!log_targets) return y;
  std::vector<double> out(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (y[i] < 0.0)
      throw DataError("log target transform requires non-negative targets");
    out[i] = std::log1p(y[i]);
  }
  return out;
}

std::vector<double> finish_predictions(std::vector<double> raw, bool log_targets) {
  for (auto& v : raw) {
    if (log_targets) v = std::expm1(v);
    if (!std::isfinite(v)) throw NumericError("non-finite prediction");
    if (v < 0.0) v = 0.0;
  }
  return raw;
}

void check_feature_count(std::size_t expected, const Matrix& x) {
  if (x.cols != expected)
    throw DataError("feature count mismatch: model expects " +
                    std::to_string(expected) + ", got " + std::to_string(x.cols));
}

}  // namespace

// ---------------------------------------------------------------------------
// Linear regression

LinearModel fit_linear(const Matrix& x, const std::vector<double>& y,
                       double ridge_lambda, bool log_targets) {
  check_training_inputs(x, y);
  if (ridge_lambda < 0.0) throw ConfigError("ridge_lambda must be >= 0");
  const auto targets = maybe_log(y, log_targets);

  // Normal equations over [X | 1] with the ridge term on the weights only.
  const std::size_t m = x.cols;
  const std::size_t dim = m + 1;
  Matrix a(dim, dim);
  std::vector<double> rhs(dim, 0.0);
  for (std::size_t r = 0; r < x.rows; ++r) {
    for (std::size_t i = 0; i < m; ++i) {
      const double xi = x(r, i);
      for (std::size_t j = i; j < m; ++j) a(i, j) += xi * x(r, j);
      a(i, m) += xi;
      rhs[i] += xi * targets[r];
    }
    rhs[m] += targets[r];
  }
  a(m, m) = static_cast<double>(x.rows);
  for (std::size_t i = 0; i < dim; ++i)
    for (std::size_t j = 0; j < i; ++j) a(i, j) = a(j, i);
  for (std::size_t i = 0; i < m; ++i) a(i, i) += ridge_lambda;

  // Gaussian elimination with partial pivoting.
  std::vector<std::size_t> order(dim);
  std::iota(order.begin(), order.end(), 0);
  for (std::size_t col = 0; col < dim; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < dim; ++r)
      if (std::abs(a(order[r], col)) > std::abs(a(order[pivot], col))) pivot = r;
    std::swap(order[col], order[pivot]);
    const double diag = a(order[col], col);
    if (std::abs(diag) < 1e-12)
      throw NumericError("singular normal equations; increase ridge_lambda");
    for (std::size_t r = col + 1; r < dim; ++r) {
      const double f = a(order[r], col) / diag;
      if (f == 0.0) continue;
      for (std::size_t c = col; c < dim; ++c) a(order[r], c) -= f * a(order[col], c);
      rhs[order[r]] -= f * rhs[order[col]];
    }
  }
  std::vector<double> solution(dim, 0.0);
  for (std::size_t back = dim; back-- > 0;) {
    double sum = rhs[order[back]];
    for (std::size_t c = back + 1; c < dim; ++c)
      sum -= a(order[back], c) * solution[c];
    solution[back] = sum / a(order[back], back);
  }

  LinearModel model;
  model.weights.assign(solution.begin(), solution.begin() + m);
  model.bias = solution[m];
  model.log_targets = log_targets;
  return model;
}

// ---------------------------------------------------------------------------
// Regression trees

double tree_predict(const Tree& tree, const Matrix& x, std::size_t row) {
  if (tree.nodes.empty()) return 0.0;
  std::size_t node = 0;
  while (tree.nodes[node].feature >= 0) {
    const auto& n = tree.nodes[node];
    node = x(row, static_cast<std::size_t>(n.feature)) <= n.threshold
               ? static_cast<std::size_t>(n.left)
               : static_cast<std::size_t>(n.right);
  }
  return tree.nodes[node].value;
}

std::size_t tree_depth(const Tree& tree) {
  if (tree.nodes.empty()) return 0;
  std::size_t deepest = 0;
  std::vector<std::pair<std::size_t, std::size_t>> stack = {{0, 0}};
  while (!stack.empty()) {
    auto [node, depth] = stack.back();
    stack.pop_back();
    deepest = std::max(deepest, depth);
    const auto& n = tree.nodes[node];
    if (n.feature >= 0) {
      stack.push_back({static_cast<std::size_t>(n.left), depth + 1});
      stack.push_back({static_cast<std::size_t>(n.right), depth + 1});
    }
  }
  return deepest;
}

namespace {

struct SplitChoice {
  bool found = false;
  std::size_t feature = 0;
  double threshold = 0.0;
  double reduction = 0.0;
};

double subset_sse(const std::vector<double>& y, const std::vector<std::size_t>& idx) {
  double mean = 0.0;
  for (std::size_t i : idx) mean += y[i];
  mean /= static_cast<double>(idx.size());
  double sse = 0.0;
  for (std::size_t i : idx) sse += (y[i] - mean) * (y[i] - mean);
  return sse;
}

// Best variance-reduction split over the given candidate features; ties go to
// the lowest feature index, then the lowest threshold.
SplitChoice best_split(const Matrix& x, const std::vector<double>& y,
                       const std::vector<std::size_t>& idx,
                       const std::vector<std::size_t>& features) {
  SplitChoice best;
  const double parent_sse = subset_sse(y, idx);
  std::vector<std::pair<double, double>> pairs(idx.size());
  for (std::size_t f : features) {
    for (std::size_t k = 0; k < idx.size(); ++k)
      pairs[k] = {x(idx[k], f), y[idx[k]]};
    std::sort(pairs.begin(), pairs.end());

    double left_sum = 0.0, left_sq = 0.0;
    double right_sum = 0.0, right_sq = 0.0;
    for (const auto& [xv, yv] : pairs) {
      right_sum += yv;
      right_sq += yv * yv;
    }
    const double n = static_cast<double>(pairs.size());
    for (std::size_t k = 0; k + 1 < pairs.size(); ++k) {
      left_sum += pairs[k].second;
      left_sq += pairs[k].second * pairs[k].second;
      right_sum -= pairs[k].second;
      right_sq -= pairs[k].second * pairs[k].second;
      if (pairs[k].first == pairs[k + 1].first) continue;
      const double nl = static_cast<double>(k + 1);
      const double nr = n - nl;
      const double sse_l = std::max(left_sq - left_sum * left_sum / nl, 0.0);
      const double sse_r = std::max(right_sq - right_sum * right_sum / nr, 0.0);
      const double reduction = parent_sse - sse_l - sse_r;
      if (reduction > best.reduction) {
        best.found = true;
        best.feature = f;
        best.threshold = (pairs[k].first + pairs[k + 1].first) / 2.0;
        best.reduction = reduction;
      }
    }
  }
  return best;
}

struct TreeGrower {
  const Matrix& x;
  const std::vector<double>& y;
  std::size_t max_depth;
  std::size_t min_samples_split;
  std::size_t features_per_split;  // 0 means all features
  Rng* rng;                        // only consulted when subsampling features
  Tree tree;

  std::vector<std::size_t> pick_features() {
    std::vector<std::size_t> all(x.cols);
    std::iota(all.begin(), all.end(), 0);
    if (features_per_split == 0 || features_per_split >= x.cols) return all;
    for (std::size_t k = 0; k < features_per_split; ++k) {
      const std::size_t j = k + rng->next_below(all.size() - k);
      std::swap(all[k], all[j]);
    }
    all.resize(features_per_split);
    std::sort(all.begin(), all.end());
    return all;
  }

  std::int32_t grow(const std::vector<std::size_t>& idx, std::size_t depth) {
    const std::int32_t node_id = static_cast<std::int32_t>(tree.nodes.size());
    tree.nodes.emplace_back();
    double mean = 0.0;
    for (std::size_t i : idx) mean += y[i];
    tree.nodes[node_id].value = mean / static_cast<double>(idx.size());

    if (depth >= max_depth || idx.size() < min_samples_split) return node_id;
    const auto choice = best_split(x, y, idx, pick_features());
    if (!choice.found) return node_id;

    std::vector<std::size_t> left, right;
    for (std::size_t i : idx)
      (x(i, choice.feature) <= choice.threshold ? left : right).push_back(i);
    const std::int32_t left_id = grow(left, depth + 1);
    const std::int32_t right_id = grow(right, depth + 1);
    tree.nodes[node_id].feature = static_cast<std::int32_t>(choice.feature);
    tree.nodes[node_id].threshold = choice.threshold;
    tree.nodes[node_id].left = left_id;
    tree.nodes[node_id].right = right_id;
    return node_id;
  }
};

Tree fit_tree(const Matrix& x, const std::vector<double>& y,
              const std::vector<std::size_t>& idx, std::size_t max_depth,
              std::size_t min_samples_split, std::size_t features_per_split,
              Rng* rng) {
  TreeGrower grower{x, y, max_depth, min_samples_split, features_per_split, rng, {}};
  grower.grow(idx, 0);
  return grower.tree;
}

}  // namespace

RandomForestModel fit_random_forest(const Matrix& x, const std::vector<double>& y,
                                    const RandomForestConfig& config,
                                    std::uint64_t seed) {
  check_training_inputs(x, y);
  if (config.n_estimators < 1) throw ConfigError("n_estimators must be >= 1");
  if (config.min_samples_split < 2)
    throw ConfigError("min_samples_split must be >= 2");
  const auto targets = maybe_log(y, config.log_targets);

  const std::size_t subsample = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::floor(std::sqrt(static_cast<double>(x.cols)))));

  RandomForestModel model;
  model.n_features = x.cols;
  model.log_targets = config.log_targets;
  model.trees.resize(config.n_estimators);
  Rng master(seed);
  for (std::size_t t = 0; t < config.n_estimators; ++t) {
    Rng tree_rng = master.fork(t);
    std::vector<std::size_t> bootstrap(x.rows);
    for (auto& i : bootstrap) i = tree_rng.next_below(x.rows);
    model.trees[t] = fit_tree(x, targets, bootstrap, config.max_depth,
                              config.min_samples_split, subsample, &tree_rng);
  }
  return model;
}

GbtModel fit_gbt(const Matrix& x, const std::vector<double>& y,
                 const GbtConfig& config, std::uint64_t /*seed*/) {
  check_training_inputs(x, y);
  if (config.n_estimators < 1) throw ConfigError("n_estimators must be >= 1");
  if (config.min_samples_split < 2)
    throw ConfigError("min_samples_split must be >= 2");
  if (config.learning_rate <= 0.0) throw ConfigError("learning_rate must be > 0");
  const auto targets = maybe_log(y, config.log_targets);

  GbtModel model;
  model.n_features = x.cols;
  model.log_targets = config.log_targets;
  model.learning_rate = config.learning_rate;
  model.f0 = std::accumulate(targets.begin(), targets.end(), 0.0) /
             static_cast<double>(targets.size());

  std::vector<std::size_t> all(x.rows);
  std::iota(all.begin(), all.end(), 0);
  std::vector<double> current(x.rows, model.f0);
  std::vector<double> residuals(x.rows);
  model.trees.reserve(config.n_estimators);
  model.stage_mse.reserve(config.n_estimators);
  for (std::size_t stage = 0; stage < config.n_estimators; ++stage) {
    for (std::size_t i = 0; i < x.rows; ++i) residuals[i] = targets[i] - current[i];
    Tree tree = fit_tree(x, residuals, all, config.max_depth,
                         config.min_samples_split, 0, nullptr);
    double mse = 0.0;
    for (std::size_t i = 0; i < x.rows; ++i) {
      current[i] += config.learning_rate * tree_predict(tree, x, i);
      const double err = targets[i] - current[i];
      mse += err * err;
    }
    model.trees.push_back(std::move(tree));
    model.stage_mse.push_back(mse / static_cast<double>(x.rows));
  }
  return model;
}

// ---------------------------------------------------------------------------
// Dense network

namespace {

void dnn_hidden(const DnnModel& model, const Matrix& x, std::size_t row,
                std::vector<double>& pre, std::vector<double>& act) {
  const std::size_t hidden = model.b0.size();
  for (std::size_t j = 0; j < hidden; ++j) {
    double sum = model.b0[j];
    for (std::size_t k = 0; k < x.cols; ++k) sum += x(row, k) * model.w0(k, j);
    pre[j] = sum;
    act[j] = std::max(sum, 0.0);
  }
}

}  // namespace

std::vector<double> dnn_forward(const DnnModel& model, const Matrix& x) {
  check_feature_count(model.w0.rows, x);
  const std::size_t hidden = model.b0.size();
  std::vector<double> pre(hidden), act(hidden), out(x.rows);
  for (std::size_t i = 0; i < x.rows; ++i) {
    dnn_hidden(model, x, i, pre, act);
    double sum = model.b1;
    for (std::size_t j = 0; j < hidden; ++j) sum += act[j] * model.w1(j, 0);
    out[i] = sum;
  }
  return out;
}

double dnn_loss(const DnnModel& model, const Matrix& x,
                const std::vector<double>& y) {
  const auto preds = dnn_forward(model, x);
  double loss = 0.0;
  for (std::size_t i = 0; i < preds.size(); ++i)
    loss += (preds[i] - y[i]) * (preds[i] - y[i]);
  return loss / static_cast<double>(preds.size());
}

DnnGradients dnn_backward(const DnnModel& model, const Matrix& x,
                          const std::vector<double>& y) {
  check_feature_count(model.w0.rows, x);
  const std::size_t hidden = model.b0.size();
  DnnGradients g;
  g.w0 = Matrix(model.w0.rows, hidden);
  g.b0.assign(hidden, 0.0);
  g.w1 = Matrix(hidden, 1);
  g.b1 = 0.0;

  std::vector<double> pre(hidden), act(hidden);
  const double inv_n = 1.0 / static_cast<double>(x.rows);
  for (std::size_t i = 0; i < x.rows; ++i) {
    dnn_hidden(model, x, i, pre, act);
    double out = model.b1;
    for (std::size_t j = 0; j < hidden; ++j) out += act[j] * model.w1(j, 0);
    const double grad_out = 2.0 * (out - y[i]) * inv_n;
    g.b1 += grad_out;
    for (std::size_t j = 0; j < hidden; ++j) {
      g.w1(j, 0) += act[j] * grad_out;
      if (pre[j] > 0.0) {
        const double grad_pre = grad_out * model.w1(j, 0);
        g.b0[j] += grad_pre;
        for (std::size_t k = 0; k < x.cols; ++k)
          g.w0(k, j) += x(i, k) * grad_pre;
      }
    }
  }
  return g;
}

DnnModel fit_dnn(const Matrix& x, const std::vector<double>& y,
                 const DnnConfig& config) {
  check_training_inputs(x, y);
  if (config.epochs < 1) throw ConfigError("epochs must be >= 1");
  if (config.batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (config.hidden < 1) throw ConfigError("hidden must be >= 1");
  if (config.learning_rate <= 0.0) throw ConfigError("learning_rate must be > 0");
  if (config.dropout_rate < 0.0 || config.dropout_rate >= 1.0)
    throw ConfigError("dropout_rate must lie in [0, 1)");
  const auto targets = maybe_log(y, config.log_targets);

  DnnModel model;
  model.log_targets = config.log_targets;
  model.b1 = 0.0;
  Rng init_rng(config.seed);
  const double bound0 = 1.0 / std::sqrt(static_cast<double>(x.cols));
  model.w0 = Matrix(x.cols, config.hidden);
  for (auto& v : model.w0.data) v = init_rng.uniform(-bound0, bound0);
  model.b0.assign(config.hidden, 0.0);
  const double bound1 = 1.0 / std::sqrt(static_cast<double>(config.hidden));
  model.w1 = Matrix(config.hidden, 1);
  for (auto& v : model.w1.data) v = init_rng.uniform(-bound1, bound1);

  AdamConfig adam_cfg;
  adam_cfg.learning_rate = config.learning_rate;
  Adam opt_w0(model.w0.data.size(), adam_cfg);
  Adam opt_b0(model.b0.size(), adam_cfg);
  Adam opt_w1(model.w1.data.size(), adam_cfg);
  Adam opt_b1(1, adam_cfg);

  Rng shuffle_rng = Rng(config.seed).fork(0x5u);
  Rng dropout_rng = Rng(config.seed).fork(0xd7a9u);
  std::vector<std::size_t> order(x.rows);
  std::iota(order.begin(), order.end(), 0);
  const double keep = 1.0 - config.dropout_rate;

  std::vector<double> pre(config.hidden), act(config.hidden), mask(config.hidden);
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    shuffle_rng.shuffle(order);
    double epoch_loss = 0.0;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < x.rows; start += config.batch_size) {
      const std::size_t end = std::min(start + config.batch_size, x.rows);
      const double batch_n = static_cast<double>(end - start);

      DnnGradients g;
      g.w0 = Matrix(model.w0.rows, config.hidden);
      g.b0.assign(config.hidden, 0.0);
      g.w1 = Matrix(config.hidden, 1);
      g.b1 = 0.0;
      double batch_loss = 0.0;
      for (std::size_t b = start; b < end; ++b) {
        const std::size_t i = order[b];
        dnn_hidden(model, x, i, pre, act);
        for (std::size_t j = 0; j < config.hidden; ++j) {
          mask[j] = (config.dropout_rate > 0.0 &&
                     dropout_rng.next_double() < config.dropout_rate)
                        ? 0.0
                        : 1.0 / keep;
          act[j] *= mask[j];
        }
        double out = model.b1;
        for (std::size_t j = 0; j < config.hidden; ++j)
          out += act[j] * model.w1(j, 0);
        const double err = out - targets[i];
        batch_loss += err * err;
        const double grad_out = 2.0 * err / batch_n;
        g.b1 += grad_out;
        for (std::size_t j = 0; j < config.hidden; ++j) {
          g.w1(j, 0) += act[j] * grad_out;
          if (pre[j] > 0.0 && mask[j] > 0.0) {
            const double grad_pre = grad_out * model.w1(j, 0) * mask[j];
            g.b0[j] += grad_pre;
            for (std::size_t k = 0; k < x.cols; ++k)
              g.w0(k, j) += x(i, k) * grad_pre;
          }
        }
      }
      epoch_loss += batch_loss / batch_n;
      ++batches;
      opt_w0.step(model.w0.data, g.w0.data);
      opt_b0.step(model.b0, g.b0);
      opt_w1.step(model.w1.data, g.w1.data);
      std::vector<double> b1_param = {model.b1};
      std::vector<double> b1_grad = {g.b1};
      opt_b1.step(b1_param, b1_grad);
      model.b1 = b1_param[0];
    }
    const double mean_loss = epoch_loss / static_cast<double>(batches);
    if (!std::isfinite(mean_loss))
      throw NumericError("training diverged at epoch " + std::to_string(epoch));
    model.loss_history.push_back(mean_loss);
  }
  return model;
}

// ---------------------------------------------------------------------------
// Prediction

std::vector<double> predict(const LinearModel& model, const Matrix& x) {
  check_feature_count(model.weights.size(), x);
  std::vector<double> out(x.rows);
  for (std::size_t i = 0; i < x.rows; ++i) {
    double sum = model.bias;
    for (std::size_t j = 0; j < x.cols; ++j) sum += x(i, j) * model.weights[j];
    out[i] = sum;
  }
  return finish_predictions(std::move(out), model.log_targets);
}

std::vector<double> predict(const RandomForestModel& model, const Matrix& x) {
  check_feature_count(model.n_features, x);
  if (model.trees.empty()) throw DataError("random forest has no trees");
  std::vector<double> out(x.rows, 0.0);
  for (std::size_t i = 0; i < x.rows; ++i) {
    double sum = 0.0;
    for (const auto& tree : model.trees) sum += tree_predict(tree, x, i);
    out[i] = sum / static_cast<double>(model.trees.size());
  }
  return finish_predictions(std::move(out), model.log_targets);
}

std::vector<double> predict(const GbtModel& model, const Matrix& x) {
  check_feature_count(model.n_features, x);
  std::vector<double> out(x.rows, model.f0);
  for (std::size_t i = 0; i < x.rows; ++i)
    for (const auto& tree : model.trees)
      out[i] += model.learning_rate * tree_predict(tree, x, i);
  return finish_predictions(std::move(out), model.log_targets);
}

std::vector<double> predict(const DnnModel& model, const Matrix& x) {
  return finish_predictions(dnn_forward(model, x), model.log_targets);
}

// ---------------------------------------------------------------------------
// Persistence

namespace {

void put_tree(std::ostream& out, const Tree& tree) {
  binio::put_u64(out, tree.nodes.size());
  for (const auto& n : tree.nodes) {
    binio::put_i64(out, n.feature);
    binio::put_f64(out, n.threshold);
    binio::put_f64(out, n.value);
    binio::put_i64(out, n.left);
    binio::put_i64(out, n.right);
  }
}

Tree get_tree(std::istream& in) {
  Tree tree;
  tree.nodes.resize(binio::get_u64(in));
  for (auto& n : tree.nodes) {
    n.feature = static_cast<std::int32_t>(binio::get_i64(in));
    n.threshold = binio::get_f64(in);
    n.value = binio::get_f64(in);
    n.left = static_cast<std::int32_t>(binio::get_i64(in));
    n.right = static_cast<std::int32_t>(binio::get_i64(in));
  }
  return tree;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path);
  return out;
}

std::ifstream open_in(const std::string& path, const char* magic) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read " + path);
  std::string header(7, '\0');
  in.read(header.data(), 7);
  if (!in || header != magic)
    throw DataError("not a recognized model file: " + path);
  return in;
}

}  // namespace

void save_linear(const LinearModel& model, const std::string& path) {
  auto out = open_out(path);
  out.write("CGLRM00", 7);
  binio::put_u64(out, model.weights.size());
  for (double w : model.weights) binio::put_f64(out, w);
  binio::put_f64(out, model.bias);
  binio::put_u32(out, model.log_targets ? 1 : 0);
  if (!out) throw DataError("write failed: " + path);
}

LinearModel load_linear(const std::string& path) {
  auto in = open_in(path, "CGLRM00");
  LinearModel model;
  model.weights.resize(binio::get_u64(in));
  for (auto& w : model.weights) w = binio::get_f64(in);
  model.bias = binio::get_f64(in);
  model.log_targets = binio::get_u32(in) != 0;
  if (!in) throw DataError("truncated model file: " + path);
  return model;
}

void save_random_forest(const RandomForestModel& model, const std::string& path) {
  auto out = open_out(path);
  out.write("CGRFM00", 7);
  binio::put_u64(out, model.n_features);
  binio::put_u32(out, model.log_targets ? 1 : 0);
  binio::put_u64(out, model.trees.size());
  for (const auto& tree : model.trees) put_tree(out, tree);
  if (!out) throw DataError("write failed: " + path);
}

RandomForestModel load_random_forest(const std::string& path) {
  auto in = open_in(path, "CGRFM00");
  RandomForestModel model;
  model.n_features = binio::get_u64(in);
  model.log_targets = binio::get_u32(in) != 0;
  model.trees.resize(binio::get_u64(in));
  for (auto& tree : model.trees) tree = get_tree(in);
  if (!in) throw DataError("truncated model file: " + path);
  return model;
}

void save_gbt(const GbtModel& model, const std::string& path) {
  auto out = open_out(path);
  out.write("CGGBT00", 7);
  binio::put_u64(out, model.n_features);
  binio::put_u32(out, model.log_targets ? 1 : 0);
  binio::put_f64(out, model.f0);
  binio::put_f64(out, model.learning_rate);
  binio::put_u64(out, model.trees.size());
  for (const auto& tree : model.trees) put_tree(out, tree);
  binio::put_u64(out, model.stage_mse.size());
  for (double v : model.stage_mse) binio::put_f64(out, v);
  if (!out) throw DataError("write failed: " + path);
}

GbtModel load_gbt(const std::string& path) {
  auto in = open_in(path, "CGGBT00");
  GbtModel model;
  model.n_features = binio::get_u64(in);
  model.log_targets = binio::get_u32(in) != 0;
  model.f0 = binio::get_f64(in);
  model.learning_rate = binio::get_f64(in);
  model.trees.resize(binio::get_u64(in));
  for (auto& tree : model.trees) tree = get_tree(in);
  model.stage_mse.resize(binio::get_u64(in));
  for (auto& v : model.stage_mse) v = binio::get_f64(in);
  if (!in) throw DataError("truncated model file: " + path);
  return model;
}

void save_dnn(const DnnModel& model, const std::string& path) {
  auto out = open_out(path);
  out.write("CGDNN00", 7);
  binio::put_u64(out, model.w0.rows);
  binio::put_u64(out, model.w0.cols);
  for (double v : model.w0.data) binio::put_f64(out, v);
  for (double v : model.b0) binio::put_f64(out, v);
  for (double v : model.w1.data) binio::put_f64(out, v);
  binio::put_f64(out, model.b1);
  binio::put_u32(out, model.log_targets ? 1 : 0);
  binio::put_u64(out, model.loss_history.size());
  for (double v : model.loss_history) binio::put_f64(out, v);
  if (!out) throw DataError("write failed: " + path);
}

DnnModel load_dnn(const std::string& path) {
  auto in = open_in(path, "CGDNN00");
  DnnModel model;
  const std::size_t rows = binio::get_u64(in);
  const std::size_t cols = binio::get_u64(in);
  model.w0 = Matrix(rows, cols);
  for (auto& v : model.w0.data) v = binio::get_f64(in);
  model.b0.resize(cols);
  for (auto& v : model.b0) v = binio::get_f64(in);
  model.w1 = Matrix(cols, 1);
  for (auto& v : model.w1.data) v = binio::get_f64(in);
  model.b1 = binio::get_f64(in);
  model.log_targets = binio::get_u32(in) != 0;
  model.loss_history.resize(binio::get_u64(in));
  for (auto& v : model.loss_history) v = binio::get_f64(in);
  if (!in) throw DataError("truncated model file: " + path);
  return model;
}

// ---------------------------------------------------------------------------
// Reporting

std::vector<std::size_t> split_counts(const std::vector<Tree>& trees,
                                      std::size_t n_features) {
  std::vector<std::size_t> counts(n_features, 0);
  for (const auto& tree : trees)
    for (const auto& n : tree.nodes)
      if (n.feature >= 0) ++counts[static_cast<std::size_t>(n.feature)];
  return counts;
}

void write_split_counts_csv(const std::vector<std::string>& names,
                            const std::vector<std::size_t>& counts,
                            std::ostream& out) {
  if (names.size() != counts.size())
    throw ConfigError("feature name and count lengths differ");
  out << "feature,splits\n";
  for (std::size_t i = 0; i < names.size(); ++i)
    out << names[i] << "," << counts[i] << "\n";
}

}  // namespace citegcn::baselines
