#include "citegcn/gcn.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <ostream>

#include "citegcn/binio.hpp"
#include "citegcn/errors.hpp"
#include "citegcn/format.hpp"

namespace citegcn::gcn {

namespace {

Matrix uniform_matrix(std::size_t rows, std::size_t cols, double scale, Rng& rng) {
  Matrix m(rows, cols);
  for (auto& v : m.data) v = rng.uniform(-scale, scale);
  return m;
}

Matrix relu(const Matrix& m) {
  Matrix out = m;
  for (auto& v : out.data) v = std::max(v, 0.0);
  return out;
}

Matrix dropout_mask(std::size_t rows, std::size_t cols, double rate, Rng* rng) {
  Matrix mask(rows, cols);
  if (rate > 0.0 && rng != nullptr) {
    const double keep_scale = 1.0 / (1.0 - rate);
    for (auto& v : mask.data) v = rng->next_double() < rate ? 0.0 : keep_scale;
  } else {
    for (auto& v : mask.data) v = 1.0;
  }
  return mask;
}

void hadamard_inplace(Matrix& a, const Matrix& b) {
  for (std::size_t i = 0; i < a.data.size(); ++i) a.data[i] *= b.data[i];
}

}  // namespace

GcnModel init(const GcnDims& dims, std::uint64_t seed) {
  if (dims.in == 0 || dims.hidden1 == 0 || dims.hidden2 == 0)
    throw ConfigError("gcn init: dimensions must be positive");
  GcnModel model;
  model.dims = dims;
  model.seed = seed;
  Rng rng(seed);
  model.w0 = uniform_matrix(dims.in, dims.hidden1,
                            1.0 / std::sqrt(static_cast<double>(dims.in)), rng);
  model.w1 = uniform_matrix(dims.hidden1, dims.hidden2,
                            1.0 / std::sqrt(static_cast<double>(dims.hidden1)), rng);
  model.w_out = uniform_matrix(dims.hidden2, 1,
                               1.0 / std::sqrt(static_cast<double>(dims.hidden2)), rng);
  model.bias = 0.0;
  return model;
}

ForwardCache forward(const GcnModel& model, const graph::NormalizedAdjacency& adj,
                     const Matrix& x, double dropout_rate, Rng* dropout_rng) {
  if (x.cols != model.dims.in)
    throw ConfigError("gcn forward: feature width does not match the model");
  if (adj.n != x.rows)
    throw ConfigError("gcn forward: adjacency and feature row counts differ");

  ForwardCache cache;
  cache.ax = graph::spmm(adj, x);
  cache.pre1 = matmul(cache.ax, model.w0);
  cache.drop1 = dropout_mask(cache.pre1.rows, cache.pre1.cols, dropout_rate, dropout_rng);
  cache.h1 = relu(cache.pre1);
  hadamard_inplace(cache.h1, cache.drop1);

  cache.ah1 = graph::spmm(adj, cache.h1);
  cache.pre2 = matmul(cache.ah1, model.w1);
  cache.drop2 = dropout_mask(cache.pre2.rows, cache.pre2.cols, dropout_rate, dropout_rng);
  cache.h2 = relu(cache.pre2);
  hadamard_inplace(cache.h2, cache.drop2);

  cache.predictions.resize(x.rows);
  for (std::size_t i = 0; i < x.rows; ++i) {
    double sum = model.bias;
    const double* row = cache.h2.row(i);
    for (std::size_t j = 0; j < cache.h2.cols; ++j) sum += row[j] * model.w_out(j, 0);
    cache.predictions[i] = sum;
  }
  for (double v : cache.predictions)
    if (!std::isfinite(v))
      throw NumericError("gcn forward: non-finite prediction");
  return cache;
}

double masked_mse(const std::vector<double>& predictions,
                  const std::vector<double>& targets,
                  const std::vector<std::size_t>& mask) {
  if (mask.empty()) throw ConfigError("masked_mse: empty mask");
  double sum = 0.0;
  for (std::size_t i : mask) {
    const double r = predictions[i] - targets[i];
    sum += r * r;
  }
  return sum / static_cast<double>(mask.size());
}

Gradients backward(const GcnModel& model, const graph::NormalizedAdjacency& adj,
                   const ForwardCache& cache, const std::vector<double>& targets,
                   const std::vector<std::size_t>& mask) {
  if (mask.empty()) throw ConfigError("backward: empty mask");
  const std::size_t n = cache.predictions.size();

  // d loss / d prediction, nonzero on masked rows only.
  Matrix grad_y(n, 1);
  const double inv = 2.0 / static_cast<double>(mask.size());
  for (std::size_t i : mask)
    grad_y(i, 0) = inv * (cache.predictions[i] - targets[i]);

  Gradients g;
  g.bias = 0.0;
  for (std::size_t i = 0; i < n; ++i) g.bias += grad_y(i, 0);

  g.w_out = matmul_tn(cache.h2, grad_y);

  // back through the output head into H2, then dropout and ReLU.
  Matrix grad_h2 = matmul_nt(grad_y, model.w_out);
  hadamard_inplace(grad_h2, cache.drop2);
  for (std::size_t i = 0; i < grad_h2.data.size(); ++i)
    if (cache.pre2.data[i] <= 0.0) grad_h2.data[i] = 0.0;

  g.w1 = matmul_tn(cache.ah1, grad_h2);

  // adj is symmetric, so the transpose product is another spmm.
  Matrix grad_h1 = graph::spmm(adj, matmul_nt(grad_h2, model.w1));
  hadamard_inplace(grad_h1, cache.drop1);
  for (std::size_t i = 0; i < grad_h1.data.size(); ++i)
    if (cache.pre1.data[i] <= 0.0) grad_h1.data[i] = 0.0;

  g.w0 = matmul_tn(cache.ax, grad_h1);
  return g;
}

TrainedModel train(const graph::NormalizedAdjacency& adj, const Matrix& x,
                   const std::vector<double>& targets,
                   const std::vector<std::size_t>& mask,
                   const TrainConfig& config) {
  if (config.epochs < 1) throw ConfigError("gcn train: epochs must be >= 1");
  if (config.learning_rate <= 0.0)
    throw ConfigError("gcn train: learning_rate must be positive");
  if (config.dropout_rate < 0.0 || config.dropout_rate >= 1.0)
    throw ConfigError("gcn train: dropout_rate must lie in [0, 1)");
  if (targets.size() != x.rows)
    throw DataError("gcn train: target count does not match rows");
  if (mask.empty()) throw DataError("gcn train: empty training mask");
  for (std::size_t i : mask)
    if (i >= x.rows) throw DataError("gcn train: mask index out of range");

  std::vector<double> y = targets;
  if (config.log_targets) {
    for (double& v : y) {
      if (v < 0.0) throw DataError("gcn train: negative target under log transform");
      v = std::log1p(v);
    }
  }

  TrainedModel trained;
  trained.log_targets = config.log_targets;
  trained.adjacency_fingerprint = graph::fingerprint(adj);
  trained.model = init({x.cols, config.hidden1, config.hidden2}, config.seed);
  GcnModel& model = trained.model;

  const AdamConfig adam_config{config.learning_rate, config.beta1, config.beta2,
                               config.epsilon};
  Adam opt_w0(model.w0.data.size(), adam_config);
  Adam opt_w1(model.w1.data.size(), adam_config);
  Adam opt_w_out(model.w_out.data.size(), adam_config);
  Adam opt_bias(1, adam_config);

  Rng dropout_rng = Rng(config.seed).fork(0xd7a9);
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    ForwardCache cache = forward(model, adj, x, config.dropout_rate, &dropout_rng);
    const double loss = masked_mse(cache.predictions, y, mask);
    if (!std::isfinite(loss))
      throw NumericError("gcn train: non-finite loss at epoch " +
                         std::to_string(epoch));
    trained.loss_history.push_back(loss);

    Gradients g = backward(model, adj, cache, y, mask);
    opt_w0.step(model.w0.data, g.w0.data);
    opt_w1.step(model.w1.data, g.w1.data);
    opt_w_out.step(model.w_out.data, g.w_out.data);
    opt_bias.step(&model.bias, &g.bias, 1);
  }
  return trained;
}

std::vector<double> predict(const TrainedModel& trained,
                            const graph::NormalizedAdjacency& adj,
                            const Matrix& x) {
  if (graph::fingerprint(adj) != trained.adjacency_fingerprint)
    throw DataError("gcn predict: adjacency differs from the training graph");
  ForwardCache cache = forward(trained.model, adj, x);
  std::vector<double> out = cache.predictions;
  for (double& v : out) {
    if (trained.log_targets) v = std::expm1(v);
    v = std::max(v, 0.0);
  }
  return out;
}

namespace {
constexpr char kModelMagic[8] = {'C', 'G', 'G', 'C', 'N', '0', '0', '\0'};
constexpr std::uint32_t kModelVersion = 1;
using namespace citegcn::binio;

void put_matrix(std::ostream& out, const Matrix& m) {
  put_u64(out, m.rows);
  put_u64(out, m.cols);
  for (double v : m.data) put_f64(out, v);
}

Matrix get_matrix(std::istream& in) {
  const std::uint64_t rows = get_u64(in);
  const std::uint64_t cols = get_u64(in);
  Matrix m(rows, cols);
  for (auto& v : m.data) v = get_f64(in);
  return m;
}
}  // namespace

void save_model(const TrainedModel& trained, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write model file: " + path);
  out.write(kModelMagic, 8);
  put_u32(out, kModelVersion);
  put_u64(out, trained.model.seed);
  put_u64(out, trained.model.dims.in);
  put_u64(out, trained.model.dims.hidden1);
  put_u64(out, trained.model.dims.hidden2);
  put_matrix(out, trained.model.w0);
  put_matrix(out, trained.model.w1);
  put_matrix(out, trained.model.w_out);
  put_f64(out, trained.model.bias);
  put_u32(out, trained.log_targets ? 1 : 0);
  put_u64(out, trained.adjacency_fingerprint);
  put_u64(out, trained.loss_history.size());
  for (double v : trained.loss_history) put_f64(out, v);
  if (!out) throw DataError("write failure: " + path);
}

TrainedModel load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open model file: " + path);
  char magic[8] = {};
  in.read(magic, 8);
  if (!in || !std::equal(magic, magic + 8, kModelMagic))
    throw DataError("not a gcn model file: " + path);
  if (get_u32(in) != kModelVersion)
    throw DataError("unsupported gcn model version: " + path);
  TrainedModel trained;
  trained.model.seed = get_u64(in);
  trained.model.dims.in = get_u64(in);
  trained.model.dims.hidden1 = get_u64(in);
  trained.model.dims.hidden2 = get_u64(in);
  trained.model.w0 = get_matrix(in);
  trained.model.w1 = get_matrix(in);
  trained.model.w_out = get_matrix(in);
  trained.model.bias = get_f64(in);
  trained.log_targets = get_u32(in) != 0;
  trained.adjacency_fingerprint = get_u64(in);
  const std::uint64_t epochs = get_u64(in);
  for (std::uint64_t i = 0; i < epochs; ++i)
    trained.loss_history.push_back(get_f64(in));
  if (!in) throw DataError("truncated gcn model file: " + path);
  return trained;
}

void write_loss_history_csv(const TrainedModel& trained, std::ostream& out) {
  out << "epoch,loss\n";
  for (std::size_t i = 0; i < trained.loss_history.size(); ++i)
    out << i << "," << format_double(trained.loss_history[i]) << "\n";
}

}  // namespace citegcn::gcn
