#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "citegcn/adam.hpp"
#include "citegcn/graph.hpp"
#include "citegcn/matrix.hpp"
#include "citegcn/rng.hpp"

namespace citegcn::gcn {

struct GcnDims {
  std::size_t in = 0;
  std::size_t hidden1 = 64;
  std::size_t hidden2 = 64;
};

// Two graph convolutions with ReLU, then a dense linear head.
struct GcnModel {
  GcnDims dims;
  Matrix w0;     // in x hidden1
  Matrix w1;     // hidden1 x hidden2
  Matrix w_out;  // hidden2 x 1
  double bias = 0.0;
  std::uint64_t seed = 0;
};

// Symmetric uniform draws scaled by 1/sqrt(fan_in); bias starts at zero.
GcnModel init(const GcnDims& dims, std::uint64_t seed);

struct ForwardCache {
  Matrix ax;      // adj * X
  Matrix pre1;    // ax * W0 before ReLU
  Matrix h1;      // after ReLU and dropout
  Matrix ah1;     // adj * H1
  Matrix pre2;    // ah1 * W1 before ReLU
  Matrix h2;      // after ReLU and dropout
  Matrix drop1;   // dropout scale factors, all ones in eval mode
  Matrix drop2;
  std::vector<double> predictions;
};

// Training mode iff dropout_rate > 0 and rng != nullptr; retained units are
// scaled by 1/(1-p) so evaluation needs no rescaling.
ForwardCache forward(const GcnModel& model, const graph::NormalizedAdjacency& adj,
                     const Matrix& x, double dropout_rate = 0.0,
                     Rng* dropout_rng = nullptr);

// Mean squared error over the masked rows only.
double masked_mse(const std::vector<double>& predictions,
                  const std::vector<double>& targets,
                  const std::vector<std::size_t>& mask);

struct Gradients {
  Matrix w0;
  Matrix w1;
  Matrix w_out;
  double bias = 0.0;
};

// Exact gradients of the masked MSE; the propagation back through the graph
// convolution reuses adj unchanged since it is symmetric.
Gradients backward(const GcnModel& model, const graph::NormalizedAdjacency& adj,
                   const ForwardCache& cache, const std::vector<double>& targets,
                   const std::vector<std::size_t>& mask);

struct TrainConfig {
  double learning_rate = 0.001;
  int epochs = 200;
  double dropout_rate = 0.2;
  std::size_t hidden1 = 64;
  std::size_t hidden2 = 64;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  bool log_targets = false;  // train on log(1+c), invert at prediction
  std::uint64_t seed = 1;
};

struct TrainedModel {
  GcnModel model;
  std::vector<double> loss_history;  // one entry per epoch
  bool log_targets = false;
  std::uint64_t adjacency_fingerprint = 0;
};

// Full-batch transductive training: every epoch runs the whole-graph forward
// pass and applies the loss on the masked rows.
TrainedModel train(const graph::NormalizedAdjacency& adj, const Matrix& x,
                   const std::vector<double>& targets,
                   const std::vector<std::size_t>& mask,
                   const TrainConfig& config);

// Eval-mode forward on the training graph; inverse target transform applied;
// clamped below at zero. Rejects a different graph.
std::vector<double> predict(const TrainedModel& trained,
                            const graph::NormalizedAdjacency& adj,
                            const Matrix& x);

void save_model(const TrainedModel& trained, const std::string& path);
TrainedModel load_model(const std::string& path);

// CSV rows: epoch,loss.
void write_loss_history_csv(const TrainedModel& trained, std::ostream& out);

}  // namespace citegcn::gcn
