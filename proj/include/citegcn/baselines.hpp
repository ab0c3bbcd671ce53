#pragma once

// Comparison models for citation-count regression: ridge-regularized linear
// regression, a random forest of depth-capped CART trees, gradient-boosted
// regression trees with squared loss, and a single-hidden-layer neural
// network trained with Adam.  All four are deterministic under a fixed seed.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "citegcn/adam.hpp"
#include "citegcn/matrix.hpp"
#include "citegcn/rng.hpp"

namespace citegcn::baselines {

// ---------------------------------------------------------------------------
// Linear regression

struct LinearModel {
  std::vector<double> weights;
  double bias = 0.0;
  bool log_targets = false;
};

// Solves the ridge-regularized normal equations (the intercept is not
// penalized).  With ridge_lambda = 0 a rank-deficient system raises
// NumericError; the small default keeps duplicated columns solvable.
LinearModel fit_linear(const Matrix& x, const std::vector<double>& y,
                       double ridge_lambda = 1e-8, bool log_targets = false);

// ---------------------------------------------------------------------------
// Regression trees (shared by the forest and the boosted ensemble)

struct TreeNode {
  std::int32_t feature = -1;  // -1 marks a leaf
  double threshold = 0.0;     // x[feature] <= threshold goes left
  double value = 0.0;         // leaf prediction (node mean while growing)
  std::int32_t left = -1;
  std::int32_t right = -1;
};

struct Tree {
  std::vector<TreeNode> nodes;  // nodes[0] is the root; empty = predict 0
};

double tree_predict(const Tree& tree, const Matrix& x, std::size_t row);
std::size_t tree_depth(const Tree& tree);

struct RandomForestConfig {
  std::size_t n_estimators = 500;
  std::size_t max_depth = 2;
  std::size_t min_samples_split = 2;
  bool log_targets = false;
};

struct RandomForestModel {
  std::vector<Tree> trees;
  std::size_t n_features = 0;
  bool log_targets = false;
};

// Each tree trains on a bootstrap resample and considers floor(sqrt(m))
// features per split (at least one); splits maximize variance reduction with
// ties broken by lowest feature index, then lowest threshold.
RandomForestModel fit_random_forest(const Matrix& x, const std::vector<double>& y,
                                    const RandomForestConfig& config,
                                    std::uint64_t seed);

struct GbtConfig {
  double learning_rate = 0.001;
  std::size_t min_samples_split = 2;
  std::size_t max_depth = 4;
  std::size_t n_estimators = 500;
  bool log_targets = false;
};

struct GbtModel {
  double f0 = 0.0;
  double learning_rate = 0.0;
  std::vector<Tree> trees;
  std::vector<double> stage_mse;  // train MSE after each stage
  std::size_t n_features = 0;
  bool log_targets = false;
};

// Stagewise squared-loss boosting: the first predictor is mean(y) and each
// stage fits a depth-capped tree to the current residuals.
GbtModel fit_gbt(const Matrix& x, const std::vector<double>& y,
                 const GbtConfig& config, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Dense network

struct DnnConfig {
  std::size_t batch_size = 256;
  double learning_rate = 0.001;
  std::size_t hidden = 512;
  double dropout_rate = 0.2;
  std::size_t epochs = 200;
  bool log_targets = false;
  std::uint64_t seed = 0;
};

struct DnnModel {
  Matrix w0;                // in x hidden
  std::vector<double> b0;   // hidden
  Matrix w1;                // hidden x 1
  double b1 = 0.0;
  bool log_targets = false;
  std::vector<double> loss_history;  // mean batch loss per epoch
};

struct DnnGradients {
  Matrix w0;
  std::vector<double> b0;
  Matrix w1;
  double b1 = 0.0;
};

DnnModel fit_dnn(const Matrix& x, const std::vector<double>& y,
                 const DnnConfig& config);

// Evaluation-mode forward pass (no dropout), in transformed target space.
std::vector<double> dnn_forward(const DnnModel& model, const Matrix& x);
double dnn_loss(const DnnModel& model, const Matrix& x,
                const std::vector<double>& y);
DnnGradients dnn_backward(const DnnModel& model, const Matrix& x,
                          const std::vector<double>& y);

// ---------------------------------------------------------------------------
// Prediction (shared policy: invert the log transform when the model was
// trained under it, then clamp below at zero)

std::vector<double> predict(const LinearModel& model, const Matrix& x);
std::vector<double> predict(const RandomForestModel& model, const Matrix& x);
std::vector<double> predict(const GbtModel& model, const Matrix& x);
std::vector<double> predict(const DnnModel& model, const Matrix& x);

// ---------------------------------------------------------------------------
// Persistence and reporting

void save_linear(const LinearModel& model, const std::string& path);
LinearModel load_linear(const std::string& path);
void save_random_forest(const RandomForestModel& model, const std::string& path);
RandomForestModel load_random_forest(const std::string& path);
void save_gbt(const GbtModel& model, const std::string& path);
GbtModel load_gbt(const std::string& path);
void save_dnn(const DnnModel& model, const std::string& path);
DnnModel load_dnn(const std::string& path);

// How often each feature was chosen as a split, summed over an ensemble.
std::vector<std::size_t> split_counts(const std::vector<Tree>& trees,
                                      std::size_t n_features);
void write_split_counts_csv(const std::vector<std::string>& names,
                            const std::vector<std::size_t>& counts,
                            std::ostream& out);

}  // namespace citegcn::baselines
