#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

namespace citegcn {

struct AdamConfig {
  double learning_rate = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// Adam with bias correction over one flat parameter tensor. Callers keep one
// instance per tensor and call step once per epoch, so every instance's
// timestep advances in lockstep.
class Adam {
 public:
  Adam(std::size_t size, const AdamConfig& config)
      : config_(config), m_(size, 0.0), v_(size, 0.0) {}

  void step(double* params, const double* grads, std::size_t n) {
    ++t_;
    const double bc1 = 1.0 - std::pow(config_.beta1, t_);
    const double bc2 = 1.0 - std::pow(config_.beta2, t_);
    for (std::size_t i = 0; i < n; ++i) {
      m_[i] = config_.beta1 * m_[i] + (1.0 - config_.beta1) * grads[i];
      v_[i] = config_.beta2 * v_[i] + (1.0 - config_.beta2) * grads[i] * grads[i];
      const double m_hat = m_[i] / bc1;
      const double v_hat = v_[i] / bc2;
      params[i] -= config_.learning_rate * m_hat / (std::sqrt(v_hat) + config_.epsilon);
    }
  }

  void step(std::vector<double>& params, const std::vector<double>& grads) {
    step(params.data(), grads.data(), params.size());
  }

  int timestep() const { return t_; }

 private:
  AdamConfig config_;
  int t_ = 0;
  std::vector<double> m_;
  std::vector<double> v_;
};

}  // namespace citegcn
