#pragma once

#include <cstdint>
#include <vector>

#include "svbrdf/rng.hpp"
#include "svbrdf/tensor.hpp"

namespace svbrdf::nn {

// First/second moment buffers for one parameter tensor.
struct AdamParamState {
  std::vector<float> m;
  std::vector<float> v;
};

// One bias-corrected Adam update on a raw buffer; shared by the graph
// optimizer and the per-pixel fitter. step counts from 1.
void adam_step(float* param, const float* grad, std::int64_t n, AdamParamState& state,
               std::int64_t step, float lr, float beta1, float beta2, float eps);

enum class OptKind { adam, sgd };

// Owns moment state for a fixed parameter group. Betas default to the
// GAN-friendly (0.5, 0.999).
class Optimizer {
 public:
  Optimizer(std::vector<Tensor> params, float lr, OptKind kind = OptKind::adam,
            float beta1 = 0.5f, float beta2 = 0.999f, float eps = 1e-8f);

  void step();       // applies grads (missing grads count as zero)
  void zero_grad();  // clears grads on all owned parameters

  float lr() const { return lr_; }
  void set_lr(float lr) { lr_ = lr; }
  std::int64_t step_count() const { return step_; }

  // Checkpoint access, parameter order = construction order.
  const std::vector<AdamParamState>& states() const { return states_; }
  void restore(std::vector<AdamParamState> states, std::int64_t step);
  const std::vector<Tensor>& params() const { return params_; }

 private:
  std::vector<Tensor> params_;
  std::vector<AdamParamState> states_;
  std::int64_t step_ = 0;
  float lr_;
  OptKind kind_;
  float beta1_, beta2_, eps_;
};

// He-style init: zero-mean normal with std sqrt(2/fan_in).
Tensor init_weights(std::vector<int> shape, std::int64_t fan_in, Rng& rng);

}  // namespace svbrdf::nn
