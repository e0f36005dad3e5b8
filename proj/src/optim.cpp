#include "svbrdf/optim.hpp"

#include <cmath>

#include "svbrdf/common.hpp"
#include "svbrdf/parallel.hpp"

namespace svbrdf::nn {

void adam_step(float* param, const float* grad, std::int64_t n, AdamParamState& state,
               std::int64_t step, float lr, float beta1, float beta2, float eps) {
  if (state.m.empty()) {
    state.m.assign(static_cast<std::size_t>(n), 0.0f);
    state.v.assign(static_cast<std::size_t>(n), 0.0f);
  }
  SVBRDF_REQUIRE(static_cast<std::int64_t>(state.m.size()) == n, "adam_step: state size mismatch");
  const double bc1 = 1.0 - std::pow(static_cast<double>(beta1), static_cast<double>(step));
  const double bc2 = 1.0 - std::pow(static_cast<double>(beta2), static_cast<double>(step));
  parallel_for(n, [&](std::int64_t i) {
    const float g = grad[i];
    float& m = state.m[static_cast<std::size_t>(i)];
    float& v = state.v[static_cast<std::size_t>(i)];
    m = beta1 * m + (1.0f - beta1) * g;
    v = beta2 * v + (1.0f - beta2) * g * g;
    const double mh = m / bc1;
    const double vh = v / bc2;
    param[i] -= static_cast<float>(lr * mh / (std::sqrt(vh) + eps));
  });
}

Optimizer::Optimizer(std::vector<Tensor> params, float lr, OptKind kind, float beta1, float beta2,
                     float eps)
    : params_(std::move(params)),
      states_(params_.size()),
      lr_(lr),
      kind_(kind),
      beta1_(beta1),
      beta2_(beta2),
      eps_(eps) {}

void Optimizer::step() {
  ++step_;
  for (std::size_t k = 0; k < params_.size(); ++k) {
    Tensor& p = params_[k];
    if (!p.has_grad()) continue;  // no gradient reached this parameter
    if (kind_ == OptKind::sgd) {
      const float* g = p.grad();
      float* d = p.data();
      const std::int64_t n = p.numel();
      parallel_for(n, [&](std::int64_t i) { d[i] -= lr_ * g[i]; });
    } else {
      adam_step(p.data(), p.grad(), p.numel(), states_[k], step_, lr_, beta1_, beta2_, eps_);
    }
  }
}

void Optimizer::zero_grad() {
  for (Tensor& p : params_) p.zero_grad();
}

void Optimizer::restore(std::vector<AdamParamState> states, std::int64_t step) {
  SVBRDF_REQUIRE(states.size() == params_.size(), "optimizer restore: group size mismatch");
  for (std::size_t k = 0; k < states.size(); ++k) {
    if (!states[k].m.empty())
      SVBRDF_REQUIRE(static_cast<std::int64_t>(states[k].m.size()) == params_[k].numel(),
                     "optimizer restore: moment shape mismatch");
  }
  states_ = std::move(states);
  step_ = step;
}

Tensor init_weights(std::vector<int> shape, std::int64_t fan_in, Rng& rng) {
  SVBRDF_REQUIRE(fan_in > 0, "init_weights: fan_in must be positive");
  Tensor t = Tensor::zeros(std::move(shape));
  const float sd = std::sqrt(2.0f / static_cast<float>(fan_in));
  const std::int64_t n = t.numel();
  for (std::int64_t i = 0; i < n; ++i)
    t.data()[static_cast<std::size_t>(i)] = sd * static_cast<float>(rng.normal());
  return t;
}

}  // namespace svbrdf::nn
