#include "svbrdf/tensor.hpp"

#include <algorithm>
#include <unordered_set>

#include "svbrdf/common.hpp"

namespace svbrdf::nn {

namespace {
thread_local bool g_grad_enabled = true;
}

std::int64_t TensorNode::numel() const {
  std::int64_t n = 1;
  for (int d : shape) n *= d;
  return n;
}

void TensorNode::ensure_grad() {
  if (grad.empty()) grad.assign(data.size(), 0.0f);
}

Tensor Tensor::zeros(std::vector<int> shape) { return full(std::move(shape), 0.0f); }

Tensor Tensor::full(std::vector<int> shape, float value) {
  auto node = std::make_shared<TensorNode>();
  node->shape = std::move(shape);
  node->data.assign(static_cast<std::size_t>(node->numel()), value);
  return Tensor(std::move(node));
}

Tensor Tensor::from_data(std::vector<int> shape, std::vector<float> data) {
  auto node = std::make_shared<TensorNode>();
  node->shape = std::move(shape);
  node->data = std::move(data);
  SVBRDF_REQUIRE(static_cast<std::int64_t>(node->data.size()) == node->numel(),
                 "tensor: data length does not match shape " + shape_string(node->shape));
  return Tensor(std::move(node));
}

Tensor Tensor::scalar(float value) { return full({1}, value); }

float Tensor::value() const {
  SVBRDF_REQUIRE(numel() == 1, "tensor: value() needs a scalar");
  return node_->data[0];
}

float* Tensor::grad() {
  node_->ensure_grad();
  return node_->grad.data();
}

void Tensor::zero_grad() {
  std::fill(node_->grad.begin(), node_->grad.end(), 0.0f);
}

void Tensor::set_requires_grad(bool v) {
  node_->requires_grad = v;
  node_->needs_grad = v;
}

Tensor Tensor::detached() const {
  auto node = std::make_shared<TensorNode>();
  node->shape = node_->shape;
  node->data = node_->data;
  return Tensor(std::move(node));
}

void Tensor::backward() {
  SVBRDF_REQUIRE(numel() == 1, "backward: output must be scalar");
  SVBRDF_REQUIRE(!node_->consumed, "backward: graph already consumed; re-run forward first");

  // Iterative post-order topo sort (graphs can be deep at full resolution).
  std::vector<TensorNode*> order;
  std::unordered_set<TensorNode*> seen;
  struct Frame {
    TensorNode* node;
    std::size_t next_input;
  };
  std::vector<Frame> stack;
  stack.push_back({node_.get(), 0});
  seen.insert(node_.get());
  while (!stack.empty()) {
    Frame& f = stack.back();
    if (f.next_input < f.node->inputs.size()) {
      TensorNode* in = f.node->inputs[f.next_input++].get();
      if (in->needs_grad && seen.insert(in).second) stack.push_back({in, 0});
    } else {
      order.push_back(f.node);
      stack.pop_back();
    }
  }

  node_->ensure_grad();
  node_->grad[0] = 1.0f;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    TensorNode* n = *it;
    if (!n->backward_fn) {
      // Leaves stay reusable across graphs; only interior nodes are one-shot.
      SVBRDF_REQUIRE(!n->consumed, "backward: graph already consumed; re-run forward first");
      continue;
    }
    n->consumed = true;
    for (auto& in : n->inputs)
      if (in->needs_grad) in->ensure_grad();
    n->backward_fn(*n);
    n->backward_fn = nullptr;  // free closure captures (cached forward buffers)
  }
}

NoGradGuard::NoGradGuard() : prev_(g_grad_enabled) { g_grad_enabled = false; }
NoGradGuard::~NoGradGuard() { g_grad_enabled = prev_; }

bool grad_enabled() { return g_grad_enabled; }

Tensor make_op_result(std::vector<int> shape, std::vector<std::shared_ptr<TensorNode>> inputs,
                      std::function<void(TensorNode&)> backward_fn) {
  auto node = std::make_shared<TensorNode>();
  node->shape = std::move(shape);
  node->data.resize(static_cast<std::size_t>(node->numel()));
  if (grad_enabled()) {
    bool any = false;
    for (const auto& in : inputs)
      if (in->needs_grad) any = true;
    if (any) {
      node->needs_grad = true;
      node->inputs = std::move(inputs);
      node->backward_fn = std::move(backward_fn);
    }
  }
  return Tensor(std::move(node));
}

std::string shape_string(const std::vector<int>& shape) {
  std::string s = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(shape[i]);
  }
  return s + "]";
}

}  // namespace svbrdf::nn
