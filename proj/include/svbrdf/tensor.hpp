#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace svbrdf::nn {

// Reverse-mode autodiff node. Tensors are cheap shared handles onto these;
// ops link nodes into a DAG and register a backward closure that scatters the
// node's grad into its inputs' grads.
struct TensorNode {
  std::vector<int> shape;
  std::vector<float> data;
  std::vector<float> grad;  // allocated on demand, same length as data

  bool requires_grad = false;  // leaf parameter flag
  bool needs_grad = false;     // this node or an ancestor wants gradients
  bool consumed = false;       // backward already ran through this node

  std::vector<std::shared_ptr<TensorNode>> inputs;
  std::function<void(TensorNode&)> backward_fn;

  std::int64_t numel() const;
  void ensure_grad();  // zero-initialized
};

class Tensor {
 public:
  Tensor() = default;

  static Tensor zeros(std::vector<int> shape);
  static Tensor full(std::vector<int> shape, float value);
  static Tensor from_data(std::vector<int> shape, std::vector<float> data);
  static Tensor scalar(float value);

  bool defined() const { return node_ != nullptr; }
  const std::vector<int>& shape() const { return node_->shape; }
  int dim(int i) const { return node_->shape[static_cast<std::size_t>(i)]; }
  std::int64_t numel() const { return node_->numel(); }

  float* data() { return node_->data.data(); }
  const float* data() const { return node_->data.data(); }
  float value() const;  // scalar tensors only

  bool has_grad() const { return !node_->grad.empty(); }
  float* grad();  // allocates zeros on first use
  const std::vector<float>& grad_vector() const { return node_->grad; }
  void zero_grad();

  bool requires_grad() const { return node_->requires_grad; }
  void set_requires_grad(bool v);

  // Same storage, detached from the graph (no inputs, no grad flow).
  Tensor detached() const;

  // Scalar outputs only. Topologically sorts the DAG, seeds d(out)/d(out)=1
  // and runs every backward closure once. A second call on the same graph
  // throws instead of corrupting gradients.
  void backward();

  std::shared_ptr<TensorNode> node() const { return node_; }
  explicit Tensor(std::shared_ptr<TensorNode> n) : node_(std::move(n)) {}

 private:
  std::shared_ptr<TensorNode> node_;
};

// RAII switch that disables graph construction (forward-only evaluation).
class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool prev_;
};

bool grad_enabled();

// Helper for ops: allocates the result node and wires inputs/backward only
// when gradients are enabled and some input needs them.
Tensor make_op_result(std::vector<int> shape, std::vector<std::shared_ptr<TensorNode>> inputs,
                      std::function<void(TensorNode&)> backward_fn);

std::string shape_string(const std::vector<int>& shape);

}  // namespace svbrdf::nn
