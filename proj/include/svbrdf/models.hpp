#pragma once

#include <string>
#include <utility>
#include <vector>

#include "svbrdf/ops.hpp"
#include "svbrdf/optim.hpp"
#include "svbrdf/rng.hpp"
#include "svbrdf/tensor.hpp"

namespace svbrdf::nn {

// Conv or deconv followed by optional instance norm and an activation.
struct ConvBlock {
  Tensor w, b;
  Tensor gamma, beta;  // undefined when the block is unnormalized
  int stride = 1;
  int pad = 1;
  bool transpose = false;
  enum class Act { lrelu, tanh, sigmoid } act = Act::lrelu;

  Tensor forward(const Tensor& x) const;
  void collect(const std::string& name, std::vector<std::pair<std::string, Tensor>>& out) const;
};

// Auto-encoder generator: shared encoder, one head for normal+roughness,
// one for diffuse+specular. Output is the 8-channel raw map in (-1,1) with
// layout [normal xyz, roughness, diffuse rgb, specular].
class Generator {
 public:
  explicit Generator(Rng& rng);

  // x8 spatial downsample; exposed so the latent contract is testable.
  Tensor encode(const Tensor& patch) const;
  Tensor forward(const Tensor& patch) const;

  std::vector<Tensor> encoder_params() const;
  std::vector<Tensor> nr_params() const;
  std::vector<Tensor> pdp_params() const;
  std::vector<Tensor> params() const;
  std::vector<std::pair<std::string, Tensor>> named_params() const;

 private:
  std::vector<ConvBlock> enc_;
  std::vector<ConvBlock> nr_;
  std::vector<ConvBlock> pdp_;
};

// Five stride-2 convolutions ending in sigmoid patch scores: S -> S/32.
class Discriminator {
 public:
  explicit Discriminator(Rng& rng);

  Tensor forward(const Tensor& img) const;

  std::vector<Tensor> params() const;
  std::vector<std::pair<std::string, Tensor>> named_params() const;

 private:
  std::vector<ConvBlock> blocks_;
};

std::int64_t count_params(const std::vector<Tensor>& params);

// Flips requires_grad on a parameter group; used to freeze sub-networks so
// backward skips their weight gradients entirely.
void set_group_requires_grad(const std::vector<Tensor>& params, bool value);

}  // namespace svbrdf::nn
