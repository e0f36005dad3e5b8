#include "svbrdf/models.hpp"

#include "svbrdf/common.hpp"

namespace svbrdf::nn {

namespace {

constexpr float kLeakySlope = 0.2f;

ConvBlock make_block(int in_c, int out_c, int k, int stride, bool transpose, bool norm,
                     ConvBlock::Act act, Rng& rng) {
  ConvBlock blk;
  blk.stride = stride;
  blk.pad = 1;  // k3/s1 preserves size, k4/s2 exactly halves or doubles it
  blk.transpose = transpose;
  blk.act = act;
  const std::int64_t fan_in = static_cast<std::int64_t>(in_c) * k * k;
  blk.w = transpose ? init_weights({in_c, out_c, k, k}, fan_in, rng)
                    : init_weights({out_c, in_c, k, k}, fan_in, rng);
  blk.b = Tensor::zeros({out_c});
  if (norm) {
    blk.gamma = Tensor::full({out_c}, 1.0f);
    blk.beta = Tensor::zeros({out_c});
  }
  blk.w.set_requires_grad(true);
  blk.b.set_requires_grad(true);
  if (norm) {
    blk.gamma.set_requires_grad(true);
    blk.beta.set_requires_grad(true);
  }
  return blk;
}

void collect_group(const std::vector<ConvBlock>& blocks, std::vector<Tensor>& out) {
  for (const ConvBlock& blk : blocks) {
    out.push_back(blk.w);
    out.push_back(blk.b);
    if (blk.gamma.defined()) {
      out.push_back(blk.gamma);
      out.push_back(blk.beta);
    }
  }
}

Tensor run_blocks(const std::vector<ConvBlock>& blocks, Tensor x) {
  for (const ConvBlock& blk : blocks) x = blk.forward(x);
  return x;
}

}  // namespace

Tensor ConvBlock::forward(const Tensor& x) const {
  Tensor y = transpose ? conv_transpose2d(x, w, b, stride, pad) : conv2d(x, w, b, stride, pad);
  if (gamma.defined()) y = instance_norm(y, gamma, beta);
  switch (act) {
    case Act::lrelu: return leaky_relu(y, kLeakySlope);
    case Act::tanh: return tanh_op(y);
    case Act::sigmoid: return sigmoid(y);
  }
  return y;
}

void ConvBlock::collect(const std::string& name,
                        std::vector<std::pair<std::string, Tensor>>& out) const {
  out.emplace_back(name + ".w", w);
  out.emplace_back(name + ".b", b);
  if (gamma.defined()) {
    out.emplace_back(name + ".gamma", gamma);
    out.emplace_back(name + ".beta", beta);
  }
}

Generator::Generator(Rng& rng) {
  using Act = ConvBlock::Act;
  enc_.push_back(make_block(3, 64, 3, 1, false, true, Act::lrelu, rng));
  enc_.push_back(make_block(64, 128, 4, 2, false, true, Act::lrelu, rng));
  enc_.push_back(make_block(128, 256, 4, 2, false, true, Act::lrelu, rng));
  enc_.push_back(make_block(256, 512, 4, 2, false, true, Act::lrelu, rng));
  enc_.push_back(make_block(512, 512, 3, 1, false, true, Act::lrelu, rng));

  nr_.push_back(make_block(512, 512, 3, 1, false, true, Act::lrelu, rng));
  nr_.push_back(make_block(512, 256, 4, 2, true, true, Act::lrelu, rng));
  nr_.push_back(make_block(256, 128, 4, 2, true, true, Act::lrelu, rng));
  nr_.push_back(make_block(128, 4, 4, 2, true, false, Act::tanh, rng));

  pdp_.push_back(make_block(512, 256, 4, 2, true, true, Act::lrelu, rng));
  pdp_.push_back(make_block(256, 128, 4, 2, true, true, Act::lrelu, rng));
  pdp_.push_back(make_block(128, 4, 4, 2, true, false, Act::tanh, rng));
}

Tensor Generator::encode(const Tensor& patch) const {
  SVBRDF_REQUIRE(patch.shape().size() == 4 && patch.dim(1) == 3,
                 "generator: expected [N,3,H,W] input");
  const int h = patch.dim(2), w = patch.dim(3);
  SVBRDF_REQUIRE(h % 8 == 0 && w % 8 == 0 && h >= 16 && w >= 16,
                 "generator: input dimensions must be multiples of 8 (>= 16), got " +
                     std::to_string(w) + "x" + std::to_string(h));
  return run_blocks(enc_, patch);
}

Tensor Generator::forward(const Tensor& patch) const {
  Tensor latent = encode(patch);
  Tensor head_nr = run_blocks(nr_, latent);    // [normal xyz, roughness]
  Tensor head_pdp = run_blocks(pdp_, latent);  // [diffuse rgb, specular]
  return concat_channels(head_nr, head_pdp);
}

std::vector<Tensor> Generator::encoder_params() const {
  std::vector<Tensor> out;
  collect_group(enc_, out);
  return out;
}

std::vector<Tensor> Generator::nr_params() const {
  std::vector<Tensor> out;
  collect_group(nr_, out);
  return out;
}

std::vector<Tensor> Generator::pdp_params() const {
  std::vector<Tensor> out;
  collect_group(pdp_, out);
  return out;
}

std::vector<Tensor> Generator::params() const {
  std::vector<Tensor> out;
  collect_group(enc_, out);
  collect_group(nr_, out);
  collect_group(pdp_, out);
  return out;
}

std::vector<std::pair<std::string, Tensor>> Generator::named_params() const {
  std::vector<std::pair<std::string, Tensor>> out;
  for (std::size_t i = 0; i < enc_.size(); ++i) enc_[i].collect("enc" + std::to_string(i + 1), out);
  for (std::size_t i = 0; i < nr_.size(); ++i) nr_[i].collect("nr" + std::to_string(i + 1), out);
  for (std::size_t i = 0; i < pdp_.size(); ++i) pdp_[i].collect("pdp" + std::to_string(i + 1), out);
  return out;
}

Discriminator::Discriminator(Rng& rng) {
  using Act = ConvBlock::Act;
  blocks_.push_back(make_block(3, 64, 4, 2, false, true, Act::lrelu, rng));
  blocks_.push_back(make_block(64, 128, 4, 2, false, true, Act::lrelu, rng));
  blocks_.push_back(make_block(128, 256, 4, 2, false, true, Act::lrelu, rng));
  blocks_.push_back(make_block(256, 512, 4, 2, false, true, Act::lrelu, rng));
  blocks_.push_back(make_block(512, 1, 4, 2, false, false, Act::sigmoid, rng));
}

Tensor Discriminator::forward(const Tensor& img) const {
  SVBRDF_REQUIRE(img.shape().size() == 4 && img.dim(1) == 3,
                 "discriminator: expected [N,3,H,W] input");
  const int h = img.dim(2), w = img.dim(3);
  SVBRDF_REQUIRE(h % 32 == 0 && w % 32 == 0 && h >= 32 && w >= 32,
                 "discriminator: input dimensions must be multiples of 32, got " +
                     std::to_string(w) + "x" + std::to_string(h));
  return run_blocks(blocks_, img);
}

std::vector<Tensor> Discriminator::params() const {
  std::vector<Tensor> out;
  collect_group(blocks_, out);
  return out;
}

std::vector<std::pair<std::string, Tensor>> Discriminator::named_params() const {
  std::vector<std::pair<std::string, Tensor>> out;
  for (std::size_t i = 0; i < blocks_.size(); ++i)
    blocks_[i].collect("disc" + std::to_string(i + 1), out);
  return out;
}

std::int64_t count_params(const std::vector<Tensor>& params) {
  std::int64_t n = 0;
  for (const Tensor& p : params) n += p.numel();
  return n;
}

void set_group_requires_grad(const std::vector<Tensor>& params, bool value) {
  for (Tensor p : params) p.set_requires_grad(value);
}

}  // namespace svbrdf::nn
