#pragma once

#include "svbrdf/image.hpp"
#include "svbrdf/maps.hpp"
#include "svbrdf/tensor.hpp"

namespace svbrdf::nn {

// All tensors are NCHW. Every op registers an exact analytic backward; the
// randomized finite-difference suite in the tests is the contract.

// Cross-correlation. w is [OC, IC, KH, KW], b is [OC].
Tensor conv2d(const Tensor& x, const Tensor& w, const Tensor& b, int stride, int pad);

// Transposed convolution (adjoint of conv2d over shared weights).
// w is [IC, OC, KH, KW], b is [OC]; stride 2 doubles spatial size with
// k4 / pad 1.
Tensor conv_transpose2d(const Tensor& x, const Tensor& w, const Tensor& b, int stride, int pad);

// Per (sample, channel) standardization over H*W (eps 1e-5) with learned
// affine. gamma/beta are [C].
Tensor instance_norm(const Tensor& x, const Tensor& gamma, const Tensor& beta);

Tensor leaky_relu(const Tensor& x, float slope);
Tensor tanh_op(const Tensor& x);
Tensor sigmoid(const Tensor& x);

// y = scale * x + shift, elementwise.
Tensor affine(const Tensor& x, float scale, float shift);
Tensor add(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& x, float s);

Tensor concat_channels(const Tensor& a, const Tensor& b);
Tensor slice_channels(const Tensor& x, int c_begin, int c_end);

// -mean(t log p + (1-t) log(1-p)) with p clamped to [1e-7, 1-1e-7] before
// the log; target is a constant 0 or 1.
Tensor bce(const Tensor& pred, float target);

// mean |a - b|.
Tensor l1(const Tensor& a, const Tensor& b);

// Scalar inner product <a, b> over all elements.
Tensor dot(const Tensor& a, const Tensor& b);

// Decodes an [N,8,H,W] tanh-range tensor to material maps and renders them
// under the collocated field; gradients chain through both steps.
Tensor render_from_raw(const Tensor& raw, const DirectionField& field, float intensity);

// HWC image <-> [1,C,H,W] tensor bridges.
Tensor image_to_tensor(const LinearImage& img);
LinearImage tensor_to_image(const Tensor& t);

// [1,8,H,W] raw generator output -> decoded material maps.
SvbrdfMaps decode_raw_tensor(const Tensor& raw);

}  // namespace svbrdf::nn
