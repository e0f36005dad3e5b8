#include "svbrdf/ops.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <memory>

#include "svbrdf/common.hpp"
#include "svbrdf/gemm.hpp"
#include "svbrdf/parallel.hpp"
#include "svbrdf/render.hpp"

namespace svbrdf::nn {

namespace {

void require_4d(const Tensor& t, const char* who) {
  SVBRDF_REQUIRE(t.shape().size() == 4, std::string(who) + ": expected NCHW tensor, got shape " +
                                            shape_string(t.shape()));
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* who) {
  SVBRDF_REQUIRE(a.shape() == b.shape(), std::string(who) + ": shape mismatch " +
                                             shape_string(a.shape()) + " vs " +
                                             shape_string(b.shape()));
}

// x: [C,H,W] -> cols: [C*KH*KW, OH*OW] for a conv with the given geometry.
void im2col(const float* x, int c, int h, int w, int kh, int kw, int stride, int pad, int oh,
            int ow, float* cols) {
  const std::int64_t khw = static_cast<std::int64_t>(kh) * kw;
  parallel_for(c, [&](std::int64_t ci) {
    const float* src = x + ci * h * w;
    float* row = cols + ci * khw * oh * ow;
    for (int ky = 0; ky < kh; ++ky) {
      for (int kx = 0; kx < kw; ++kx) {
        for (int oy = 0; oy < oh; ++oy) {
          const int iy = oy * stride - pad + ky;
          for (int ox = 0; ox < ow; ++ox) {
            const int ix = ox * stride - pad + kx;
            *row++ = (iy >= 0 && iy < h && ix >= 0 && ix < w)
                         ? src[static_cast<std::size_t>(iy) * w + ix]
                         : 0.0f;
          }
        }
      }
    }
  });
}

// Adjoint of im2col: accumulates cols back into the [C,H,W] grid. Parallel
// over channels only, so overlapping kernel windows stay deterministic.
void col2im_add(const float* cols, int c, int h, int w, int kh, int kw, int stride, int pad,
                int oh, int ow, float* x) {
  const std::int64_t khw = static_cast<std::int64_t>(kh) * kw;
  parallel_for(c, [&](std::int64_t ci) {
    float* dst = x + ci * h * w;
    const float* row = cols + ci * khw * oh * ow;
    for (int ky = 0; ky < kh; ++ky) {
      for (int kx = 0; kx < kw; ++kx) {
        for (int oy = 0; oy < oh; ++oy) {
          const int iy = oy * stride - pad + ky;
          for (int ox = 0; ox < ow; ++ox) {
            const int ix = ox * stride - pad + kx;
            if (iy >= 0 && iy < h && ix >= 0 && ix < w)
              dst[static_cast<std::size_t>(iy) * w + ix] += *row;
            ++row;
          }
        }
      }
    }
  });
}

}  // namespace

Tensor conv2d(const Tensor& x, const Tensor& w, const Tensor& b, int stride, int pad) {
  require_4d(x, "conv2d");
  require_4d(w, "conv2d weights");
  const int n = x.dim(0), ic = x.dim(1), h = x.dim(2), wd = x.dim(3);
  const int oc = w.dim(0), kh = w.dim(2), kw = w.dim(3);
  SVBRDF_REQUIRE(w.dim(1) == ic, "conv2d: input has " + std::to_string(ic) +
                                     " channels but weights expect " + std::to_string(w.dim(1)));
  SVBRDF_REQUIRE(b.shape() == std::vector<int>{oc}, "conv2d: bias must be [out_channels]");
  const int oh = (h + 2 * pad - kh) / stride + 1;
  const int ow = (wd + 2 * pad - kw) / stride + 1;
  SVBRDF_REQUIRE(oh > 0 && ow > 0, "conv2d: kernel larger than padded input");

  const std::int64_t ckk = static_cast<std::int64_t>(ic) * kh * kw;
  const std::int64_t ohw = static_cast<std::int64_t>(oh) * ow;

  Tensor out = make_op_result(
      {n, oc, oh, ow}, {x.node(), w.node(), b.node()},
      [n, ic, h, wd, oc, kh, kw, stride, pad, oh, ow, ckk, ohw](TensorNode& node) {
        auto& xn = *node.inputs[0];
        auto& wn = *node.inputs[1];
        auto& bn = *node.inputs[2];
        std::vector<float> cols(static_cast<std::size_t>(ckk * ohw));
        std::vector<float> gcols(xn.needs_grad ? cols.size() : 0);
        for (int ni = 0; ni < n; ++ni) {
          const float* gout = node.grad.data() + static_cast<std::size_t>(ni) * oc * ohw;
          if (xn.needs_grad) {
            // gx = col2im(W^T gout)
            sgemm(true, false, static_cast<int>(ckk), static_cast<int>(ohw), oc, 1.0f,
                  wn.data.data(), gout, 0.0f, gcols.data());
            col2im_add(gcols.data(), ic, h, wd, kh, kw, stride, pad, oh, ow,
                       xn.grad.data() + static_cast<std::size_t>(ni) * ic * h * wd);
          }
          if (wn.needs_grad) {
            im2col(xn.data.data() + static_cast<std::size_t>(ni) * ic * h * wd, ic, h, wd, kh, kw,
                   stride, pad, oh, ow, cols.data());
            // gw += gout cols^T
            sgemm(false, true, oc, static_cast<int>(ckk), static_cast<int>(ohw), 1.0f, gout,
                  cols.data(), 1.0f, wn.grad.data());
          }
          if (bn.needs_grad) {
            for (int o = 0; o < oc; ++o) {
              double s = 0.0;
              const float* g = gout + static_cast<std::size_t>(o) * ohw;
              for (std::int64_t i = 0; i < ohw; ++i) s += g[i];
              bn.grad[static_cast<std::size_t>(o)] += static_cast<float>(s);
            }
          }
        }
      });

  std::vector<float> cols(static_cast<std::size_t>(ckk * ohw));
  for (int ni = 0; ni < n; ++ni) {
    im2col(x.data() + static_cast<std::size_t>(ni) * ic * h * wd, ic, h, wd, kh, kw, stride, pad,
           oh, ow, cols.data());
    float* dst = out.data() + static_cast<std::size_t>(ni) * oc * ohw;
    sgemm(false, false, oc, static_cast<int>(ohw), static_cast<int>(ckk), 1.0f, w.data(),
          cols.data(), 0.0f, dst);
    parallel_for(oc, [&](std::int64_t o) {
      const float bias = b.data()[o];
      float* row = dst + o * ohw;
      for (std::int64_t i = 0; i < ohw; ++i) row[i] += bias;
    });
  }
  return out;
}

Tensor conv_transpose2d(const Tensor& x, const Tensor& w, const Tensor& b, int stride, int pad) {
  require_4d(x, "conv_transpose2d");
  require_4d(w, "conv_transpose2d weights");
  const int n = x.dim(0), ic = x.dim(1), ih = x.dim(2), iw = x.dim(3);
  const int oc = w.dim(1), kh = w.dim(2), kw = w.dim(3);
  SVBRDF_REQUIRE(w.dim(0) == ic, "conv_transpose2d: input has " + std::to_string(ic) +
                                     " channels but weights expect " + std::to_string(w.dim(0)));
  SVBRDF_REQUIRE(b.shape() == std::vector<int>{oc}, "conv_transpose2d: bias must be [out_channels]");
  const int oh = (ih - 1) * stride - 2 * pad + kh;
  const int ow = (iw - 1) * stride - 2 * pad + kw;
  SVBRDF_REQUIRE(oh > 0 && ow > 0, "conv_transpose2d: degenerate output size");

  const std::int64_t okk = static_cast<std::int64_t>(oc) * kh * kw;
  const std::int64_t ihw = static_cast<std::int64_t>(ih) * iw;

  Tensor out = make_op_result(
      {n, oc, oh, ow}, {x.node(), w.node(), b.node()},
      [n, ic, ih, iw, oc, kh, kw, stride, pad, oh, ow, okk, ihw](TensorNode& node) {
        auto& xn = *node.inputs[0];
        auto& wn = *node.inputs[1];
        auto& bn = *node.inputs[2];
        const std::int64_t ohw = static_cast<std::int64_t>(oh) * ow;
        std::vector<float> gcols(static_cast<std::size_t>(okk * ihw));
        for (int ni = 0; ni < n; ++ni) {
          const float* gout = node.grad.data() + static_cast<std::size_t>(ni) * oc * ohw;
          // Both input- and weight-gradients consume im2col(gout).
          im2col(gout, oc, oh, ow, kh, kw, stride, pad, ih, iw, gcols.data());
          if (xn.needs_grad) {
            sgemm(false, false, ic, static_cast<int>(ihw), static_cast<int>(okk), 1.0f,
                  wn.data.data(), gcols.data(), 1.0f,
                  xn.grad.data() + static_cast<std::size_t>(ni) * ic * ihw);
          }
          if (wn.needs_grad) {
            sgemm(false, true, ic, static_cast<int>(okk), static_cast<int>(ihw), 1.0f,
                  xn.data.data() + static_cast<std::size_t>(ni) * ic * ihw, gcols.data(), 1.0f,
                  wn.grad.data());
          }
          if (bn.needs_grad) {
            for (int o = 0; o < oc; ++o) {
              double s = 0.0;
              const float* g = gout + static_cast<std::size_t>(o) * ohw;
              for (std::int64_t i = 0; i < ohw; ++i) s += g[i];
              bn.grad[static_cast<std::size_t>(o)] += static_cast<float>(s);
            }
          }
        }
      });

  const std::int64_t ohw = static_cast<std::int64_t>(oh) * ow;
  std::vector<float> cols(static_cast<std::size_t>(okk * ihw));
  for (int ni = 0; ni < n; ++ni) {
    // cols = W^T x, then scatter through the adjoint of im2col.
    sgemm(true, false, static_cast<int>(okk), static_cast<int>(ihw), ic, 1.0f, w.data(),
          x.data() + static_cast<std::size_t>(ni) * ic * ihw, 0.0f, cols.data());
    float* dst = out.data() + static_cast<std::size_t>(ni) * oc * ohw;
    parallel_for(oc, [&](std::int64_t o) {
      const float bias = b.data()[o];
      float* row = dst + o * ohw;
      for (std::int64_t i = 0; i < ohw; ++i) row[i] = bias;
    });
    col2im_add(cols.data(), oc, oh, ow, kh, kw, stride, pad, ih, iw, dst);
  }
  return out;
}

Tensor instance_norm(const Tensor& x, const Tensor& gamma, const Tensor& beta) {
  require_4d(x, "instance_norm");
  const int n = x.dim(0), c = x.dim(1), h = x.dim(2), w = x.dim(3);
  const std::int64_t m = static_cast<std::int64_t>(h) * w;
  SVBRDF_REQUIRE(m >= 2, "instance_norm: needs at least 2 spatial elements");
  SVBRDF_REQUIRE(gamma.shape() == std::vector<int>{c} && beta.shape() == std::vector<int>{c},
                 "instance_norm: gamma/beta must be [channels]");
  constexpr double kEps = 1e-5;

  // Per-(n,c) statistics cached for backward.
  auto stats = std::make_shared<std::vector<double>>(static_cast<std::size_t>(n) * c * 2);

  Tensor out = make_op_result(
      {n, c, h, w}, {x.node(), gamma.node(), beta.node()}, [n, c, m, stats](TensorNode& node) {
        auto& xn = *node.inputs[0];
        auto& gn = *node.inputs[1];
        auto& bn = *node.inputs[2];
        // Channel-major parallelism keeps gamma/beta accumulation race-free.
        parallel_for(c, [&](std::int64_t ci) {
          for (int ni = 0; ni < n; ++ni) {
            const std::size_t base = (static_cast<std::size_t>(ni) * c + ci) * m;
            const double mu = (*stats)[(static_cast<std::size_t>(ni) * c + ci) * 2];
            const double inv = (*stats)[(static_cast<std::size_t>(ni) * c + ci) * 2 + 1];
            const float g = gn.data[static_cast<std::size_t>(ci)];
            double sum_g = 0.0, sum_gx = 0.0;
            for (std::int64_t i = 0; i < m; ++i) {
              const double xhat = (xn.data[base + i] - mu) * inv;
              const double go = node.grad[base + i];
              sum_g += go;
              sum_gx += go * xhat;
            }
            if (gn.needs_grad) gn.grad[static_cast<std::size_t>(ci)] += static_cast<float>(sum_gx);
            if (bn.needs_grad) bn.grad[static_cast<std::size_t>(ci)] += static_cast<float>(sum_g);
            if (xn.needs_grad) {
              const double mean_g = sum_g / static_cast<double>(m);
              const double mean_gx = sum_gx / static_cast<double>(m);
              for (std::int64_t i = 0; i < m; ++i) {
                const double xhat = (xn.data[base + i] - mu) * inv;
                const double go = node.grad[base + i];
                xn.grad[base + i] +=
                    static_cast<float>(g * inv * (go - mean_g - xhat * mean_gx));
              }
            }
          }
        });
      });

  parallel_for(static_cast<std::int64_t>(n) * c, [&](std::int64_t nc) {
    const std::size_t base = static_cast<std::size_t>(nc) * m;
    double sum = 0.0;
    for (std::int64_t i = 0; i < m; ++i) sum += x.data()[base + i];
    const double mu = sum / static_cast<double>(m);
    double var = 0.0;
    for (std::int64_t i = 0; i < m; ++i) {
      const double d = x.data()[base + i] - mu;
      var += d * d;
    }
    var /= static_cast<double>(m);
    const double inv = 1.0 / std::sqrt(var + kEps);
    (*stats)[static_cast<std::size_t>(nc) * 2] = mu;
    (*stats)[static_cast<std::size_t>(nc) * 2 + 1] = inv;
    const int ci = static_cast<int>(nc % c);
    const float g = gamma.data()[ci];
    const float bt = beta.data()[ci];
    for (std::int64_t i = 0; i < m; ++i)
      out.data()[base + i] = static_cast<float>((x.data()[base + i] - mu) * inv) * g + bt;
  });
  return out;
}

namespace {

template <typename Fwd, typename Bwd>
Tensor elementwise(const Tensor& x, Fwd fwd, Bwd bwd_factor) {
  // bwd_factor(x_i, y_i) returns dy/dx at element i.
  auto y_cache = std::make_shared<std::vector<float>>();
  Tensor out = make_op_result(x.shape(), {x.node()}, [y_cache, bwd_factor](TensorNode& node) {
    auto& xn = *node.inputs[0];
    if (!xn.needs_grad) return;
    const std::int64_t n = node.numel();
    parallel_for(n, [&](std::int64_t i) {
      xn.grad[static_cast<std::size_t>(i)] +=
          node.grad[static_cast<std::size_t>(i)] *
          bwd_factor(xn.data[static_cast<std::size_t>(i)], (*y_cache)[static_cast<std::size_t>(i)]);
    });
  });
  const std::int64_t n = x.numel();
  y_cache->resize(static_cast<std::size_t>(n));
  parallel_for(n, [&](std::int64_t i) {
    const float y = fwd(x.data()[static_cast<std::size_t>(i)]);
    out.data()[static_cast<std::size_t>(i)] = y;
    (*y_cache)[static_cast<std::size_t>(i)] = y;
  });
  return out;
}

}  // namespace

Tensor leaky_relu(const Tensor& x, float slope) {
  return elementwise(
      x, [slope](float v) { return v > 0.0f ? v : slope * v; },
      [slope](float v, float) { return v > 0.0f ? 1.0f : slope; });
}

Tensor tanh_op(const Tensor& x) {
  return elementwise(
      x, [](float v) { return std::tanh(v); }, [](float, float y) { return 1.0f - y * y; });
}

Tensor sigmoid(const Tensor& x) {
  return elementwise(
      x, [](float v) { return 1.0f / (1.0f + std::exp(-v)); },
      [](float, float y) { return y * (1.0f - y); });
}

Tensor affine(const Tensor& x, float s, float shift) {
  return elementwise(
      x, [s, shift](float v) { return s * v + shift; }, [s](float, float) { return s; });
}

Tensor scale(const Tensor& x, float s) { return affine(x, s, 0.0f); }

Tensor add(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "add");
  Tensor out = make_op_result(a.shape(), {a.node(), b.node()}, [](TensorNode& node) {
    for (int k = 0; k < 2; ++k) {
      auto& in = *node.inputs[static_cast<std::size_t>(k)];
      if (!in.needs_grad) continue;
      const std::int64_t n = node.numel();
      parallel_for(n, [&](std::int64_t i) {
        in.grad[static_cast<std::size_t>(i)] += node.grad[static_cast<std::size_t>(i)];
      });
    }
  });
  const std::int64_t n = a.numel();
  parallel_for(n, [&](std::int64_t i) {
    out.data()[static_cast<std::size_t>(i)] =
        a.data()[static_cast<std::size_t>(i)] + b.data()[static_cast<std::size_t>(i)];
  });
  return out;
}

Tensor concat_channels(const Tensor& a, const Tensor& b) {
  require_4d(a, "concat_channels");
  require_4d(b, "concat_channels");
  SVBRDF_REQUIRE(a.dim(0) == b.dim(0) && a.dim(2) == b.dim(2) && a.dim(3) == b.dim(3),
                 "concat_channels: non-channel dims must agree");
  const int n = a.dim(0), ca = a.dim(1), cb = b.dim(1), h = a.dim(2), w = a.dim(3);
  const std::int64_t m = static_cast<std::int64_t>(h) * w;
  Tensor out = make_op_result({n, ca + cb, h, w}, {a.node(), b.node()},
                              [n, ca, cb, m](TensorNode& node) {
                                auto& an = *node.inputs[0];
                                auto& bn = *node.inputs[1];
                                for (int ni = 0; ni < n; ++ni) {
                                  const float* g =
                                      node.grad.data() + static_cast<std::size_t>(ni) * (ca + cb) * m;
                                  if (an.needs_grad) {
                                    float* ga = an.grad.data() + static_cast<std::size_t>(ni) * ca * m;
                                    for (std::int64_t i = 0; i < ca * m; ++i) ga[i] += g[i];
                                  }
                                  if (bn.needs_grad) {
                                    float* gb = bn.grad.data() + static_cast<std::size_t>(ni) * cb * m;
                                    const float* gsrc = g + ca * m;
                                    for (std::int64_t i = 0; i < cb * m; ++i) gb[i] += gsrc[i];
                                  }
                                }
                              });
  for (int ni = 0; ni < n; ++ni) {
    float* dst = out.data() + static_cast<std::size_t>(ni) * (ca + cb) * m;
    std::memcpy(dst, a.data() + static_cast<std::size_t>(ni) * ca * m,
                static_cast<std::size_t>(ca * m) * sizeof(float));
    std::memcpy(dst + ca * m, b.data() + static_cast<std::size_t>(ni) * cb * m,
                static_cast<std::size_t>(cb * m) * sizeof(float));
  }
  return out;
}

Tensor slice_channels(const Tensor& x, int c_begin, int c_end) {
  require_4d(x, "slice_channels");
  const int n = x.dim(0), c = x.dim(1), h = x.dim(2), w = x.dim(3);
  SVBRDF_REQUIRE(0 <= c_begin && c_begin < c_end && c_end <= c,
                 "slice_channels: bad range [" + std::to_string(c_begin) + "," +
                     std::to_string(c_end) + ") for " + std::to_string(c) + " channels");
  const int cs = c_end - c_begin;
  const std::int64_t m = static_cast<std::int64_t>(h) * w;
  Tensor out = make_op_result({n, cs, h, w}, {x.node()}, [n, c, cs, c_begin, m](TensorNode& node) {
    auto& xn = *node.inputs[0];
    if (!xn.needs_grad) return;
    for (int ni = 0; ni < n; ++ni) {
      float* gx = xn.grad.data() + (static_cast<std::size_t>(ni) * c + c_begin) * m;
      const float* g = node.grad.data() + static_cast<std::size_t>(ni) * cs * m;
      for (std::int64_t i = 0; i < cs * m; ++i) gx[i] += g[i];
    }
  });
  for (int ni = 0; ni < n; ++ni) {
    std::memcpy(out.data() + static_cast<std::size_t>(ni) * cs * m,
                x.data() + (static_cast<std::size_t>(ni) * c + c_begin) * m,
                static_cast<std::size_t>(cs * m) * sizeof(float));
  }
  return out;
}

Tensor bce(const Tensor& pred, float target) {
  SVBRDF_REQUIRE(target == 0.0f || target == 1.0f, "bce: target must be 0 or 1");
  constexpr float kLo = 1e-7f;
  constexpr float kHi = 1.0f - 1e-7f;
  const std::int64_t n = pred.numel();
  Tensor out = make_op_result({1}, {pred.node()}, [target, n](TensorNode& node) {
    auto& pn = *node.inputs[0];
    if (!pn.needs_grad) return;
    const float go = node.grad[0] / static_cast<float>(n);
    parallel_for(n, [&](std::int64_t i) {
      const float p = pn.data[static_cast<std::size_t>(i)];
      if (p <= kLo || p >= kHi) return;  // clamp region: zero sub-gradient
      const float d = target == 1.0f ? -1.0f / p : 1.0f / (1.0f - p);
      pn.grad[static_cast<std::size_t>(i)] += go * d;
    });
  });
  double acc = 0.0;
  for (std::int64_t i = 0; i < n; ++i) {
    const double p = std::clamp(pred.data()[static_cast<std::size_t>(i)], kLo, kHi);
    acc += target == 1.0f ? -std::log(p) : -std::log(1.0 - p);
  }
  out.data()[0] = static_cast<float>(acc / static_cast<double>(n));
  return out;
}

Tensor l1(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "l1");
  const std::int64_t n = a.numel();
  Tensor out = make_op_result({1}, {a.node(), b.node()}, [n](TensorNode& node) {
    auto& an = *node.inputs[0];
    auto& bn = *node.inputs[1];
    const float go = node.grad[0] / static_cast<float>(n);
    parallel_for(n, [&](std::int64_t i) {
      const float d = an.data[static_cast<std::size_t>(i)] - bn.data[static_cast<std::size_t>(i)];
      const float s = d > 0.0f ? go : (d < 0.0f ? -go : 0.0f);
      if (an.needs_grad) an.grad[static_cast<std::size_t>(i)] += s;
      if (bn.needs_grad) bn.grad[static_cast<std::size_t>(i)] -= s;
    });
  });
  double acc = 0.0;
  for (std::int64_t i = 0; i < n; ++i)
    acc += std::fabs(static_cast<double>(a.data()[static_cast<std::size_t>(i)]) -
                     b.data()[static_cast<std::size_t>(i)]);
  out.data()[0] = static_cast<float>(acc / static_cast<double>(n));
  return out;
}

Tensor dot(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "dot");
  const std::int64_t n = a.numel();
  Tensor out = make_op_result({1}, {a.node(), b.node()}, [n](TensorNode& node) {
    auto& an = *node.inputs[0];
    auto& bn = *node.inputs[1];
    const float go = node.grad[0];
    parallel_for(n, [&](std::int64_t i) {
      const auto s = static_cast<std::size_t>(i);
      if (an.needs_grad) an.grad[s] += go * bn.data[s];
      if (bn.needs_grad) bn.grad[s] += go * an.data[s];
    });
  });
  double acc = 0.0;
  for (std::int64_t i = 0; i < n; ++i)
    acc += static_cast<double>(a.data()[static_cast<std::size_t>(i)]) *
           b.data()[static_cast<std::size_t>(i)];
  out.data()[0] = static_cast<float>(acc);
  return out;
}

Tensor render_from_raw(const Tensor& raw, const DirectionField& field, float intensity) {
  require_4d(raw, "render_from_raw");
  const int n = raw.dim(0), h = raw.dim(2), w = raw.dim(3);
  SVBRDF_REQUIRE(raw.dim(1) == 8, "render_from_raw: expected 8 raw channels");
  SVBRDF_REQUIRE(field.width == w && field.height == h,
                 "render_from_raw: field resolution mismatch");
  const std::int64_t m = static_cast<std::int64_t>(h) * w;
  auto fld = std::make_shared<DirectionField>(field);

  Tensor out =
      make_op_result({n, 3, h, w}, {raw.node()}, [n, m, fld, intensity](TensorNode& node) {
        auto& rn = *node.inputs[0];
        if (!rn.needs_grad) return;
        for (int ni = 0; ni < n; ++ni) {
          const float* rdata = rn.data.data() + static_cast<std::size_t>(ni) * 8 * m;
          float* rgrad = rn.grad.data() + static_cast<std::size_t>(ni) * 8 * m;
          const float* g = node.grad.data() + static_cast<std::size_t>(ni) * 3 * m;
          parallel_for(m, [&](std::int64_t p) {
            float t[8], nrm[3], dif[3], spec, rough;
            for (int k = 0; k < 8; ++k) t[k] = rdata[k * m + p];
            decode_pixel(t, nrm, dif, &spec, &rough);
            const float up[3] = {g[p], g[m + p], g[2 * m + p]};
            float gn[3], gd[3], gs, gr;
            render_pixel_backward(nrm, dif, spec, rough, fld->at(static_cast<int>(p % fld->width),
                                                                 static_cast<int>(p / fld->width)),
                                  intensity, up, gn, gd, &gs, &gr);
            float gt[8];
            decode_pixel_backward(t, gn, gd, gs, gr, gt);
            for (int k = 0; k < 8; ++k) rgrad[k * m + p] += gt[k];
          });
        }
      });

  for (int ni = 0; ni < n; ++ni) {
    const float* rdata = raw.data() + static_cast<std::size_t>(ni) * 8 * m;
    float* dst = out.data() + static_cast<std::size_t>(ni) * 3 * m;
    parallel_for(m, [&](std::int64_t p) {
      float t[8], nrm[3], dif[3], spec, rough, rgb[3];
      for (int k = 0; k < 8; ++k) t[k] = rdata[k * m + p];
      decode_pixel(t, nrm, dif, &spec, &rough);
      render_pixel(nrm, dif, spec, rough,
                   field.at(static_cast<int>(p % field.width), static_cast<int>(p / field.width)),
                   intensity, rgb);
      for (int k = 0; k < 3; ++k) dst[k * m + p] = rgb[k];
    });
  }
  return out;
}

Tensor image_to_tensor(const LinearImage& img) {
  img.validate();
  const std::int64_t m = static_cast<std::int64_t>(img.width) * img.height;
  Tensor t = Tensor::zeros({1, img.channels, img.height, img.width});
  for (std::int64_t p = 0; p < m; ++p)
    for (int c = 0; c < img.channels; ++c)
      t.data()[c * m + p] = img.data[static_cast<std::size_t>(p) * img.channels + c];
  return t;
}

SvbrdfMaps decode_raw_tensor(const Tensor& raw) {
  SVBRDF_REQUIRE(raw.shape().size() == 4 && raw.dim(0) == 1 && raw.dim(1) == 8,
                 "decode_raw_tensor: expected [1,8,H,W], got " + shape_string(raw.shape()));
  const int h = raw.dim(2), w = raw.dim(3);
  const std::int64_t m = static_cast<std::int64_t>(h) * w;
  std::vector<float> hwc(static_cast<std::size_t>(m) * 8);
  for (std::int64_t p = 0; p < m; ++p)
    for (int c = 0; c < 8; ++c) hwc[static_cast<std::size_t>(p) * 8 + c] = raw.data()[c * m + p];
  return decode_maps(hwc, w, h);
}

LinearImage tensor_to_image(const Tensor& t) {
  SVBRDF_REQUIRE(t.shape().size() == 4 && t.dim(0) == 1 && (t.dim(1) == 1 || t.dim(1) == 3),
                 "tensor_to_image: expected [1,1|3,H,W], got " + shape_string(t.shape()));
  LinearImage img(t.dim(3), t.dim(2), t.dim(1));
  const std::int64_t m = static_cast<std::int64_t>(img.width) * img.height;
  for (std::int64_t p = 0; p < m; ++p)
    for (int c = 0; c < img.channels; ++c)
      img.data[static_cast<std::size_t>(p) * img.channels + c] = t.data()[c * m + p];
  return img;
}

}  // namespace svbrdf::nn
