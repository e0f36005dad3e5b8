// Acceptance gate: one pass/fail line per criterion, nonzero exit when any
// fails. Run through ctest or directly; an optional integer argument
// restricts the run to that single criterion.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "support.hpp"
#include "svbrdf/eval.hpp"
#include "svbrdf/homography.hpp"
#include "svbrdf/image.hpp"
#include "svbrdf/maps.hpp"
#include "svbrdf/ops.hpp"
#include "svbrdf/parallel.hpp"
#include "svbrdf/render.hpp"
#include "svbrdf/rng.hpp"
#include "svbrdf/tensor.hpp"
#include "svbrdf/trainer.hpp"
#include "svbrdf/warp.hpp"

using namespace svbrdf;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool ok = false;
  std::string detail;
};

// ---------------------------------------------------------------------------
// Shared fixtures.

// Nine noiseless views of the glossy preset plus their min-composite prior,
// the standard training scene for the GAN criteria.
struct TrainingScene {
  std::vector<LinearImage> photos;
  LinearImage guessed;

  explicit TrainingScene(int size) {
    SvbrdfMaps gt = make_synthetic_maps("glossy", size);
    SynthParams sp;
    sp.noise_sigma = 0.0f;
    photos = synth_views(gt, offset_grid(3, 0.25), sp);
    ExtractParams ep;
    ep.prealigned = true;
    ep.exposure_normalize = false;
    guessed = extract_guessed_diffuse(photos, ep).guessed_diffuse;
  }
};

// ---------------------------------------------------------------------------
// Criterion 1: analytic renderer gradients vs central finite differences.

Outcome criterion_renderer_gradients() {
  const int n = 1000;
  Rng rng(2001);

  SvbrdfMaps maps;
  maps.normal = LinearImage(n, 1, 3);
  maps.diffuse = LinearImage(n, 1, 3);
  maps.specular = LinearImage(n, 1, 1);
  maps.roughness = LinearImage(n, 1, 1);
  DirectionField field;
  field.width = n;
  field.height = 1;
  field.dirs.resize(static_cast<std::size_t>(n) * 3);
  LinearImage upstream(n, 1, 3);

  std::vector<testsup::OraclePixel> oracle(n);
  std::vector<std::array<double, 3>> omega(n);
  for (int i = 0; i < n; ++i) {
    std::array<double, 3> nrm{}, w{};
    double c = 0.0;
    do {
      nrm = testsup::random_direction(rng, 0.15);
      w = testsup::random_direction(rng, 0.3);
      c = nrm[0] * w[0] + nrm[1] * w[1] + nrm[2] * w[2];
    } while (c < 0.1);
    testsup::OraclePixel& px = oracle[i];
    px.normal = nrm;
    px.diffuse = {rng.uniform_f(), rng.uniform_f(), rng.uniform_f()};
    px.specular = rng.uniform_f();
    px.roughness = 0.05 + 0.95 * rng.uniform_f();
    omega[i] = w;
    for (int k = 0; k < 3; ++k) {
      maps.normal.at(i, 0, k) = static_cast<float>(nrm[k]);
      maps.diffuse.at(i, 0, k) = static_cast<float>(px.diffuse[k]);
      field.dirs[static_cast<std::size_t>(i) * 3 + k] = static_cast<float>(w[k]);
      upstream.at(i, 0, k) = rng.uniform_f() * 2.0f - 1.0f;
    }
    maps.specular.at(i, 0, 0) = static_cast<float>(px.specular);
    maps.roughness.at(i, 0, 0) = static_cast<float>(px.roughness);
  }

  const float intensity = kDefaultIntensity;
  MapGradients an = render_gradients(maps, field, intensity, upstream);

  // A small step keeps central-difference truncation (worst in the roughness
  // direction of the specular lobe) well below the 1e-4 acceptance line; the
  // oracle runs in double so roundoff stays negligible at this step.
  const double h = 1e-6;
  int good = 0;
  double worst = 0.0;
  for (int i = 0; i < n; ++i) {
    const testsup::OraclePixel& px = oracle[i];
    const std::array<double, 3> up = {upstream.at(i, 0, 0), upstream.at(i, 0, 1),
                                      upstream.at(i, 0, 2)};
    auto weighted = [&](const testsup::OraclePixel& p) {
      const auto rgb = testsup::oracle_render(p, omega[i], intensity);
      return up[0] * rgb[0] + up[1] * rgb[1] + up[2] * rgb[2];
    };

    double fd[8], ana[8];
    // Normal: perturb each component and renormalize; this finite difference
    // converges to the tangent-projected gradient the renderer reports.
    for (int k = 0; k < 3; ++k) {
      auto at = [&](double delta) {
        testsup::OraclePixel p = px;
        p.normal[k] += delta;
        p.normal = testsup::normalized(p.normal);
        return weighted(p);
      };
      fd[k] = (at(h) - at(-h)) / (2.0 * h);
      ana[k] = an.normal.at(i, 0, k);
    }
    for (int k = 0; k < 3; ++k) {
      auto at = [&](double delta) {
        testsup::OraclePixel p = px;
        p.diffuse[k] += delta;
        return weighted(p);
      };
      fd[3 + k] = (at(h) - at(-h)) / (2.0 * h);
      ana[3 + k] = an.diffuse.at(i, 0, k);
    }
    {
      auto at = [&](double delta) {
        testsup::OraclePixel p = px;
        p.specular += delta;
        return weighted(p);
      };
      fd[6] = (at(h) - at(-h)) / (2.0 * h);
      ana[6] = an.specular.at(i, 0, 0);
      auto at_r = [&](double delta) {
        testsup::OraclePixel p = px;
        p.roughness += delta;
        return weighted(p);
      };
      fd[7] = (at_r(h) - at_r(-h)) / (2.0 * h);
      ana[7] = an.roughness.at(i, 0, 0);
    }

    double scale = 1e-6;
    for (double v : fd) scale = std::max(scale, std::abs(v));
    double err = 0.0;
    for (int k = 0; k < 8; ++k) err = std::max(err, std::abs(ana[k] - fd[k]) / scale);
    worst = std::max(worst, err);
    if (err < 1e-4) ++good;
  }

  std::ostringstream os;
  os << good << "/" << n << " pixels under 1e-4 relative error, worst " << worst;
  return {good >= 990, os.str()};
}

// ---------------------------------------------------------------------------
// Criterion 2: network-layer finite differences and conv adjointness.

double fd_probe(nn::Tensor& x, std::size_t idx, const std::function<nn::Tensor()>& objective,
                double h) {
  nn::NoGradGuard guard;
  const float orig = x.data()[idx];
  x.data()[idx] = static_cast<float>(orig + h);
  const double fp = objective().value();
  x.data()[idx] = static_cast<float>(orig - h);
  const double fm = objective().value();
  x.data()[idx] = orig;
  return (fp - fm) / (2.0 * h);
}

// Max finite-difference error over sampled elements of target, normalized by
// the largest finite-difference magnitude in the tensor (floored so all-zero
// gradients stay checkable). Probes evaluate the objective under NoGrad.
double layer_grad_err(nn::Tensor& target, const std::function<nn::Tensor()>& objective, double h,
                      int samples, Rng& rng) {
  target.zero_grad();
  nn::Tensor loss = objective();
  loss.backward();
  const std::vector<float> an = target.grad_vector();

  const std::size_t n = static_cast<std::size_t>(target.numel());
  std::vector<std::size_t> idx;
  if (static_cast<int>(n) <= samples) {
    for (std::size_t i = 0; i < n; ++i) idx.push_back(i);
  } else {
    for (int s = 0; s < samples; ++s)
      idx.push_back(static_cast<std::size_t>(rng.uniform_int(n)));
  }

  std::vector<double> fds(idx.size());
  double scale = 1e-2;
  for (std::size_t j = 0; j < idx.size(); ++j) {
    fds[j] = fd_probe(target, idx[j], objective, h);
    scale = std::max(scale, std::abs(fds[j]));
  }
  double err = 0.0;
  for (std::size_t j = 0; j < idx.size(); ++j)
    err = std::max(err, std::abs(an[idx[j]] - fds[j]) / scale);
  return err;
}

nn::Tensor random_tensor(std::vector<int> shape, Rng& rng, float lo, float hi) {
  std::int64_t n = 1;
  for (int d : shape) n *= d;
  std::vector<float> data(static_cast<std::size_t>(n));
  for (auto& v : data) v = lo + (hi - lo) * rng.uniform_f();
  return nn::Tensor::from_data(std::move(shape), std::move(data));
}

Outcome criterion_autodiff() {
  using namespace svbrdf::nn;
  Rng rng(2002);
  std::ostringstream os;
  bool ok = true;
  double worst = 0.0;

  auto record = [&](const char* name, double err, double tol) {
    worst = std::max(worst, err);
    if (err >= tol) {
      ok = false;
      os << name << " err " << err << " >= " << tol << "; ";
    }
  };

  {  // conv2d: gradients for input, weights and bias.
    Tensor x = random_tensor({1, 3, 8, 8}, rng, -1.f, 1.f);
    Tensor w = random_tensor({4, 3, 3, 3}, rng, -0.5f, 0.5f);
    Tensor b = random_tensor({4}, rng, -0.2f, 0.2f);
    Tensor r = random_tensor({1, 4, 4, 4}, rng, -1.f, 1.f);
    x.set_requires_grad(true);
    w.set_requires_grad(true);
    b.set_requires_grad(true);
    auto obj = [&] { return dot(conv2d(x, w, b, 2, 1), r); };
    record("conv2d/x", layer_grad_err(x, obj, 1.0, 60, rng), 1e-4);
    record("conv2d/w", layer_grad_err(w, obj, 1.0, 60, rng), 1e-4);
    record("conv2d/b", layer_grad_err(b, obj, 1.0, 4, rng), 1e-4);
  }
  {  // conv_transpose2d.
    Tensor x = random_tensor({1, 4, 4, 4}, rng, -1.f, 1.f);
    Tensor w = random_tensor({4, 3, 4, 4}, rng, -0.5f, 0.5f);
    Tensor b = random_tensor({3}, rng, -0.2f, 0.2f);
    Tensor r = random_tensor({1, 3, 8, 8}, rng, -1.f, 1.f);
    x.set_requires_grad(true);
    w.set_requires_grad(true);
    b.set_requires_grad(true);
    auto obj = [&] { return dot(conv_transpose2d(x, w, b, 2, 1), r); };
    record("deconv/x", layer_grad_err(x, obj, 1.0, 60, rng), 1e-4);
    record("deconv/w", layer_grad_err(w, obj, 1.0, 60, rng), 1e-4);
    record("deconv/b", layer_grad_err(b, obj, 1.0, 3, rng), 1e-4);
  }
  {  // instance_norm.
    Tensor x = random_tensor({1, 3, 6, 6}, rng, -1.f, 1.f);
    Tensor gamma = random_tensor({3}, rng, 0.5f, 1.5f);
    Tensor beta = random_tensor({3}, rng, -0.3f, 0.3f);
    Tensor r = random_tensor({1, 3, 6, 6}, rng, -1.f, 1.f);
    x.set_requires_grad(true);
    gamma.set_requires_grad(true);
    beta.set_requires_grad(true);
    auto obj = [&] { return dot(instance_norm(x, gamma, beta), r); };
    record("instance_norm/x", layer_grad_err(x, obj, 5e-3, 40, rng), 1e-4);
    record("instance_norm/gamma", layer_grad_err(gamma, obj, 5e-3, 3, rng), 1e-4);
    record("instance_norm/beta", layer_grad_err(beta, obj, 5e-3, 3, rng), 1e-4);
  }
  {  // activations, sampled away from the leaky_relu kink.
    Tensor x = random_tensor({2, 3, 5, 5}, rng, 0.2f, 1.0f);
    for (std::int64_t i = 0; i < x.numel(); ++i)
      if (i % 2 == 0) x.data()[i] = -x.data()[i];
    Tensor r = random_tensor({2, 3, 5, 5}, rng, -1.f, 1.f);
    x.set_requires_grad(true);
    auto lrelu = [&] { return dot(leaky_relu(x, 0.2f), r); };
    auto vtanh = [&] { return dot(tanh_op(x), r); };
    auto vsig = [&] { return dot(sigmoid(x), r); };
    record("leaky_relu", layer_grad_err(x, lrelu, 1e-2, 40, rng), 1e-4);
    record("tanh", layer_grad_err(x, vtanh, 1e-2, 40, rng), 1e-4);
    record("sigmoid", layer_grad_err(x, vsig, 1e-2, 40, rng), 1e-4);
  }
  {  // losses: bce away from saturation, l1 away from its kink.
    Tensor p = random_tensor({1, 1, 4, 4}, rng, 0.1f, 0.9f);
    p.set_requires_grad(true);
    auto obj1 = [&] { return bce(p, 1.0f); };
    auto obj0 = [&] { return bce(p, 0.0f); };
    record("bce/target1", layer_grad_err(p, obj1, 1e-3, 16, rng), 1e-4);
    record("bce/target0", layer_grad_err(p, obj0, 1e-3, 16, rng), 1e-4);

    Tensor a = random_tensor({1, 3, 4, 4}, rng, 0.6f, 1.0f);
    Tensor bt = random_tensor({1, 3, 4, 4}, rng, 0.0f, 0.4f);
    a.set_requires_grad(true);
    auto objl1 = [&] { return l1(a, bt); };
    record("l1", layer_grad_err(a, objl1, 1e-2, 30, rng), 1e-4);
  }

  // Adjointness: for linear maps, <Ax, y> must equal <x, A^T y>, with A^T y
  // obtained from the backward pass.
  auto adjoint_gap = [&](bool transpose) {
    Tensor x = transpose ? random_tensor({1, 4, 5, 5}, rng, -1.f, 1.f)
                         : random_tensor({1, 3, 10, 10}, rng, -1.f, 1.f);
    Tensor w = random_tensor({transpose ? 4 : 4, transpose ? 3 : 3, 4, 4}, rng, -0.5f, 0.5f);
    Tensor zb = Tensor::zeros({transpose ? 3 : 4});
    x.set_requires_grad(true);
    Tensor wx = transpose ? random_tensor({4, 3, 4, 4}, rng, -0.5f, 0.5f) : w;
    Tensor y;
    if (transpose)
      y = conv_transpose2d(x, wx, zb, 2, 1);
    else
      y = conv2d(x, w, zb, 2, 1);
    Tensor probe = random_tensor(y.shape(), rng, -1.f, 1.f);
    Tensor lhs = dot(y, probe);
    lhs.backward();
    // <x, A^T probe> via the accumulated input gradient.
    double rhs = 0.0;
    const auto& gx = x.grad_vector();
    for (std::int64_t i = 0; i < x.numel(); ++i)
      rhs += static_cast<double>(x.data()[i]) * gx[static_cast<std::size_t>(i)];
    const double lv = lhs.value();
    return std::abs(lv - rhs) / std::max({std::abs(lv), std::abs(rhs), 1.0});
  };
  const double adj_conv = adjoint_gap(false);
  const double adj_deconv = adjoint_gap(true);
  if (adj_conv >= 1e-5) {
    ok = false;
    os << "conv adjointness gap " << adj_conv << "; ";
  }
  if (adj_deconv >= 1e-5) {
    ok = false;
    os << "deconv adjointness gap " << adj_deconv << "; ";
  }

  std::ostringstream summary;
  summary << "worst layer FD error " << worst << ", adjointness gaps " << adj_conv << " / "
          << adj_deconv;
  if (!ok) summary << " — " << os.str();
  return {ok, summary.str()};
}

// ---------------------------------------------------------------------------
// Criterion 3: min-composite beats every single view as a diffuse guess.

Outcome criterion_guessed_diffuse() {
  SvbrdfMaps gt = make_synthetic_maps("glossy", 128);
  SynthParams sp;
  sp.noise_sigma = 0.0f;
  auto views = synth_views(gt, offset_grid(3, 0.25), sp);

  std::vector<MaskedImage> masked;
  for (const auto& v : views) masked.push_back(MaskedImage::fully_valid(v));
  LinearImage composite = min_composite(masked, false);

  SvbrdfMaps lambertian = gt;
  std::fill(lambertian.specular.data.begin(), lambertian.specular.data.end(), 0.0f);
  LinearImage diffuse_only = render(lambertian, direction_field(128, 128), sp.intensity);
  for (auto& v : diffuse_only.data) v = std::min(v, 1.0f);  // match the sensor clamp

  const double composite_rmse = rmse(composite, diffuse_only);
  double best_single = 1e9;
  for (const auto& v : views) best_single = std::min(best_single, rmse(v, diffuse_only));

  bool pixelwise = true;
  for (std::size_t i = 0; i < composite.data.size() && pixelwise; ++i)
    for (const auto& v : views)
      if (composite.data[i] > v.data[i]) {
        pixelwise = false;
        break;
      }

  std::ostringstream os;
  os << "composite rmse " << composite_rmse << " vs best single view " << best_single
     << (pixelwise ? ", composite <= all views pixelwise" : ", PIXELWISE BOUND VIOLATED");
  return {composite_rmse < best_single && pixelwise, os.str()};
}

// ---------------------------------------------------------------------------
// Criterion 4: RANSAC alignment under 30% outliers + warp round-trip.

Outcome criterion_alignment() {
  Rng rng(2004);
  const Homography truth{{1.04, 0.03, 6.0, -0.02, 0.97, -4.0, 6e-5, -4e-5, 1.0}};

  std::vector<Correspondence> pairs;
  const int inliers = 70, outliers = 30;
  for (int i = 0; i < inliers; ++i) {
    const double x = 8.0 + 112.0 * rng.uniform();
    const double y = 8.0 + 112.0 * rng.uniform();
    auto p = truth.apply(x, y);
    pairs.push_back({x, y, p[0] + 0.02 * (rng.uniform() - 0.5), p[1] + 0.02 * (rng.uniform() - 0.5)});
  }
  for (int i = 0; i < outliers; ++i) {
    pairs.push_back({8.0 + 112.0 * rng.uniform(), 8.0 + 112.0 * rng.uniform(),
                     128.0 * rng.uniform(), 128.0 * rng.uniform()});
  }

  Rng ransac_rng(77);
  RansacResult res = estimate_homography_ransac(pairs, 2.0, 2000, ransac_rng);
  double corner_err = 0.0;
  for (const auto& c : std::vector<std::array<double, 2>>{{0, 0}, {127, 0}, {0, 127}, {127, 127}}) {
    const auto a = truth.apply(c[0], c[1]);
    const auto b = res.h.apply(c[0], c[1]);
    corner_err = std::max(corner_err, std::hypot(a[0] - b[0], a[1] - b[1]));
  }

  // Round-trip: warp a band-limited texture through truth and back. Two
  // bilinear resamples smear by the local curvature, so the texture has to be
  // heavily smoothed before 2/255 max error is about interpolation fidelity
  // rather than texture content (9 box passes leave ~1.4x margin).
  Rng trng(99);
  LinearImage tex = testsup::random_image(96, 96, 3, trng, 0.1f, 0.9f);
  for (int pass = 0; pass < 9; ++pass) {
    LinearImage blurred = tex;
    for (int y = 1; y < 95; ++y)
      for (int x = 1; x < 95; ++x)
        for (int c = 0; c < 3; ++c) {
          float s = 0.0f;
          for (int dy = -1; dy <= 1; ++dy)
            for (int dx = -1; dx <= 1; ++dx) s += tex.at(x + dx, y + dy, c);
          blurred.at(x, y, c) = s / 9.0f;
        }
    tex = blurred;
  }
  MaskedImage once = warp_to_reference(tex, truth.inverse(), 96, 96);
  MaskedImage back = warp_to_reference(once.image, truth, 96, 96);
  double rt = 0.0;
  int checked = 0;
  for (int y = 4; y < 92; ++y)
    for (int x = 4; x < 92; ++x) {
      if (!back.is_valid(x, y)) continue;
      // The return trip must resample valid forward data: all four bilinear
      // neighbors of the sampling point need a mask.
      const auto q = truth.inverse().apply(static_cast<double>(x), static_cast<double>(y));
      const int qx = static_cast<int>(std::floor(q[0]));
      const int qy = static_cast<int>(std::floor(q[1]));
      if (qx < 0 || qy < 0 || qx + 1 > 95 || qy + 1 > 95) continue;
      if (!once.is_valid(qx, qy) || !once.is_valid(qx + 1, qy) || !once.is_valid(qx, qy + 1) ||
          !once.is_valid(qx + 1, qy + 1))
        continue;
      for (int c = 0; c < 3; ++c)
        rt = std::max(rt, static_cast<double>(std::fabs(back.image.at(x, y, c) - tex.at(x, y, c))));
      ++checked;
    }

  std::ostringstream os;
  os << "corner error " << corner_err << " px (" << res.inliers.size() << " inliers), round-trip "
     << rt << " over " << checked << " px";
  return {corner_err < 0.5 && rt < 2.0 / 255.0 && checked > 4000, os.str()};
}

// ---------------------------------------------------------------------------
// Criterion 5: direct inverse-rendering recovery of a constant material.

Outcome criterion_direct_fit() {
  const int size = 32;
  SvbrdfMaps gt;
  gt.normal = LinearImage(size, size, 3);
  gt.diffuse = LinearImage(size, size, 3);
  gt.specular = LinearImage(size, size, 1);
  gt.roughness = LinearImage(size, size, 1);
  for (int y = 0; y < size; ++y)
    for (int x = 0; x < size; ++x) {
      gt.normal.at(x, y, 0) = 0.0f;
      gt.normal.at(x, y, 1) = 0.0f;
      gt.normal.at(x, y, 2) = 1.0f;
      for (int c = 0; c < 3; ++c) gt.diffuse.at(x, y, c) = 0.4f;
      gt.specular.at(x, y, 0) = 0.3f;
      gt.roughness.at(x, y, 0) = 0.6f;
    }

  // A wide view baseline (±0.5 plane units at height 1, ~±27 deg) is what
  // separates the specular lobe from the diffuse floor; narrow sweeps leave
  // the two nearly degenerate and the fit converges to an off-truth trade.
  SynthParams sp;
  sp.noise_sigma = 0.0f;
  auto offsets = offset_grid(3, 0.5);
  auto photos = synth_views(gt, offsets, sp);
  std::vector<DirectionField> fields;
  for (const auto& o : offsets) {
    FieldParams f;
    f.camera_height = sp.camera_height;
    f.camera_x = o[0];
    f.camera_y = o[1];
    fields.push_back(direction_field(size, size, f));
  }

  FitParams fp;
  fp.iters = 2000;
  FitResult res = direct_fit(photos, fields, fp);
  EvalReport r = report(res.maps, gt, nullptr, "direct_fit");

  std::ostringstream os;
  os << "diffuse " << r.diffuse << " (<=0.02), roughness " << r.roughness << " (<=0.05), normal "
     << r.normal << " (<=0.02), loss " << res.initial_loss << " -> " << res.final_loss;
  return {r.diffuse <= 0.02 && r.roughness <= 0.05 && r.normal <= 0.02 &&
              res.final_loss < res.initial_loss,
          os.str()};
}

// ---------------------------------------------------------------------------
// Criterion 6: GAN smoke training, 5 seeds.

Outcome criterion_gan_smoke() {
  TrainingScene scene(128);
  int improved = 0;
  bool finite = true;
  std::ostringstream os;

  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    TrainConfig cfg;
    cfg.patch_size = 64;
    cfg.seed = seed;
    cfg.log_every = 1;
    cfg.checkpoint_every = 0;
    cfg.check_frozen = true;  // throws on any frozen-subnetwork drift
    Trainer t(cfg, scene.photos, scene.guessed);
    TrainLog log = t.run(200);

    for (const auto& rec : log.records)
      if (!std::isfinite(rec.d_loss) || !std::isfinite(rec.g_adv) || !std::isfinite(rec.g_diffuse))
        finite = false;
    const float first = log.records.front().g_diffuse;
    const float last = log.records.back().g_diffuse;
    if (last < first) ++improved;
    os << "seed " << seed << ": L1 " << first << " -> " << last << (last < first ? " (down)" : " (up)")
       << "; ";
  }

  os << improved << "/5 improved, losses " << (finite ? "finite" : "NON-FINITE");
  return {finite && improved >= 4, os.str()};
}

// ---------------------------------------------------------------------------
// Criterion 7: pretraining on a proxy helps short fine-tuning.

Outcome criterion_two_stage() {
  const fs::path dir = testsup::temp_dir("acceptance_two_stage");
  SvbrdfMaps proxy_gt = make_synthetic_maps("bumpy", 64);
  SynthParams sp;
  sp.noise_sigma = 0.0f;
  LinearImage proxy = synth_views(proxy_gt, offset_grid(1, 0.0), sp)[0];

  TrainConfig pre_cfg;
  pre_cfg.patch_size = 32;
  pre_cfg.seed = 100;
  pre_cfg.iterations_stage1 = 500;
  pre_cfg.log_every = 100;
  pre_cfg.checkpoint_every = 0;
  pre_cfg.checkpoint_path = (dir / "pre.ckpt").string();
  pretrain_stage(pre_cfg, proxy);

  TrainingScene scene(64);
  int wins = 0;
  std::ostringstream os;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    TrainConfig cfg;
    cfg.patch_size = 32;
    cfg.seed = seed;
    cfg.log_every = 1;
    cfg.checkpoint_every = 0;

    Trainer tuned(cfg, scene.photos, scene.guessed);
    tuned.load_weights(pre_cfg.checkpoint_path);
    const float tuned_l1 = tuned.run(100).records.back().g_diffuse;

    Trainer scratch(cfg, scene.photos, scene.guessed);
    const float scratch_l1 = scratch.run(100).records.back().g_diffuse;

    if (tuned_l1 <= scratch_l1) ++wins;
    os << "seed " << seed << ": " << tuned_l1 << " vs " << scratch_l1 << "; ";
  }
  os << wins << "/5 paired seeds favour pretraining";
  return {wins >= 3, os.str()};
}

// ---------------------------------------------------------------------------
// Criterion 8: published-table reproduction is out of scope; format only.

Outcome criterion_table_format() {
  std::printf("    note: the published per-map RMSE tables (e.g. diffuse 0.085 on capture set 4)\n");
  std::printf("    are not reproduction targets: that capture data, its seeds and the full\n");
  std::printf("    hyperparameter set are unavailable, and the original training runs took hours\n");
  std::printf("    on a GPU. This suite verifies the report format and substitutes property-based\n");
  std::printf("    checks for numeric reproduction; the 'slow_full_train' test (disabled by\n");
  std::printf("    default) runs a full CPU training and asserts finiteness and checkpoint\n");
  std::printf("    validity only.\n");

  SvbrdfMaps gt = make_synthetic_maps("glossy", 32);
  EvalReport r = report(gt, gt, &gt.diffuse, "ours");
  const bool header_ok =
      std::string(EvalReport::csv_header()) == "method,diffuse,specular,roughness,normal,guessed_diffuse";
  const std::string row = r.to_csv_row();
  const bool row_ok = row.rfind("ours,0.0000,0.0000,0.0000,0.0000,0.0000", 0) == 0;
  const std::string text = r.to_text();
  const bool text_ok = text.find("RMSE over [0,1]-valued maps") != std::string::npos &&
                       text.find("orientation only") != std::string::npos &&
                       text.find("0.085") != std::string::npos;

  std::ostringstream os;
  os << "csv header " << (header_ok ? "ok" : "BAD") << ", csv row " << (row_ok ? "ok" : "BAD")
     << ", text table " << (text_ok ? "ok" : "BAD");
  return {header_ok && row_ok && text_ok, os.str()};
}

// ---------------------------------------------------------------------------
// Criterion 9: byte-identical reruns through the command line.

int run_quiet(const std::string& cmd) {
  const int status = std::system((cmd + " > /dev/null 2>&1").c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

Outcome criterion_determinism() {
  const char* env = std::getenv("SVBRDF_CLI");
  if (env == nullptr) return {false, "SVBRDF_CLI not set; cannot locate the binary"};
  const std::string cli = env;
  const fs::path dir = testsup::temp_dir("acceptance_determinism");
  std::ostringstream os;
  bool ok = true;

  auto expect = [&](bool cond, const std::string& what) {
    if (!cond) {
      ok = false;
      os << what << " FAILED; ";
    }
  };

  // synth: full output set byte-identical.
  const std::string synth_args = " --preset glossy --size 64 --grid 3 --noise 0.01 --seed 7 --out ";
  expect(run_quiet(cli + " synth" + synth_args + (dir / "sa").string()) == 0, "synth run 1");
  expect(run_quiet(cli + " synth" + synth_args + (dir / "sb").string()) == 0, "synth run 2");
  bool synth_same = true;
  for (int i = 0; i < 9; ++i)
    synth_same = synth_same &&
                 testsup::file_bytes_equal((dir / "sa").string() + "_view" + std::to_string(i) + ".png",
                                           (dir / "sb").string() + "_view" + std::to_string(i) + ".png");
  for (const char* sfx : {"_gt_normal.png", "_gt_diffuse.png", "_gt_specular.png", "_gt_roughness.png"})
    synth_same = synth_same && testsup::file_bytes_equal((dir / "sa").string() + sfx,
                                                         (dir / "sb").string() + sfx);
  expect(synth_same, "synth byte-identity");

  // extract-diffuse through the full feature/RANSAC path on shifted crops of
  // one smooth texture.
  {
    Rng rng(2009);
    LinearImage big = testsup::random_image(200, 200, 3, rng, 0.1f, 0.9f);
    for (int pass = 0; pass < 3; ++pass) {
      LinearImage blurred = big;
      for (int y = 2; y < 198; ++y)
        for (int x = 2; x < 198; ++x)
          for (int c = 0; c < 3; ++c) {
            float s = 0.0f;
            for (int dy = -2; dy <= 2; ++dy)
              for (int dx = -2; dx <= 2; ++dx) s += big.at(x + dx, y + dy, c);
            blurred.at(x, y, c) = s / 25.0f;
          }
      big = blurred;
    }
    const int offsets[3][2] = {{20, 20}, {32, 27}, {25, 34}};
    for (int i = 0; i < 3; ++i) {
      save_image(crop(big, offsets[i][0], offsets[i][1], 160),
                 (dir / ("shift" + std::to_string(i) + ".png")).string());
    }
    const std::string ex_args = " extract-diffuse --seed 5 --inputs " + (dir / "shift*.png").string();
    expect(run_quiet(cli + ex_args + " --out " + (dir / "ea.png").string()) == 0, "extract run 1");
    expect(run_quiet(cli + ex_args + " --out " + (dir / "eb.png").string()) == 0, "extract run 2");
    bool extract_same =
        testsup::file_bytes_equal((dir / "ea.png").string(), (dir / "eb.png").string());
    for (int i = 1; i < 3; ++i)
      extract_same = extract_same &&
                     testsup::file_bytes_equal((dir / ("ea_h" + std::to_string(i) + ".txt")).string(),
                                               (dir / ("eb_h" + std::to_string(i) + ".txt")).string());
    expect(extract_same, "extract-diffuse byte-identity");
  }

  // 50-iteration training run: checkpoints byte-identical. (The loss CSV
  // carries wall-clock seconds by design, so determinism is checked on the
  // checkpoint, the maps and the config instead.)
  {
    const std::string train_args = " train --patch 32 --seed 11 --iterations 50 --inputs " +
                                   (dir / "sa_view*.png").string() + " --guessed " +
                                   (dir / "sa_view0.png").string() + " --checkpoint ";
    expect(run_quiet(cli + train_args + (dir / "ta.ckpt").string()) == 0, "train run 1");
    expect(run_quiet(cli + train_args + (dir / "tb.ckpt").string()) == 0, "train run 2");
    expect(testsup::file_bytes_equal((dir / "ta.ckpt").string(), (dir / "tb.ckpt").string()),
           "train checkpoint byte-identity");
  }

  if (ok) os << "synth, extract-diffuse and 50-iteration train reruns byte-identical";
  return {ok, os.str()};
}

}  // namespace

int main(int argc, char** argv) {
  const int only = argc > 1 ? std::atoi(argv[1]) : 0;

  struct Criterion {
    int id;
    const char* title;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria = {
      {1, "renderer gradients match finite differences", criterion_renderer_gradients},
      {2, "network layers pass gradient and adjointness checks", criterion_autodiff},
      {3, "min-composite is the best diffuse guess on the glossy fixture", criterion_guessed_diffuse},
      {4, "homography alignment under 30% outliers", criterion_alignment},
      {5, "direct inverse rendering recovers a constant material", criterion_direct_fit},
      {6, "GAN smoke training improves the diffuse L1 (5 seeds)", criterion_gan_smoke},
      {7, "pretraining on a proxy beats training from scratch", criterion_two_stage},
      {8, "published tables: format reproduced, values out of scope", criterion_table_format},
      {9, "byte-identical CLI reruns (synth, extract, 50-iter train)", criterion_determinism},
  };

  int failures = 0;
  for (const auto& c : criteria) {
    if (only != 0 && c.id != only) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = c.run();
    } catch (const std::exception& e) {
      out = {false, std::string("exception: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("[%s] criterion %d: %s (%.1fs)\n", out.ok ? "PASS" : "FAIL", c.id, c.title, secs);
    if (!out.detail.empty()) std::printf("       %s\n", out.detail.c_str());
    std::fflush(stdout);
    if (!out.ok) ++failures;
  }

  if (failures == 0)
    std::printf("all acceptance criteria passed\n");
  else
    std::printf("%d acceptance criteria FAILED\n", failures);
  return failures == 0 ? 0 : 1;
}
