#include <doctest.h>

#include <cmath>
#include <vector>

#include "support.hpp"
#include "svbrdf/eval.hpp"
#include "svbrdf/gemm.hpp"
#include "svbrdf/ops.hpp"
#include "svbrdf/parallel.hpp"
#include "svbrdf/render.hpp"
#include "svbrdf/rng.hpp"
#include "svbrdf/warp.hpp"

using namespace svbrdf;

namespace {

// Runs fn with parallelism off, then on, and hands both results to compare.
template <typename Fn>
void serial_vs_parallel(Fn&& fn, std::vector<float>& serial, std::vector<float>& parallel) {
  const bool was = parallel_enabled();
  set_parallel_enabled(false);
  serial = fn();
  set_parallel_enabled(true);
  parallel = fn();
  set_parallel_enabled(was);
}

}  // namespace

TEST_CASE("parallel_for: visits every index exactly once") {
  const std::int64_t n = 10000;  // above the serial grain cutoff
  std::vector<int> hits(n, 0);
  parallel_for(n, [&](std::int64_t i) { hits[i] += 1; });
  for (std::int64_t i = 0; i < n; ++i) {
    REQUIRE(hits[i] == 1);
  }
}

TEST_CASE("parallel_for: serial mode runs on the calling thread in order") {
  set_parallel_enabled(false);
  std::vector<std::int64_t> order;
  parallel_for(500, [&](std::int64_t i) { order.push_back(i); });
  set_parallel_enabled(true);
  REQUIRE(order.size() == 500);
  for (std::int64_t i = 0; i < 500; ++i) CHECK(order[i] == i);
}

TEST_CASE("sgemm: production kernel matches the reference for all transpose modes") {
  Rng rng(404);
  const int m = 33, n = 29, k = 41;
  std::vector<float> a(static_cast<std::size_t>(m) * k), b(static_cast<std::size_t>(k) * n);
  for (auto& v : a) v = rng.uniform_f() * 2.0f - 1.0f;
  for (auto& v : b) v = rng.uniform_f() * 2.0f - 1.0f;

  for (bool ta : {false, true}) {
    for (bool tb : {false, true}) {
      CAPTURE(ta);
      CAPTURE(tb);
      // The stored operands are reinterpreted by the transpose flags, so
      // reuse the same buffers; only the logical shapes change.
      std::vector<float> c_ref(static_cast<std::size_t>(m) * n, 0.5f);
      std::vector<float> c_prod = c_ref;
      reference::sgemm(ta, tb, m, n, k, 1.3f, a.data(), b.data(), 0.7f, c_ref.data());
      sgemm(ta, tb, m, n, k, 1.3f, a.data(), b.data(), 0.7f, c_prod.data());
      float max_abs = 0.0f, max_diff = 0.0f;
      for (std::size_t i = 0; i < c_ref.size(); ++i) {
        max_abs = std::max(max_abs, std::fabs(c_ref[i]));
        max_diff = std::max(max_diff, std::fabs(c_ref[i] - c_prod[i]));
      }
      CHECK(max_diff <= 1e-4f * std::max(1.0f, max_abs));
    }
  }
}

TEST_CASE("render: serial and parallel modes agree bitwise") {
  SvbrdfMaps maps = make_synthetic_maps("bumpy", 96);
  DirectionField field = direction_field(96, 96);
  std::vector<float> serial, parallel;
  serial_vs_parallel([&] { return render(maps, field).data; }, serial, parallel);
  CHECK(serial == parallel);
}

TEST_CASE("render_gradients: serial and parallel modes agree bitwise") {
  SvbrdfMaps maps = make_synthetic_maps("glossy", 80);
  DirectionField field = direction_field(80, 80);
  LinearImage upstream(80, 80, 3);
  Rng rng(77);
  for (auto& v : upstream.data) v = rng.uniform_f() - 0.5f;

  auto run = [&] {
    MapGradients g = render_gradients(maps, field, kDefaultIntensity, upstream);
    std::vector<float> flat = g.normal.data;
    flat.insert(flat.end(), g.diffuse.data.begin(), g.diffuse.data.end());
    flat.insert(flat.end(), g.specular.data.begin(), g.specular.data.end());
    flat.insert(flat.end(), g.roughness.data.begin(), g.roughness.data.end());
    return flat;
  };
  std::vector<float> serial, parallel;
  serial_vs_parallel(run, serial, parallel);
  CHECK(serial == parallel);
}

TEST_CASE("min_composite: serial and parallel modes agree bitwise") {
  Rng rng(31);
  std::vector<MaskedImage> views;
  for (int v = 0; v < 5; ++v) {
    views.push_back(MaskedImage::fully_valid(testsup::random_image(64, 64, 3, rng, 0.05f, 1.0f)));
  }
  auto run = [&] { return min_composite(views, true).data; };
  std::vector<float> serial, parallel;
  serial_vs_parallel(run, serial, parallel);
  CHECK(serial == parallel);
}

TEST_CASE("conv2d: forward and backward agree between serial and parallel modes") {
  using namespace svbrdf::nn;
  Rng rng(55);

  auto run = [&] {
    Rng local(55);
    auto fill = [&](std::size_t n) {
      std::vector<float> v(n);
      for (auto& e : v) e = local.uniform_f() - 0.5f;
      return v;
    };
    Tensor x = Tensor::from_data({2, 3, 16, 16}, fill(2 * 3 * 16 * 16));
    Tensor w = Tensor::from_data({4, 3, 3, 3}, fill(4 * 3 * 3 * 3));
    Tensor b = Tensor::from_data({4}, std::vector<float>(4, 0.1f));
    x.set_requires_grad(true);
    w.set_requires_grad(true);
    b.set_requires_grad(true);
    Tensor y = conv2d(x, w, b, 1, 1);
    Tensor loss = dot(y, y);
    loss.backward();
    std::vector<float> flat(y.data(), y.data() + y.numel());
    const auto& gx = x.grad_vector();
    const auto& gw = w.grad_vector();
    const auto& gb = b.grad_vector();
    flat.insert(flat.end(), gx.begin(), gx.end());
    flat.insert(flat.end(), gw.begin(), gw.end());
    flat.insert(flat.end(), gb.begin(), gb.end());
    return flat;
  };

  std::vector<float> serial, parallel;
  serial_vs_parallel(run, serial, parallel);
  CHECK(serial == parallel);
}

TEST_CASE("thread cap: setting and restoring max_threads") {
  const int before = max_threads();
  set_max_threads(1);
  CHECK(max_threads() == 1);
  SvbrdfMaps maps = make_synthetic_maps("constant", 64);
  DirectionField field = direction_field(64, 64);
  LinearImage one = render(maps, field);
  set_max_threads(0);
  LinearImage dflt = render(maps, field);
  CHECK(one.data == dflt.data);
  set_max_threads(before == 0 ? 0 : before);
}
