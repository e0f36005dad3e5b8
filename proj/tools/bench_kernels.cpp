// Compares the serial reference kernels against the production (threaded /
// BLAS-backed) ones: same inputs, wall-clock side by side, and a max-abs-diff
// column as a cheap agreement check.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "svbrdf/eval.hpp"
#include "svbrdf/gemm.hpp"
#include "svbrdf/image.hpp"
#include "svbrdf/maps.hpp"
#include "svbrdf/parallel.hpp"
#include "svbrdf/render.hpp"
#include "svbrdf/rng.hpp"
#include "svbrdf/warp.hpp"

namespace {

using namespace svbrdf;
using clock_type = std::chrono::steady_clock;

double time_ms(const std::function<void()>& fn, int reps) {
  fn();  // warm-up
  const auto t0 = clock_type::now();
  for (int i = 0; i < reps; ++i) fn();
  const auto t1 = clock_type::now();
  return std::chrono::duration<double, std::milli>(t1 - t0).count() / reps;
}

double max_abs_diff(const std::vector<float>& a, const std::vector<float>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(double(a[i]) - double(b[i])));
  return m;
}

void row(const std::string& name, double serial_ms, double parallel_ms, double diff) {
  std::printf("%-28s %10.2f ms %10.2f ms %8.2fx   %.3g\n", name.c_str(), serial_ms, parallel_ms,
              serial_ms / parallel_ms, diff);
}

void bench_gemm() {
  const int n = 512;
  Rng rng(7);
  std::vector<float> a(n * n), b(n * n), c_ref(n * n), c_prod(n * n);
  for (auto& v : a) v = rng.uniform_f() * 2.0f - 1.0f;
  for (auto& v : b) v = rng.uniform_f() * 2.0f - 1.0f;

  const double t_ref = time_ms(
      [&] { reference::sgemm(false, false, n, n, n, 1.0f, a.data(), b.data(), 0.0f, c_ref.data()); },
      2);
  const double t_prod = time_ms(
      [&] { sgemm(false, false, n, n, n, 1.0f, a.data(), b.data(), 0.0f, c_prod.data()); }, 5);
  row("sgemm 512^3 (ref vs prod)", t_ref, t_prod, max_abs_diff(c_ref, c_prod));
}

void bench_render() {
  const int size = 512;
  const SvbrdfMaps maps = make_synthetic_maps("bumpy", size);
  const DirectionField field = direction_field(size, size, {});

  LinearImage out_serial, out_parallel;
  set_parallel_enabled(false);
  const double t_serial = time_ms([&] { out_serial = render(maps, field, kDefaultIntensity); }, 3);
  set_parallel_enabled(true);
  const double t_parallel =
      time_ms([&] { out_parallel = render(maps, field, kDefaultIntensity); }, 3);
  row("render 512^2", t_serial, t_parallel, max_abs_diff(out_serial.data, out_parallel.data));
}

void bench_render_gradients() {
  const int size = 256;
  const SvbrdfMaps maps = make_synthetic_maps("glossy", size);
  const DirectionField field = direction_field(size, size, {});
  const LinearImage upstream(size, size, 3, 1.0f);

  MapGradients g_serial, g_parallel;
  set_parallel_enabled(false);
  const double t_serial =
      time_ms([&] { g_serial = render_gradients(maps, field, kDefaultIntensity, upstream); }, 3);
  set_parallel_enabled(true);
  const double t_parallel =
      time_ms([&] { g_parallel = render_gradients(maps, field, kDefaultIntensity, upstream); }, 3);
  row("render gradients 256^2", t_serial, t_parallel,
      max_abs_diff(g_serial.normal.data, g_parallel.normal.data));
}

void bench_composite() {
  const int size = 512;
  Rng rng(11);
  std::vector<MaskedImage> stack;
  for (int i = 0; i < 9; ++i) {
    MaskedImage m;
    m.image = LinearImage(size, size, 3);
    for (auto& v : m.image.data) v = rng.uniform_f();
    m.valid.assign(static_cast<std::size_t>(size) * size, 1);
    stack.push_back(std::move(m));
  }

  LinearImage out_serial, out_parallel;
  set_parallel_enabled(false);
  const double t_serial = time_ms([&] { out_serial = min_composite(stack, true); }, 3);
  set_parallel_enabled(true);
  const double t_parallel = time_ms([&] { out_parallel = min_composite(stack, true); }, 3);
  row("min-composite 9x512^2", t_serial, t_parallel,
      max_abs_diff(out_serial.data, out_parallel.data));
}

}  // namespace

int main() {
  std::printf("%-28s %13s %13s %9s   %s\n", "kernel", "serial", "parallel", "speedup",
              "max|diff|");
  bench_gemm();
  bench_render();
  bench_render_gradients();
  bench_composite();
  return 0;
}
