#pragma once

// Shared test helpers. The oracles here are deliberately independent
// re-derivations in double precision: tests compare the production float
// kernels against these, never against themselves.

#include <array>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <string>
#include <vector>

#include "svbrdf/image.hpp"
#include "svbrdf/rng.hpp"

namespace testsup {

// Fresh scratch directory under the current working directory (the build
// tree when run through ctest). Wiped on every call so reruns are clean.
inline std::string temp_dir(const std::string& name) {
  const std::filesystem::path p = std::filesystem::path("test_tmp") / name;
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p.string();
}

inline bool file_bytes_equal(const std::string& a, const std::string& b) {
  std::ifstream fa(a, std::ios::binary), fb(b, std::ios::binary);
  if (!fa.good() || !fb.good()) return false;
  const std::string da((std::istreambuf_iterator<char>(fa)), std::istreambuf_iterator<char>());
  const std::string db((std::istreambuf_iterator<char>(fb)), std::istreambuf_iterator<char>());
  return da == db;
}

// ---------------------------------------------------------------------------
// sRGB oracle (double precision, straight from the piecewise definition).

inline double oracle_srgb_to_linear(double e) {
  return e <= 0.04045 ? e / 12.92 : std::pow((e + 0.055) / 1.055, 2.4);
}

inline double oracle_linear_to_srgb(double l) {
  return l <= 0.0031308 ? l * 12.92 : 1.055 * std::pow(l, 1.0 / 2.4) - 0.055;
}

// ---------------------------------------------------------------------------
// Collocated Cook-Torrance oracle in double precision.

struct OraclePixel {
  std::array<double, 3> normal{0, 0, 1};
  std::array<double, 3> diffuse{0, 0, 0};
  double specular = 0;
  double roughness = 0.5;
};

inline std::array<double, 3> oracle_render(const OraclePixel& px, const std::array<double, 3>& w,
                                           double intensity) {
  const auto& n = px.normal;
  const double c = n[0] * w[0] + n[1] * w[1] + n[2] * w[2];
  if (c <= 0.0) return {0, 0, 0};
  const double alpha = px.roughness * px.roughness;
  const double a2 = alpha * alpha;
  const double m = c * c * (a2 - 1.0) + 1.0;
  const double d_term = a2 / (3.14159265358979323846 * m * m);
  const double q = std::sqrt(a2 + (1.0 - a2) * c * c);
  const double g1 = 2.0 * c / (c + q);
  const double g_term = g1 * g1;
  const double c_tilde = std::max(c, 1e-6);
  const double spec = px.specular * d_term * g_term / (4.0 * c_tilde * c_tilde);
  std::array<double, 3> out{};
  for (int k = 0; k < 3; ++k)
    out[k] = intensity * c * (px.diffuse[k] / 3.14159265358979323846 + spec);
  return out;
}

// Sum over RGB of the oracle radiance; the scalar objective used by the
// finite-difference gradient checks (equivalent to an all-ones upstream).
inline double oracle_render_sum(const OraclePixel& px, const std::array<double, 3>& w,
                                double intensity) {
  const auto rgb = oracle_render(px, w, intensity);
  return rgb[0] + rgb[1] + rgb[2];
}

// ---------------------------------------------------------------------------
// Finite differences and error metrics.

inline double central_diff(const std::function<double(double)>& f, double x, double h) {
  return (f(x + h) - f(x - h)) / (2.0 * h);
}

// Relative error with a floor so near-zero gradients do not blow it up.
inline double rel_err(double a, double b, double floor = 1e-2) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor});
}

inline std::array<double, 3> normalized(std::array<double, 3> v) {
  const double len = std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
  return {v[0] / len, v[1] / len, v[2] / len};
}

// Random unit direction with z >= min_z.
inline std::array<double, 3> random_direction(svbrdf::Rng& rng, double min_z) {
  while (true) {
    const double x = rng.uniform() * 2.0 - 1.0;
    const double y = rng.uniform() * 2.0 - 1.0;
    const double z = rng.uniform();
    const double len = std::sqrt(x * x + y * y + z * z);
    if (len < 1e-3) continue;
    if (z / len >= min_z) return {x / len, y / len, z / len};
  }
}

inline svbrdf::LinearImage random_image(int w, int h, int c, svbrdf::Rng& rng, float lo = 0.0f,
                                        float hi = 1.0f) {
  svbrdf::LinearImage img(w, h, c);
  for (auto& v : img.data) v = lo + (hi - lo) * rng.uniform_f();
  return img;
}

}  // namespace testsup
