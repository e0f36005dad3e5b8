#include "svbrdf/render.hpp"

#include <algorithm>
#include <cmath>

#include "svbrdf/common.hpp"
#include "svbrdf/parallel.hpp"

namespace svbrdf {

namespace {

constexpr double kPiD = 3.14159265358979323846;
constexpr double kCosFloor = 1e-6;  // clamp inside the specular denominator

// Shared microfacet terms at one pixel. Collocation makes h = w, so n.h and
// w.h both collapse to c and Schlick Fresnel is exactly the specular value.
struct Lobe {
  double c;   // n . w (unclamped sign already handled by caller)
  double ct;  // max(c, kCosFloor)
  double a;   // alpha = roughness^2
  double m;   // c^2 (a^2 - 1) + 1
  double d;   // GGX density
  double q;   // sqrt(a^2 + (1 - a^2) c^2)
  double g1;
  double g;   // Smith, separable: g1^2
};

Lobe make_lobe(double c, double rough) {
  Lobe l;
  l.c = c;
  l.ct = std::max(c, kCosFloor);
  l.a = rough * rough;
  const double a2 = l.a * l.a;
  l.m = c * c * (a2 - 1.0) + 1.0;
  l.d = a2 / (kPiD * l.m * l.m);
  l.q = std::sqrt(a2 + (1.0 - a2) * c * c);
  l.g1 = 2.0 * c / (c + l.q);
  l.g = l.g1 * l.g1;
  return l;
}

}  // namespace

void render_pixel(const float normal[3], const float diffuse[3], float specular, float roughness,
                  const float w[3], float intensity, float out[3]) {
  const double c = static_cast<double>(normal[0]) * w[0] + static_cast<double>(normal[1]) * w[1] +
                   static_cast<double>(normal[2]) * w[2];
  if (c <= 0.0) {
    out[0] = out[1] = out[2] = 0.0f;
    return;
  }
  const double rough = std::clamp(static_cast<double>(roughness), 0.01, 1.0);
  const Lobe l = make_lobe(c, rough);
  const double spec = specular * l.d * l.g / (4.0 * l.ct * l.ct);
  for (int k = 0; k < 3; ++k)
    out[k] = static_cast<float>(intensity * c * (diffuse[k] / kPiD + spec));
}

void render_pixel_backward(const float normal[3], const float diffuse[3], float specular,
                           float roughness, const float w[3], float intensity,
                           const float upstream[3], float g_normal[3], float g_diffuse[3],
                           float* g_specular, float* g_roughness) {
  const double c = static_cast<double>(normal[0]) * w[0] + static_cast<double>(normal[1]) * w[1] +
                   static_cast<double>(normal[2]) * w[2];
  if (c <= 0.0) {
    g_normal[0] = g_normal[1] = g_normal[2] = 0.0f;
    g_diffuse[0] = g_diffuse[1] = g_diffuse[2] = 0.0f;
    *g_specular = 0.0f;
    *g_roughness = 0.0f;
    return;
  }
  const double rough = std::clamp(static_cast<double>(roughness), 0.01, 1.0);
  const Lobe l = make_lobe(c, rough);
  const double inten = intensity;
  const double u_sum = static_cast<double>(upstream[0]) + upstream[1] + upstream[2];

  for (int k = 0; k < 3; ++k) g_diffuse[k] = static_cast<float>(upstream[k] * inten * c / kPiD);

  // f(c) = c * D * G / (4 ct^2), the specular factor multiplying intensity*s.
  const double f = c * l.d * l.g / (4.0 * l.ct * l.ct);
  *g_specular = static_cast<float>(u_sum * inten * f);

  const double a2 = l.a * l.a;

  // d/d alpha at fixed c
  const double m_a = 2.0 * l.a * c * c;
  const double d_a = 2.0 * l.a / (kPiD * l.m * l.m) - 2.0 * a2 * m_a / (kPiD * l.m * l.m * l.m);
  const double q_a = l.a * (1.0 - c * c) / l.q;
  const double g1_a = -2.0 * c * q_a / ((c + l.q) * (c + l.q));
  const double g_a = 2.0 * l.g1 * g1_a;
  const double f_a = c * (d_a * l.g + l.d * g_a) / (4.0 * l.ct * l.ct);
  *g_roughness = static_cast<float>(u_sum * inten * specular * f_a * 2.0 * rough);

  // d/dc, including the ct clamp (frozen denominator below the floor)
  const double m_c = 2.0 * c * (a2 - 1.0);
  const double d_c = -2.0 * a2 * m_c / (kPiD * l.m * l.m * l.m);
  const double q_c = c * (1.0 - a2) / l.q;
  const double g1_c = 2.0 * (l.q - c * q_c) / ((c + l.q) * (c + l.q));
  const double g_c = 2.0 * l.g1 * g1_c;
  double f_c;
  if (c > kCosFloor) {
    // f = D G / (4c)
    f_c = (d_c * l.g + l.d * g_c) / (4.0 * c) - l.d * l.g / (4.0 * c * c);
  } else {
    f_c = (l.d * l.g + c * (d_c * l.g + l.d * g_c)) / (4.0 * kCosFloor * kCosFloor);
  }
  double dl_dc = u_sum * inten * specular * f_c;
  for (int k = 0; k < 3; ++k) dl_dc += upstream[k] * inten * diffuse[k] / kPiD;

  // dc/dn = w, then project out the radial component so the gradient matches
  // perturbations of a pre-normalization normal.
  double gn[3];
  for (int k = 0; k < 3; ++k) gn[k] = dl_dc * w[k];
  const double radial = gn[0] * normal[0] + gn[1] * normal[1] + gn[2] * normal[2];
  for (int k = 0; k < 3; ++k) g_normal[k] = static_cast<float>(gn[k] - radial * normal[k]);
}

LinearImage render(const SvbrdfMaps& maps, const DirectionField& field, float intensity) {
  SVBRDF_REQUIRE(maps.width() == field.width && maps.height() == field.height,
                 "render: maps/field resolution mismatch");
  SVBRDF_REQUIRE(intensity > 0.0f, "render: intensity must be positive");
  LinearImage out(maps.width(), maps.height(), 3);
  const std::int64_t n = static_cast<std::int64_t>(maps.normal.pixel_count());
  parallel_for(n, [&](std::int64_t p) {
    render_pixel(&maps.normal.data[p * 3], &maps.diffuse.data[p * 3], maps.specular.data[p],
                 maps.roughness.data[p], &field.dirs[p * 3], intensity, &out.data[p * 3]);
  });
  return out;
}

MapGradients render_gradients(const SvbrdfMaps& maps, const DirectionField& field, float intensity,
                              const LinearImage& upstream) {
  SVBRDF_REQUIRE(maps.width() == field.width && maps.height() == field.height,
                 "render_gradients: maps/field resolution mismatch");
  SVBRDF_REQUIRE(upstream.width == maps.width() && upstream.height == maps.height() &&
                     upstream.channels == 3,
                 "render_gradients: upstream must be H x W x 3");
  MapGradients g;
  g.normal = LinearImage(maps.width(), maps.height(), 3);
  g.diffuse = LinearImage(maps.width(), maps.height(), 3);
  g.specular = LinearImage(maps.width(), maps.height(), 1);
  g.roughness = LinearImage(maps.width(), maps.height(), 1);
  const std::int64_t n = static_cast<std::int64_t>(maps.normal.pixel_count());
  parallel_for(n, [&](std::int64_t p) {
    render_pixel_backward(&maps.normal.data[p * 3], &maps.diffuse.data[p * 3],
                          maps.specular.data[p], maps.roughness.data[p], &field.dirs[p * 3],
                          intensity, &upstream.data[p * 3], &g.normal.data[p * 3],
                          &g.diffuse.data[p * 3], &g.specular.data[p], &g.roughness.data[p]);
  });
  return g;
}

}  // namespace svbrdf
