#include "svbrdf/maps.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>

#include "svbrdf/common.hpp"
#include "svbrdf/parallel.hpp"

namespace svbrdf {

void SvbrdfMaps::validate() const {
  diffuse.validate();
  specular.validate();
  roughness.validate();
  // The generic image check rejects negatives, but tangential normal
  // components are signed; check the normal map separately.
  SVBRDF_REQUIRE(normal.width > 0 && normal.height > 0 &&
                     normal.data.size() == static_cast<std::size_t>(normal.width) *
                                               normal.height * normal.channels,
                 "maps: invalid normal dimensions");
  for (float v : normal.data)
    SVBRDF_REQUIRE(std::isfinite(v), "maps: normal contains non-finite values");
  SVBRDF_REQUIRE(normal.channels == 3 && diffuse.channels == 3, "maps: normal/diffuse need 3 channels");
  SVBRDF_REQUIRE(specular.channels == 1 && roughness.channels == 1,
                 "maps: specular/roughness must be single-channel");
  SVBRDF_REQUIRE(normal.width == diffuse.width && normal.width == specular.width &&
                     normal.width == roughness.width && normal.height == diffuse.height &&
                     normal.height == specular.height && normal.height == roughness.height,
                 "maps: resolutions disagree");
  for (std::size_t p = 0; p < normal.pixel_count(); ++p) {
    const float nx = normal.data[p * 3], ny = normal.data[p * 3 + 1], nz = normal.data[p * 3 + 2];
    const float len = std::sqrt(nx * nx + ny * ny + nz * nz);
    SVBRDF_REQUIRE(std::fabs(len - 1.0f) <= 1e-5f, "maps: normal not unit length");
    SVBRDF_REQUIRE(nz > 0.0f, "maps: normal z must be positive");
    for (int k = 0; k < 3; ++k) {
      const float d = diffuse.data[p * 3 + k];
      SVBRDF_REQUIRE(d >= 0.0f && d <= 1.0f, "maps: diffuse out of [0,1]");
    }
    const float s = specular.data[p];
    SVBRDF_REQUIRE(s >= 0.0f && s <= 1.0f, "maps: specular out of [0,1]");
    const float r = roughness.data[p];
    SVBRDF_REQUIRE(r >= 0.01f && r <= 1.0f, "maps: roughness out of [0.01,1]");
  }
}

SvbrdfMaps SvbrdfMaps::crop(int x, int y, int size) const {
  SvbrdfMaps out;
  out.normal = svbrdf::crop(normal, x, y, size);
  out.diffuse = svbrdf::crop(diffuse, x, y, size);
  out.specular = svbrdf::crop(specular, x, y, size);
  out.roughness = svbrdf::crop(roughness, x, y, size);
  return out;
}

SvbrdfMaps SvbrdfMaps::constant(int width, int height, const float normal3[3],
                                const float diffuse3[3], float specular_v, float roughness_v) {
  SvbrdfMaps out;
  out.normal = LinearImage(width, height, 3);
  out.diffuse = LinearImage(width, height, 3);
  out.specular = LinearImage(width, height, 1, specular_v);
  out.roughness = LinearImage(width, height, 1, roughness_v);
  const float len = std::sqrt(normal3[0] * normal3[0] + normal3[1] * normal3[1] +
                              normal3[2] * normal3[2]);
  for (std::size_t p = 0; p < out.normal.pixel_count(); ++p) {
    for (int k = 0; k < 3; ++k) {
      out.normal.data[p * 3 + k] = normal3[k] / len;
      out.diffuse.data[p * 3 + k] = diffuse3[k];
    }
  }
  return out;
}

void save_maps(const SvbrdfMaps& maps, const std::string& stem) {
  maps.validate();
  LinearImage n = maps.normal;
  for (float& v : n.data) v = (v + 1.0f) * 0.5f;
  save_image(n, stem + "_normal.png");
  save_image(maps.diffuse, stem + "_diffuse.png");
  save_image(maps.roughness, stem + "_roughness.png");
  save_image(maps.specular, stem + "_specular.png");
}

namespace {

LinearImage load_gray(const std::string& path) {
  LinearImage img = load_image(path);
  if (img.channels == 1) return img;
  LinearImage out(img.width, img.height, 1);
  for (std::size_t p = 0; p < img.pixel_count(); ++p)
    out.data[p] = (img.data[p * 3] + img.data[p * 3 + 1] + img.data[p * 3 + 2]) / 3.0f;
  return out;
}

}  // namespace

SvbrdfMaps load_maps(const std::string& stem) {
  SvbrdfMaps maps;
  maps.normal = load_image(stem + "_normal.png");
  maps.diffuse = load_image(stem + "_diffuse.png");
  maps.roughness = load_gray(stem + "_roughness.png");
  maps.specular = load_gray(stem + "_specular.png");
  SVBRDF_REQUIRE(maps.normal.channels == 3, "load_maps: normal map must be RGB");
  SVBRDF_REQUIRE(maps.diffuse.channels == 3, "load_maps: diffuse map must be RGB");
  SVBRDF_REQUIRE(maps.normal.same_shape(maps.diffuse) &&
                     maps.normal.width == maps.roughness.width &&
                     maps.normal.height == maps.roughness.height &&
                     maps.normal.width == maps.specular.width &&
                     maps.normal.height == maps.specular.height,
                 "load_maps: map resolutions disagree");
  for (std::size_t p = 0; p < maps.normal.pixel_count(); ++p) {
    float nx = maps.normal.data[p * 3] * 2.0f - 1.0f;
    float ny = maps.normal.data[p * 3 + 1] * 2.0f - 1.0f;
    float nz = std::max(maps.normal.data[p * 3 + 2] * 2.0f - 1.0f, 0.01f);
    const float len = std::sqrt(nx * nx + ny * ny + nz * nz);
    maps.normal.data[p * 3] = nx / len;
    maps.normal.data[p * 3 + 1] = ny / len;
    maps.normal.data[p * 3 + 2] = nz / len;
    maps.roughness.data[p] = std::clamp(maps.roughness.data[p], 0.01f, 1.0f);
  }
  maps.validate();
  return maps;
}

DirectionField direction_field(int width, int height, const FieldParams& params) {
  SVBRDF_REQUIRE(width > 0 && height > 0, "direction_field: empty field");
  SVBRDF_REQUIRE(params.camera_height > 0.0, "direction_field: camera_height must be positive");
  DirectionField field;
  field.width = width;
  field.height = height;
  field.dirs.resize(static_cast<std::size_t>(width) * height * 3);

  if (params.distant) {
    for (std::size_t p = 0; p < field.dirs.size() / 3; ++p) {
      field.dirs[p * 3] = 0.0f;
      field.dirs[p * 3 + 1] = 0.0f;
      field.dirs[p * 3 + 2] = 1.0f;
    }
    return field;
  }

  const int fw = params.full_width > 0 ? params.full_width : width;
  const int fh = params.full_height > 0 ? params.full_height : height;
  SVBRDF_REQUIRE(params.crop_x >= 0 && params.crop_y >= 0 && params.crop_x + width <= fw &&
                     params.crop_y + height <= fh,
                 "direction_field: crop exceeds the full frame");
  // The longer side of the full frame spans one plane unit; pixel centers use
  // the endpoint convention so corners of a square frame land at +-0.5.
  const double span = static_cast<double>(std::max(fw, fh)) - 1.0;
  const double denom = span > 0.0 ? span : 1.0;

  parallel_for(height, [&](std::int64_t y) {
    const double v = (static_cast<double>(y + params.crop_y) - (fh - 1) * 0.5) / denom;
    for (int x = 0; x < width; ++x) {
      const double u = (static_cast<double>(x + params.crop_x) - (fw - 1) * 0.5) / denom;
      const double dx = params.camera_x - u;
      const double dy = params.camera_y - v;
      const double dz = params.camera_height;
      const double len = std::sqrt(dx * dx + dy * dy + dz * dz);
      float* d = &field.dirs[(static_cast<std::size_t>(y) * width + x) * 3];
      d[0] = static_cast<float>(dx / len);
      d[1] = static_cast<float>(dy / len);
      d[2] = static_cast<float>(dz / len);
    }
  });
  return field;
}

void decode_pixel(const float raw[8], float normal[3], float diffuse[3], float* specular,
                  float* roughness) {
  const float vx = raw[0];
  const float vy = raw[1];
  const float vz = (raw[2] + 1.0f) * 0.5f + 0.01f;  // keeps z strictly positive
  const float len = std::sqrt(vx * vx + vy * vy + vz * vz);
  normal[0] = vx / len;
  normal[1] = vy / len;
  normal[2] = vz / len;
  *roughness = std::clamp((raw[3] + 1.0f) * 0.5f, 0.01f, 1.0f);
  diffuse[0] = (raw[4] + 1.0f) * 0.5f;
  diffuse[1] = (raw[5] + 1.0f) * 0.5f;
  diffuse[2] = (raw[6] + 1.0f) * 0.5f;
  *specular = (raw[7] + 1.0f) * 0.5f;
}

void decode_pixel_backward(const float raw[8], const float g_normal[3], const float g_diffuse[3],
                           float g_specular, float g_roughness, float g_raw[8]) {
  const float vx = raw[0];
  const float vy = raw[1];
  const float vz = (raw[2] + 1.0f) * 0.5f + 0.01f;
  const float len = std::sqrt(vx * vx + vy * vy + vz * vz);
  const float nx = vx / len, ny = vy / len, nz = vz / len;
  // d normalize(v)/dv = (I - n n^T) / |v|
  const float dot = nx * g_normal[0] + ny * g_normal[1] + nz * g_normal[2];
  const float gx = (g_normal[0] - nx * dot) / len;
  const float gy = (g_normal[1] - ny * dot) / len;
  const float gz = (g_normal[2] - nz * dot) / len;
  g_raw[0] = gx;
  g_raw[1] = gy;
  g_raw[2] = gz * 0.5f;
  const float r01 = (raw[3] + 1.0f) * 0.5f;  // clamp passes gradient only inside its range
  g_raw[3] = (r01 > 0.01f && r01 < 1.0f) ? g_roughness * 0.5f : 0.0f;
  g_raw[4] = g_diffuse[0] * 0.5f;
  g_raw[5] = g_diffuse[1] * 0.5f;
  g_raw[6] = g_diffuse[2] * 0.5f;
  g_raw[7] = g_specular * 0.5f;
}

SvbrdfMaps decode_maps(const std::vector<float>& raw, int width, int height) {
  SVBRDF_REQUIRE(raw.size() == static_cast<std::size_t>(width) * height * 8,
                 "decode_maps: raw size != W*H*8");
  SvbrdfMaps maps;
  maps.normal = LinearImage(width, height, 3);
  maps.diffuse = LinearImage(width, height, 3);
  maps.specular = LinearImage(width, height, 1);
  maps.roughness = LinearImage(width, height, 1);
  const std::int64_t n = static_cast<std::int64_t>(width) * height;
  parallel_for(n, [&](std::int64_t p) {
    decode_pixel(&raw[static_cast<std::size_t>(p) * 8], &maps.normal.data[p * 3],
                 &maps.diffuse.data[p * 3], &maps.specular.data[p], &maps.roughness.data[p]);
  });
  return maps;
}

}  // namespace svbrdf
