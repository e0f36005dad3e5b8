#pragma once

#include <array>
#include <string>
#include <vector>

#include "svbrdf/rng.hpp"

namespace svbrdf {

// 3x3 projective transform, row-major, normalized so h[8] == 1 after
// estimation. Maps source coordinates into the reference frame.
struct Homography {
  std::array<double, 9> h{1, 0, 0, 0, 1, 0, 0, 0, 1};

  static Homography identity() { return {}; }

  std::array<double, 2> apply(double x, double y) const;
  Homography inverse() const;  // throws NumericError when singular
  double det() const;

  // Plain-text 3x3 matrix, one row per line.
  std::string to_text() const;
  static Homography from_text(const std::string& text);
};

// Point correspondence: (x1, y1) in the source image, (x2, y2) in the
// reference frame.
struct Correspondence {
  double x1 = 0, y1 = 0, x2 = 0, y2 = 0;
};

// Normalized direct linear transform on >= 4 correspondences.
Homography fit_homography_dlt(const std::vector<Correspondence>& pairs);

struct RansacResult {
  Homography h;
  std::vector<int> inliers;  // indices into the correspondence list
};

// RANSAC over minimal 4-point samples scored by symmetric reprojection
// error, refit on the final inlier set. Deterministic for a given rng.
RansacResult estimate_homography_ransac(const std::vector<Correspondence>& pairs,
                                        double inlier_px, int iters, Rng& rng);

}  // namespace svbrdf
