#include "svbrdf/homography.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <sstream>

#include "svbrdf/common.hpp"

namespace svbrdf {

std::array<double, 2> Homography::apply(double x, double y) const {
  const double w = h[6] * x + h[7] * y + h[8];
  SVBRDF_NUMERIC_REQUIRE(std::fabs(w) > 1e-15, "homography maps point to infinity");
  return {(h[0] * x + h[1] * y + h[2]) / w, (h[3] * x + h[4] * y + h[5]) / w};
}

double Homography::det() const {
  return h[0] * (h[4] * h[8] - h[5] * h[7]) - h[1] * (h[3] * h[8] - h[5] * h[6]) +
         h[2] * (h[3] * h[7] - h[4] * h[6]);
}

Homography Homography::inverse() const {
  const double d = det();
  SVBRDF_NUMERIC_REQUIRE(std::fabs(d) > 1e-12, "homography is singular");
  const auto& m = h;
  Homography out;
  out.h = {(m[4] * m[8] - m[5] * m[7]) / d, (m[2] * m[7] - m[1] * m[8]) / d,
           (m[1] * m[5] - m[2] * m[4]) / d, (m[5] * m[6] - m[3] * m[8]) / d,
           (m[0] * m[8] - m[2] * m[6]) / d, (m[2] * m[3] - m[0] * m[5]) / d,
           (m[3] * m[7] - m[4] * m[6]) / d, (m[1] * m[6] - m[0] * m[7]) / d,
           (m[0] * m[4] - m[1] * m[3]) / d};
  return out;
}

std::string Homography::to_text() const {
  std::ostringstream os;
  os.precision(17);
  for (int r = 0; r < 3; ++r) {
    os << h[3 * r] << " " << h[3 * r + 1] << " " << h[3 * r + 2] << "\n";
  }
  return os.str();
}

Homography Homography::from_text(const std::string& text) {
  std::istringstream is(text);
  Homography out;
  for (auto& v : out.h)
    SVBRDF_REQUIRE(static_cast<bool>(is >> v), "malformed homography text (need 9 numbers)");
  return out;
}

namespace {

struct Normalization {
  double cx = 0, cy = 0, scale = 1;
  std::array<double, 2> apply(double x, double y) const { return {(x - cx) * scale, (y - cy) * scale}; }
};

Normalization normalize_points(const std::vector<Correspondence>& pairs, bool first) {
  Normalization n;
  for (const auto& p : pairs) {
    n.cx += first ? p.x1 : p.x2;
    n.cy += first ? p.y1 : p.y2;
  }
  n.cx /= pairs.size();
  n.cy /= pairs.size();
  double mean_dist = 0;
  for (const auto& p : pairs) {
    const double dx = (first ? p.x1 : p.x2) - n.cx;
    const double dy = (first ? p.y1 : p.y2) - n.cy;
    mean_dist += std::sqrt(dx * dx + dy * dy);
  }
  mean_dist /= pairs.size();
  n.scale = mean_dist > 1e-12 ? std::sqrt(2.0) / mean_dist : 1.0;
  return n;
}

bool collinear(double ax, double ay, double bx, double by, double cx, double cy) {
  const double cross = (bx - ax) * (cy - ay) - (by - ay) * (cx - ax);
  const double scale = std::max({std::fabs(bx - ax), std::fabs(by - ay), std::fabs(cx - ax),
                                 std::fabs(cy - ay), 1.0});
  return std::fabs(cross) < 1e-6 * scale * scale;
}

bool degenerate_sample(const std::vector<Correspondence>& pts) {
  for (int skip = 0; skip < 4; ++skip) {
    std::array<const Correspondence*, 3> t;
    int n = 0;
    for (int i = 0; i < 4; ++i)
      if (i != skip) t[n++] = &pts[i];
    if (collinear(t[0]->x1, t[0]->y1, t[1]->x1, t[1]->y1, t[2]->x1, t[2]->y1)) return true;
    if (collinear(t[0]->x2, t[0]->y2, t[1]->x2, t[1]->y2, t[2]->x2, t[2]->y2)) return true;
  }
  return false;
}

double symmetric_error(const Homography& h, const Homography& h_inv, const Correspondence& p) {
  const auto fwd = h.apply(p.x1, p.y1);
  const auto bwd = h_inv.apply(p.x2, p.y2);
  const double e_fwd = std::hypot(fwd[0] - p.x2, fwd[1] - p.y2);
  const double e_bwd = std::hypot(bwd[0] - p.x1, bwd[1] - p.y1);
  return std::max(e_fwd, e_bwd);
}

}  // namespace

Homography fit_homography_dlt(const std::vector<Correspondence>& pairs) {
  SVBRDF_REQUIRE(pairs.size() >= 4, "homography fit needs at least 4 correspondences");
  const Normalization n1 = normalize_points(pairs, true);
  const Normalization n2 = normalize_points(pairs, false);

  Eigen::MatrixXd a(2 * pairs.size(), 9);
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const auto [x, y] = n1.apply(pairs[i].x1, pairs[i].y1);
    const auto [u, v] = n2.apply(pairs[i].x2, pairs[i].y2);
    a.row(2 * i) << -x, -y, -1, 0, 0, 0, u * x, u * y, u;
    a.row(2 * i + 1) << 0, 0, 0, -x, -y, -1, v * x, v * y, v;
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeFullV);
  // The design matrix must have rank exactly 8; a second vanishing singular
  // value means the geometry (e.g. collinear points) leaves H undetermined.
  const Eigen::VectorXd sv = svd.singularValues();
  SVBRDF_NUMERIC_REQUIRE(sv(7) > 1e-8 * sv(0),
                         "degenerate correspondence geometry: homography not determined");
  const Eigen::VectorXd hv = svd.matrixV().col(8);

  Eigen::Matrix3d hn;
  hn << hv(0), hv(1), hv(2), hv(3), hv(4), hv(5), hv(6), hv(7), hv(8);
  // Undo the normalization: H = T2^-1 * Hn * T1
  Eigen::Matrix3d t1, t2;
  t1 << n1.scale, 0, -n1.scale * n1.cx, 0, n1.scale, -n1.scale * n1.cy, 0, 0, 1;
  t2 << n2.scale, 0, -n2.scale * n2.cx, 0, n2.scale, -n2.scale * n2.cy, 0, 0, 1;
  Eigen::Matrix3d hm = t2.inverse() * hn * t1;

  SVBRDF_NUMERIC_REQUIRE(std::fabs(hm(2, 2)) > 1e-12, "degenerate homography (h33 ~ 0)");
  hm /= hm(2, 2);
  Homography out;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) out.h[3 * r + c] = hm(r, c);
  SVBRDF_NUMERIC_REQUIRE(std::fabs(out.det()) > 1e-12, "estimated homography is singular");
  return out;
}

RansacResult estimate_homography_ransac(const std::vector<Correspondence>& pairs,
                                        double inlier_px, int iters, Rng& rng) {
  SVBRDF_REQUIRE(pairs.size() >= 4, "RANSAC needs at least 4 correspondences");
  const int n = static_cast<int>(pairs.size());

  std::vector<int> best_inliers;
  for (int it = 0; it < iters; ++it) {
    std::array<int, 4> idx{};
    for (int j = 0; j < 4; ++j) {
      bool fresh = true;
      do {
        idx[j] = static_cast<int>(rng.uniform_int(n));
        fresh = true;
        for (int t = 0; t < j; ++t)
          if (idx[t] == idx[j]) fresh = false;
      } while (!fresh);
    }
    std::vector<Correspondence> sample = {pairs[idx[0]], pairs[idx[1]], pairs[idx[2]],
                                          pairs[idx[3]]};
    if (degenerate_sample(sample)) continue;
    Homography h;
    try {
      h = fit_homography_dlt(sample);
    } catch (const NumericError&) {
      continue;
    }
    Homography h_inv;
    try {
      h_inv = h.inverse();
    } catch (const NumericError&) {
      continue;
    }
    std::vector<int> inliers;
    for (int i = 0; i < n; ++i)
      if (symmetric_error(h, h_inv, pairs[i]) <= inlier_px) inliers.push_back(i);
    if (inliers.size() > best_inliers.size()) best_inliers = std::move(inliers);
  }
  SVBRDF_NUMERIC_REQUIRE(best_inliers.size() >= 4, "RANSAC found no usable model");

  std::vector<Correspondence> inlier_pts;
  inlier_pts.reserve(best_inliers.size());
  for (int i : best_inliers) inlier_pts.push_back(pairs[i]);
  RansacResult result;
  result.h = fit_homography_dlt(inlier_pts);
  const Homography h_inv = result.h.inverse();
  for (int i = 0; i < n; ++i)
    if (symmetric_error(result.h, h_inv, pairs[i]) <= inlier_px) result.inliers.push_back(i);
  return result;
}

}  // namespace svbrdf
