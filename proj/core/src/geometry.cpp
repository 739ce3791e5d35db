#include "nrsfm/geometry.hpp"

#include <cmath>
#include <string>

#include "nrsfm/error.hpp"
#include "nrsfm/tolerances.hpp"

namespace nrsfm {

void CameraIntrinsics::validate() const {
  if (!(fx > 0.0) || !(fy > 0.0)) {
    throw InvalidArgument("camera focal lengths must be positive");
  }
}

Vec2 CameraIntrinsics::to_pixel(const Vec3& P) const {
  return {fx * P.x() / P.z() + cx, fy * P.y() / P.z() + cy};
}

bool ObservationSet::fully_visible() const {
  for (auto v : visibility) {
    if (v == 0) return false;
  }
  return true;
}

int ObservationSet::hidden_count() const {
  int hidden = 0;
  for (auto v : visibility) hidden += (v == 0);
  return hidden;
}

void ObservationSet::validate() const {
  const auto total = static_cast<std::size_t>(n) * static_cast<std::size_t>(m);
  if (n <= 0 || m <= 0) throw InvalidArgument("observation set must be non-empty");
  if (points.size() != total || sightlines.size() != total || visibility.size() != total) {
    throw InvalidArgument("observation arrays do not match n * m");
  }
  for (int j = 0; j < m; ++j) {
    if (!visible(0, j)) {
      throw InvalidArgument("point " + std::to_string(j) +
                            " is hidden in the reference image");
    }
  }
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < m; ++j) {
      if (!visible(i, j)) continue;
      const Vec3& d = sightline(i, j);
      if (std::abs(d.norm() - 1.0) > Tolerances::kUnitNorm) {
        throw InvalidArgument("sightline (" + std::to_string(i) + ", " + std::to_string(j) +
                              ") is not unit length");
      }
      const Vec3& p = point(i, j);
      if (p.cross(d).norm() > 1e-9 * p.norm() || p.dot(d) <= 0.0) {
        throw InvalidArgument("sightline (" + std::to_string(i) + ", " + std::to_string(j) +
                              ") is not positively proportional to its point");
      }
    }
  }
}

ObservationSet ObservationSet::from_normalized(int n, int m, std::vector<Vec3> points,
                                               std::vector<std::uint8_t> visibility) {
  ObservationSet obs;
  obs.n = n;
  obs.m = m;
  obs.points = std::move(points);
  obs.visibility = std::move(visibility);
  obs.sightlines.assign(obs.points.size(), Vec3::Zero());
  for (std::size_t k = 0; k < obs.points.size(); ++k) {
    if (obs.visibility[k] == 0) {
      obs.points[k].setZero();
      continue;
    }
    obs.sightlines[k] = obs.points[k] / obs.points[k].norm();
  }
  return obs;
}

ObservationSet normalize(std::span<const Vec2> pixels, int n, int m, const CameraIntrinsics& K,
                         std::span<const std::uint8_t> visibility) {
  K.validate();
  const auto total = static_cast<std::size_t>(n) * static_cast<std::size_t>(m);
  if (pixels.size() != total || visibility.size() != total) {
    throw InvalidArgument("pixel and visibility arrays must hold n * m entries");
  }
  std::vector<Vec3> points(total, Vec3::Zero());
  std::vector<std::uint8_t> vis(visibility.begin(), visibility.end());
  for (std::size_t k = 0; k < total; ++k) {
    if (vis[k] == 0) continue;
    const Vec2& px = pixels[k];
    if (!std::isfinite(px.x()) || !std::isfinite(px.y())) {
      throw InvalidArgument("non-finite pixel at image " + std::to_string(k / m) +
                            ", point " + std::to_string(k % m));
    }
    points[k] = Vec3((px.x() - K.cx) / K.fx, (px.y() - K.cy) / K.fy, 1.0);
  }
  auto obs = ObservationSet::from_normalized(n, m, std::move(points), std::move(vis));
  obs.validate();
  return obs;
}

double area_sq(const Vec3& a, const Vec3& b, const Vec3& c) {
  const double half = 0.5 * (a - b).cross(c - b).norm();
  return half * half;
}

double AreaQuarticCoeffs::evaluate(double dj, double dq, double dr) const {
  const double quad = (g[0] * dq * dq + g[1] * dr * dq + g[2] * dr * dr) * dj * dj;
  const double lin = (g[3] * dr * dq * dq + g[4] * dr * dr * dq) * dj;
  const double rest = g[5] * dq * dq * dr * dr;
  return 0.25 * (quad + lin + rest);
}

AreaQuarticCoeffs AreaQuarticCoeffs::swapped_qr() const {
  return AreaQuarticCoeffs{{g[2], g[1], g[0], g[4], g[3], g[5]}};
}

AreaQuarticCoeffs area_quartic_coeffs(const Vec3& dj, const Vec3& dq, const Vec3& dr) {
  const double xj = dj.x(), yj = dj.y(), zj = dj.z();
  const double xq = dq.x(), yq = dq.y(), zq = dq.z();
  const double xr = dr.x(), yr = dr.y(), zr = dr.z();

  AreaQuarticCoeffs c;
  c.g[0] = (yq * yq + zq * zq) * xj * xj - 2.0 * (yq * xq * yj + zq * xq * zj) * xj +
           (zq * zq + xq * xq) * yj * yj - 2.0 * zq * yq * zj * yj +
           (yq * yq + xq * xq) * zj * zj;
  c.g[1] = -2.0 * (yq * yr + zr * zq) * xj * xj -
           2.0 * ((-xr * yq - xq * yr) * yj + (-xr * zq - zr * xq) * zj) * xj -
           2.0 * (zr * zq + xq * xr) * yj * yj + 2.0 * (zr * yq + zq * yr) * zj * yj -
           2.0 * (yq * yr + xq * xr) * zj * zj;
  c.g[2] = (yr * yr + zr * zr) * xj * xj - 2.0 * (yr * xr * yj + zr * xr * zj) * xj +
           (xr * xr + zr * zr) * yj * yj - 2.0 * yj * zj * yr * zr +
           zj * zj * (xr * xr + yr * yr);
  c.g[3] = 2.0 * ((yq * yr + zr * zq) * xq - xr * (yq * yq + zq * zq)) * xj -
           2.0 * (-zr * zq * yq - xr * yq * xq + zq * zq * yr + xq * xq * yr) * yj -
           2.0 * (yq * yq * zr - zq * yr * yq - xr * zq * xq + xq * xq * zr) * zj;
  c.g[4] = 2.0 * (-(yr * yr + zr * zr) * xq - xr * (-yq * yr - zr * zq)) * xj -
           2.0 * (-xr * yr * xq + (xr * xr + zr * zr) * yq - zq * yr * zr) * yj -
           2.0 * (-xr * zr * xq - yr * zr * yq + zq * (xr * xr + yr * yr)) * zj;
  c.g[5] = (yr * yr + zr * zr) * xq * xq - 2.0 * xr * (yq * yr + zr * zq) * xq +
           (xr * xr + zr * zr) * yq * yq - 2.0 * zq * yr * zr * yq +
           zq * zq * (xr * xr + yr * yr);
  return c;
}

double area_quartic_pp(const Vec3& Pj, const Vec3& Pq, const Vec3& Pr) {
  const double Xj = Pj.x(), Yj = Pj.y(), Zj = Pj.z();
  const double Xq = Pq.x(), Yq = Pq.y(), Zq = Pq.z();
  const double Xr = Pr.x(), Yr = Pr.y(), Zr = Pr.z();

  double s = 0.0;
  s += Xj * Xj * Yq * Yq - 2 * Xj * Xj * Yq * Yr + Xj * Xj * Yr * Yr + Xj * Xj * Zq * Zq -
       2 * Xj * Xj * Zq * Zr + Xj * Xj * Zr * Zr;
  s += -2 * Xj * Xq * Yj * Yq + 2 * Xj * Xq * Yj * Yr + 2 * Xj * Xq * Yq * Yr -
       2 * Xj * Xq * Yr * Yr;
  s += -2 * Xj * Xq * Zj * Zq + 2 * Xj * Xq * Zj * Zr + 2 * Xj * Xq * Zq * Zr -
       2 * Xj * Xq * Zr * Zr;
  s += 2 * Xj * Xr * Yj * Yq - 2 * Xj * Xr * Yj * Yr - 2 * Xj * Xr * Yq * Yq +
       2 * Xj * Xr * Yq * Yr;
  s += 2 * Xj * Xr * Zj * Zq - 2 * Xj * Xr * Zj * Zr - 2 * Xj * Xr * Zq * Zq +
       2 * Xj * Xr * Zq * Zr;
  s += Xq * Xq * Yj * Yj - 2 * Xq * Xq * Yj * Yr + Xq * Xq * Yr * Yr + Xq * Xq * Zj * Zj -
       2 * Xq * Xq * Zj * Zr + Xq * Xq * Zr * Zr;
  s += -2 * Xq * Xr * Yj * Yj + 2 * Xq * Xr * Yj * Yq + 2 * Xq * Xr * Yj * Yr -
       2 * Xq * Xr * Yq * Yr;
  s += -2 * Xq * Xr * Zj * Zj + 2 * Xq * Xr * Zj * Zq + 2 * Xq * Xr * Zj * Zr -
       2 * Xq * Xr * Zq * Zr;
  s += Xr * Xr * Yj * Yj - 2 * Xr * Xr * Yj * Yq + Xr * Xr * Yq * Yq + Xr * Xr * Zj * Zj -
       2 * Xr * Xr * Zj * Zq + Xr * Xr * Zq * Zq;
  s += Yj * Yj * Zq * Zq - 2 * Yj * Yj * Zq * Zr + Yj * Yj * Zr * Zr;
  s += -2 * Yj * Yq * Zj * Zq + 2 * Yj * Yq * Zj * Zr + 2 * Yj * Yq * Zq * Zr -
       2 * Yj * Yq * Zr * Zr;
  s += 2 * Yj * Yr * Zj * Zq - 2 * Yj * Yr * Zj * Zr - 2 * Yj * Yr * Zq * Zq +
       2 * Yj * Yr * Zq * Zr;
  s += Yq * Yq * Zj * Zj - 2 * Yq * Yq * Zj * Zr + Yq * Yq * Zr * Zr;
  s += -2 * Yq * Yr * Zj * Zj + 2 * Yq * Yr * Zj * Zq + 2 * Yq * Yr * Zj * Zr -
       2 * Yq * Yr * Zq * Zr;
  s += Yr * Yr * Zj * Zj - 2 * Yr * Yr * Zj * Zq + Yr * Yr * Zq * Zq;
  return 0.25 * s;
}

Vec3 project(const Vec3& P) {
  if (!(P.z() > 0.0)) {
    throw InvalidArgument("point lies on or behind the camera plane");
  }
  return {P.x() / P.z(), P.y() / P.z(), 1.0};
}

}  // namespace nrsfm
