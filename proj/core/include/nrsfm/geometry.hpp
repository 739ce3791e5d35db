#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace nrsfm {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;

/// Points of one image in scene units, indexed by correspondence.
using PointCloud = std::vector<Vec3>;

/// Pinhole intrinsics in pixels.
struct CameraIntrinsics {
  double fx = 1.0;
  double fy = 1.0;
  double cx = 0.0;
  double cy = 0.0;

  /// Throws InvalidArgument unless fx > 0 and fy > 0.
  void validate() const;
  /// Pixel coordinates of a camera-frame point (Z must be non-zero).
  Vec2 to_pixel(const Vec3& P) const;
};

/// Normalised correspondences of m points across n images.
///
/// Entries are stored image-major: entry (i, j) lives at i * m + j.
/// Hidden entries hold zero vectors and visible(i, j) == false.
struct ObservationSet {
  int n = 0;
  int m = 0;
  std::vector<Vec3> points;      // homogeneous (x, y, 1)
  std::vector<Vec3> sightlines;  // points / |points|
  std::vector<std::uint8_t> visibility;

  const Vec3& point(int i, int j) const { return points[index(i, j)]; }
  const Vec3& sightline(int i, int j) const { return sightlines[index(i, j)]; }
  bool visible(int i, int j) const { return visibility[index(i, j)] != 0; }
  std::size_t index(int i, int j) const {
    return static_cast<std::size_t>(i) * static_cast<std::size_t>(m) +
           static_cast<std::size_t>(j);
  }
  bool fully_visible() const;
  int hidden_count() const;

  /// Checks unit sightlines, positive proportionality and that the
  /// reference image is fully visible. Throws InvalidArgument.
  void validate() const;

  /// Builds sightlines from homogeneous points with third component 1.
  static ObservationSet from_normalized(int n, int m, std::vector<Vec3> points,
                                        std::vector<std::uint8_t> visibility);
};

/// Pixel coordinates to normalised homogeneous points and unit sightlines.
/// `pixels` and `visibility` are image-major with n * m entries.
ObservationSet normalize(std::span<const Vec2> pixels, int n, int m,
                         const CameraIntrinsics& K,
                         std::span<const std::uint8_t> visibility);

inline double dist_sq(const Vec3& a, const Vec3& b) { return (a - b).squaredNorm(); }

/// Squared triangle area, (0.5 |(a - b) x (c - b)|)^2.
double area_sq(const Vec3& a, const Vec3& b, const Vec3& c);

/// Coefficients of the squared-area quartic of a triangle whose vertices
/// slide along three sightlines:
///   4 A^2 = (G1 dq^2 + G2 dr dq + G3 dr^2) dj^2
///         + (G4 dr dq^2 + G5 dr^2 dq) dj + G6 dq^2 dr^2
struct AreaQuarticCoeffs {
  std::array<double, 6> g{};

  /// Squared area for depths (dj, dq, dr).
  double evaluate(double dj, double dq, double dr) const;
  /// Coefficients of the same triangle with the roles of q and r exchanged.
  AreaQuarticCoeffs swapped_qr() const;
};

AreaQuarticCoeffs area_quartic_coeffs(const Vec3& dj, const Vec3& dq, const Vec3& dr);

/// Squared area through the fully expanded nine-coordinate quartic.
double area_quartic_pp(const Vec3& Pj, const Vec3& Pq, const Vec3& Pr);

/// Perspective projection (X/Z, Y/Z, 1). Throws InvalidArgument if Z <= 0.
Vec3 project(const Vec3& P);

}  // namespace nrsfm
