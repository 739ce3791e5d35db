#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "nrsfm/geometry.hpp"
#include "nrsfm/graph.hpp"
#include "nrsfm/lm.hpp"

namespace nrsfm {

enum class NoiseModel { uniform, gaussian };

struct GeneratorConfig {
  int m_a = 4;
  int m_b = 4;
  int n = 3;
  double x_sigma = 0.0;  // pixel noise multiplier
  NoiseModel noise = NoiseModel::uniform;
  double chi_e = 0.0;    // equiareal perturbation magnitude
  std::uint64_t seed = 0;

  std::optional<CameraIntrinsics> camera;  // random realistic intrinsics when empty
  double depth_min = 0.8;
  double depth_max = 1.2;
  double max_tilt_deg = 35.0;
  double max_curvature = 1.5;  // per unit template length
  int bend_segments = 3;
  bool flat = false;              // no bending at all
  bool isometric_refine = true;   // make graph edge lengths exactly isometric
  double hidden_fraction = 0.0;   // share of points hidden in images 2..n
  int knn = 4;
  E3Options e3{};
  int max_pose_retries = 100;

  int m() const { return m_a * m_b; }
  /// Throws InvalidArgument for out-of-range settings.
  void validate() const;
};

struct SyntheticScene {
  GeneratorConfig config;
  std::string mode;  // "iso" or "equi"
  CameraIntrinsics camera;
  PointCloud template_points;
  std::vector<PointCloud> gt_clouds;  // camera frame
  std::vector<Vec2> pixels;           // image-major, n * m
  std::vector<std::uint8_t> visibility;
  ObservationSet observations;
  SimplicialGraph graph;
  std::vector<double> gt_geodesics;  // squared template lengths per e2 edge
  std::vector<double> gt_areas;      // squared template areas per e3 triangle

  double bending_deviation = 0.0;   // max relative edge-length change from bending
  double isometry_residual = 0.0;   // max |len^2 - template len^2| after refinement
  std::vector<double> area_residuals;  // per triangle and image, |area - template area|
  double mean_template_area = 0.0;
};

/// Flat m_a x m_b grid of about unit size in the z = 0 plane.
PointCloud make_template(int m_a, int m_b);

/// Piecewise-cylindrical bending of a flat template about a random ruling.
PointCloud bend_template(const PointCloud& flat, double ruling_angle,
                         const std::vector<double>& curvatures);

SyntheticScene generate_isometric(const GeneratorConfig& config);
SyntheticScene generate_equiareal(const GeneratorConfig& config);

/// Residuals a_t - target_t over the triangles (squared areas) of one cloud,
/// with Jacobian with respect to the stacked coordinates.
ResidualFn equiareal_residuals(const std::vector<Triangle>& triangles,
                               const std::vector<double>& target_sq_areas, double scale = 1.0);

struct Lemma1Result {
  double first = 0.0;   // fraction with nonnegative discriminant, one displaced vertex
  double second = 0.0;  // two displaced vertices
  long samples = 0;
};

Lemma1Result lemma1_sample(long count, double h1_max, double h2_max, double edge_scale,
                           std::uint64_t seed = 0);

}  // namespace nrsfm
