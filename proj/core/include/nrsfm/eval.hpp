#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "nrsfm/geometry.hpp"
#include "nrsfm/graph.hpp"

namespace nrsfm {

/// Entry (i, j) of an n x m mask, image-major. An empty mask selects all.
using PointMask = std::vector<std::uint8_t>;

/// Global least-squares scale mapping est onto gt over the selected entries.
/// Throws InvalidArgument on shape mismatch or an all-zero estimate.
double align_scale(const std::vector<PointCloud>& est, const std::vector<PointCloud>& gt,
                   const PointMask& mask = {});

/// RMS and median of |s * est - gt| over the selected entries.
std::pair<double, double> rms_med(const std::vector<PointCloud>& est,
                                  const std::vector<PointCloud>& gt, double scale = 1.0,
                                  const PointMask& mask = {});

struct DeviationMetrics {
  double gE = 0.0;
  std::optional<double> aE;
};

/// Mean absolute deviation of squared edge lengths and squared areas of the
/// (unscaled) clouds from the recovered template values.
DeviationMetrics deviation_metrics(const std::vector<PointCloud>& clouds,
                                   const SimplicialGraph& graph,
                                   std::span<const double> geodesics,
                                   std::span<const double> areas = {});

/// Largest pairwise distance within any frame.
double scene_diameter(const std::vector<PointCloud>& gt);

struct EvalReport {
  double scale = 1.0;
  double rms = 0.0;
  double med = 0.0;
  double diameter = 0.0;
  std::vector<double> per_frame;  // RMS per image after the global scale
  std::optional<double> gE;
  std::optional<double> aE;
};

/// Scale alignment, error statistics and (when geodesics are given) the
/// deviation metrics. `per_frame_scale` aligns each image separately for
/// the per-frame list only.
EvalReport evaluate(const std::vector<PointCloud>& est, const std::vector<PointCloud>& gt,
                    const PointMask& mask = {}, const SimplicialGraph* graph = nullptr,
                    std::span<const double> geodesics = {}, std::span<const double> areas = {},
                    bool per_frame_scale = false);

/// Two-decimal rendering used in reports ("2.19").
std::string format_metric(double v);

}  // namespace nrsfm
