#include "nrsfm/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <tuple>

#include "nrsfm/error.hpp"

namespace nrsfm {

namespace {

void check_shapes(const std::vector<PointCloud>& est, const std::vector<PointCloud>& gt,
                  const PointMask& mask) {
  if (est.size() != gt.size()) throw InvalidArgument("frame count mismatch");
  std::size_t total = 0;
  for (std::size_t i = 0; i < est.size(); ++i) {
    if (est[i].size() != gt[i].size()) throw InvalidArgument("point count mismatch");
    total += gt[i].size();
  }
  if (!mask.empty() && mask.size() != total) throw InvalidArgument("mask size mismatch");
}

bool selected(const PointMask& mask, std::size_t m, std::size_t i, std::size_t j) {
  return mask.empty() || mask[i * m + j] != 0;
}

}  // namespace

double align_scale(const std::vector<PointCloud>& est, const std::vector<PointCloud>& gt,
                   const PointMask& mask) {
  check_shapes(est, gt, mask);
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < est.size(); ++i) {
    for (std::size_t j = 0; j < est[i].size(); ++j) {
      if (!selected(mask, est[i].size(), i, j)) continue;
      num += est[i][j].dot(gt[i][j]);
      den += est[i][j].squaredNorm();
    }
  }
  if (!(den > 0.0)) throw InvalidArgument("estimate has zero norm");
  return num / den;
}

std::pair<double, double> rms_med(const std::vector<PointCloud>& est,
                                  const std::vector<PointCloud>& gt, double scale,
                                  const PointMask& mask) {
  check_shapes(est, gt, mask);
  std::vector<double> err;
  double sum = 0.0;
  for (std::size_t i = 0; i < est.size(); ++i) {
    for (std::size_t j = 0; j < est[i].size(); ++j) {
      if (!selected(mask, est[i].size(), i, j)) continue;
      const double e = (scale * est[i][j] - gt[i][j]).norm();
      err.push_back(e);
      sum += e * e;
    }
  }
  if (err.empty()) return {0.0, 0.0};
  const double rms = std::sqrt(sum / static_cast<double>(err.size()));
  std::sort(err.begin(), err.end());
  const std::size_t h = err.size() / 2;
  const double med = err.size() % 2 ? err[h] : 0.5 * (err[h - 1] + err[h]);
  return {rms, med};
}

DeviationMetrics deviation_metrics(const std::vector<PointCloud>& clouds,
                                   const SimplicialGraph& graph,
                                   std::span<const double> geodesics,
                                   std::span<const double> areas) {
  if (geodesics.size() != graph.e2.size()) throw InvalidArgument("geodesic count mismatch");
  DeviationMetrics out;
  if (clouds.empty()) return out;
  const double n = static_cast<double>(clouds.size());

  double g = 0.0;
  for (const auto& P : clouds) {
    for (std::size_t e = 0; e < graph.e2.size(); ++e) {
      const auto [a, b] = graph.e2[e];
      g += std::abs(geodesics[e] - dist_sq(P[a], P[b]));
    }
  }
  if (!graph.e2.empty()) out.gE = g / (n * static_cast<double>(graph.e2.size()));

  if (!graph.e3.empty() && !areas.empty()) {
    if (areas.size() != graph.e3.size()) throw InvalidArgument("area count mismatch");
    double a = 0.0;
    for (const auto& P : clouds) {
      for (std::size_t k = 0; k < graph.e3.size(); ++k) {
        const auto& t = graph.e3[k];
        a += std::abs(areas[k] - area_sq(P[t[0]], P[t[1]], P[t[2]]));
      }
    }
    out.aE = a / (n * static_cast<double>(graph.e3.size()));
  }
  return out;
}

double scene_diameter(const std::vector<PointCloud>& gt) {
  double d = 0.0;
  for (const auto& P : gt) {
    for (std::size_t a = 0; a < P.size(); ++a) {
      for (std::size_t b = a + 1; b < P.size(); ++b) d = std::max(d, (P[a] - P[b]).norm());
    }
  }
  return d;
}

EvalReport evaluate(const std::vector<PointCloud>& est, const std::vector<PointCloud>& gt,
                    const PointMask& mask, const SimplicialGraph* graph,
                    std::span<const double> geodesics, std::span<const double> areas,
                    bool per_frame_scale) {
  EvalReport r;
  r.scale = align_scale(est, gt, mask);
  std::tie(r.rms, r.med) = rms_med(est, gt, r.scale, mask);
  r.diameter = scene_diameter(gt);

  for (std::size_t i = 0; i < est.size(); ++i) {
    std::vector<PointCloud> e1{est[i]}, g1{gt[i]};
    PointMask m1;
    if (!mask.empty()) {
      const std::size_t m = gt[i].size();
      m1.assign(mask.begin() + static_cast<long>(i * m), mask.begin() + static_cast<long>((i + 1) * m));
    }
    const double s = per_frame_scale ? align_scale(e1, g1, m1) : r.scale;
    r.per_frame.push_back(rms_med(e1, g1, s, m1).first);
  }

  if (graph && !geodesics.empty()) {
    const auto dev = deviation_metrics(est, *graph, geodesics, areas);
    r.gE = dev.gE;
    r.aE = dev.aE;
  }
  return r;
}

std::string format_metric(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

}  // namespace nrsfm
