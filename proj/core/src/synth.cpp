#include "nrsfm/synth.hpp"

#include <algorithm>
#include <array>
#include <limits>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>

#include <Eigen/Geometry>

#include "nrsfm/error.hpp"

namespace nrsfm {

namespace {

using Rng = std::mt19937_64;

double uniform(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

Vec3 random_unit(Rng& rng) {
  std::normal_distribution<double> n;
  Vec3 v;
  do {
    v = Vec3(n(rng), n(rng), n(rng));
  } while (v.norm() < 1e-9);
  return v.normalized();
}

std::vector<Vec2> reference_positions(const PointCloud& cloud) {
  std::vector<Vec2> ref;
  ref.reserve(cloud.size());
  for (const auto& P : cloud) ref.push_back(project(P).head<2>());
  return ref;
}

// A straight template edge through a third grid point cannot stay isometric
// under bending and makes the refinement singular.
bool passes_through_point(const std::vector<Vec2>& flat, const Edge& e) {
  const Vec2 a = flat[e.first], b = flat[e.second];
  const double len = (b - a).norm();
  for (std::size_t k = 0; k < flat.size(); ++k) {
    if (static_cast<int>(k) == e.first || static_cast<int>(k) == e.second) continue;
    const Vec2 p = flat[k] - a;
    const double t = p.dot(b - a) / (len * len);
    const double off = std::abs(p.x() * (b - a).y() - p.y() * (b - a).x()) / len;
    if (t > 0.0 && t < 1.0 && off < 1e-9 * len) return true;
  }
  return false;
}

// Squared edge lengths of the graph equal to the template ones.
ResidualFn isometry_residuals(const std::vector<Edge>& edges, const std::vector<double>& target,
                              double scale) {
  return [edges, target, scale](const Eigen::VectorXd& x, Eigen::VectorXd& r, Eigen::MatrixXd* J) {
    r.resize(static_cast<int>(edges.size()));
    if (J) J->setZero(r.size(), x.size());
    for (int e = 0; e < r.size(); ++e) {
      const auto [a, b] = edges[e];
      const Vec3 d = x.segment<3>(3 * a) - x.segment<3>(3 * b);
      r(e) = scale * (d.squaredNorm() - target[e]);
      if (J) {
        J->block<1, 3>(e, 3 * a) = 2.0 * scale * d.transpose();
        J->block<1, 3>(e, 3 * b) = -2.0 * scale * d.transpose();
      }
    }
  };
}

Eigen::VectorXd stack(const PointCloud& cloud) {
  Eigen::VectorXd x(3 * cloud.size());
  for (std::size_t j = 0; j < cloud.size(); ++j) x.segment<3>(3 * j) = cloud[j];
  return x;
}

PointCloud unstack(const Eigen::VectorXd& x) {
  PointCloud cloud(x.size() / 3);
  for (std::size_t j = 0; j < cloud.size(); ++j) cloud[j] = x.segment<3>(3 * j);
  return cloud;
}

CameraIntrinsics random_camera(Rng& rng) {
  CameraIntrinsics K;
  K.fx = uniform(rng, 500.0, 1000.0);
  K.fy = K.fx * uniform(rng, 0.98, 1.02);
  K.cx = 320.0 + uniform(rng, -10.0, 10.0);
  K.cy = 240.0 + uniform(rng, -10.0, 10.0);
  return K;
}

void build_clouds(const GeneratorConfig& cfg, Rng& rng, SyntheticScene& scene) {
  const int m = cfg.m();
  scene.config = cfg;
  scene.camera = cfg.camera ? *cfg.camera : random_camera(rng);
  scene.camera.validate();
  scene.template_points = make_template(cfg.m_a, cfg.m_b);

  for (int i = 0; i < cfg.n; ++i) {
    PointCloud shape = scene.template_points;
    if (!cfg.flat) {
      std::vector<double> kappa(cfg.bend_segments);
      for (auto& k : kappa) k = uniform(rng, -cfg.max_curvature, cfg.max_curvature);
      shape = bend_template(scene.template_points, uniform(rng, 0.0, std::numbers::pi), kappa);
    }
    Vec3 centroid = Vec3::Zero();
    for (const auto& P : shape) centroid += P;
    centroid /= m;

    bool placed = false;
    for (int attempt = 0; attempt < cfg.max_pose_retries && !placed; ++attempt) {
      const double angle = uniform(rng, 0.0, cfg.max_tilt_deg * std::numbers::pi / 180.0);
      const Eigen::Matrix3d R = Eigen::AngleAxisd(angle, random_unit(rng)).toRotationMatrix();
      const Vec3 t(uniform(rng, -0.2, 0.2), uniform(rng, -0.2, 0.2),
                   uniform(rng, cfg.depth_min, cfg.depth_max));
      PointCloud cloud(m);
      placed = true;
      for (int j = 0; j < m; ++j) {
        cloud[j] = R * (shape[j] - centroid) + t;
        placed = placed && cloud[j].z() > 0.25 * cfg.depth_min;
      }
      if (placed) scene.gt_clouds.push_back(std::move(cloud));
    }
    if (!placed) throw GenerationError("could not place surface in front of the camera");
  }

  // Neighbours come from the first image; triangles are judged on the flat
  // template so that collinear grid triples never become 2-simplices.
  std::vector<Vec2> flat_xy;
  for (const auto& P : scene.template_points) flat_xy.push_back(P.head<2>());
  std::vector<Edge> e2 = build_e2(reference_positions(scene.gt_clouds[0]), cfg.knn);
  std::erase_if(e2, [&](const Edge& e) { return passes_through_point(flat_xy, e); });
  scene.graph = make_graph(m, std::move(e2), cfg.e3, flat_xy);

  const auto& T = scene.template_points;
  for (const auto& [a, b] : scene.graph.e2) scene.gt_geodesics.push_back(dist_sq(T[a], T[b]));
  for (const auto& t : scene.graph.e3) scene.gt_areas.push_back(area_sq(T[t[0]], T[t[1]], T[t[2]]));

  for (const auto& cloud : scene.gt_clouds) {
    for (std::size_t e = 0; e < scene.graph.e2.size(); ++e) {
      const auto [a, b] = scene.graph.e2[e];
      const double L = std::sqrt(scene.gt_geodesics[e]);
      scene.bending_deviation =
          std::max(scene.bending_deviation, std::abs((cloud[a] - cloud[b]).norm() - L) / L);
    }
  }

  if (cfg.isometric_refine && !cfg.flat) {
    const double mean_sq =
        std::accumulate(scene.gt_geodesics.begin(), scene.gt_geodesics.end(), 0.0) /
        static_cast<double>(scene.gt_geodesics.size());
    LmOptions lo;
    lo.max_iter = 200;
    for (auto& cloud : scene.gt_clouds) {
      const auto fn = isometry_residuals(scene.graph.e2, scene.gt_geodesics, 1.0 / mean_sq);
      const LmResult res = lm_minimize(fn, stack(cloud), lo);
      cloud = unstack(res.x);
    }
  }
}

void finish_observations(const GeneratorConfig& cfg, Rng& rng, SyntheticScene& scene) {
  const int m = cfg.m();
  const int n = cfg.n;
  for (const auto& cloud : scene.gt_clouds) {
    for (const auto& P : cloud) {
      if (!(P.z() > 0.0)) throw GenerationError("generated point lies behind the camera");
    }
  }

  for (const auto& cloud : scene.gt_clouds) {
    for (std::size_t e = 0; e < scene.graph.e2.size(); ++e) {
      const auto [a, b] = scene.graph.e2[e];
      scene.isometry_residual = std::max(
          scene.isometry_residual, std::abs(dist_sq(cloud[a], cloud[b]) - scene.gt_geodesics[e]));
    }
  }
  scene.mean_template_area = 0.0;
  for (double a2 : scene.gt_areas) scene.mean_template_area += std::sqrt(a2);
  if (!scene.gt_areas.empty()) scene.mean_template_area /= static_cast<double>(scene.gt_areas.size());
  scene.area_residuals.clear();
  for (const auto& cloud : scene.gt_clouds) {
    for (std::size_t k = 0; k < scene.graph.e3.size(); ++k) {
      const auto& t = scene.graph.e3[k];
      scene.area_residuals.push_back(
          std::abs(std::sqrt(area_sq(cloud[t[0]], cloud[t[1]], cloud[t[2]])) -
                   std::sqrt(scene.gt_areas[k])));
    }
  }

  scene.pixels.assign(static_cast<std::size_t>(n) * m, Vec2::Zero());
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < m; ++j) {
      Vec2 px = scene.camera.to_pixel(scene.gt_clouds[i][j]);
      if (cfg.x_sigma > 0.0) {
        for (int k = 0; k < 2; ++k) {
          const double s = cfg.noise == NoiseModel::uniform ? uniform(rng, -0.5, 0.5) : gauss(rng);
          px(k) += cfg.x_sigma * s;
        }
      }
      scene.pixels[static_cast<std::size_t>(i) * m + j] = px;
    }
  }

  scene.visibility.assign(static_cast<std::size_t>(n) * m, 1);
  const int hide = static_cast<int>(std::lround(cfg.hidden_fraction * m));
  if (hide > 0) {
    std::vector<int> idx(m);
    for (int i = 1; i < n; ++i) {
      std::iota(idx.begin(), idx.end(), 0);
      std::shuffle(idx.begin(), idx.end(), rng);
      for (int k = 0; k < hide; ++k) scene.visibility[static_cast<std::size_t>(i) * m + idx[k]] = 0;
    }
  }
  scene.observations = normalize(scene.pixels, n, m, scene.camera, scene.visibility);
}

}  // namespace

void GeneratorConfig::validate() const {
  if (m_a < 2 || m_b < 2) throw InvalidArgument("grid dimensions must be at least 2");
  if (n < 1) throw InvalidArgument("need at least one image");
  if (!(x_sigma >= 0.0)) throw InvalidArgument("noise multiplier must be nonnegative");
  if (!(chi_e >= 0.0)) throw InvalidArgument("equiareal perturbation must be nonnegative");
  if (!(depth_min > 0.0) || depth_max < depth_min) throw InvalidArgument("invalid depth range");
  if (bend_segments < 1) throw InvalidArgument("need at least one bending segment");
  if (hidden_fraction < 0.0 || hidden_fraction >= 1.0) {
    throw InvalidArgument("hidden fraction must lie in [0, 1)");
  }
  if (knn < 1 || knn >= m()) throw InvalidArgument("neighbour count must lie in [1, m)");
}

PointCloud make_template(int m_a, int m_b) {
  const double h = 1.0 / static_cast<double>(std::max(m_a, m_b) - 1);
  PointCloud pts;
  pts.reserve(static_cast<std::size_t>(m_a) * m_b);
  const double ox = 0.5 * h * (m_a - 1);
  const double oy = 0.5 * h * (m_b - 1);
  for (int b = 0; b < m_b; ++b) {
    for (int a = 0; a < m_a; ++a) pts.emplace_back(a * h - ox, b * h - oy, 0.0);
  }
  return pts;
}

PointCloud bend_template(const PointCloud& flat, double ruling_angle,
                         const std::vector<double>& curvatures) {
  const Vec3 u(std::cos(ruling_angle), std::sin(ruling_angle), 0.0);
  const Vec3 w(-u.y(), u.x(), 0.0);
  const Vec3 nz(0.0, 0.0, 1.0);

  double smin = std::numeric_limits<double>::infinity();
  double smax = -smin;
  for (const auto& P : flat) {
    smin = std::min(smin, P.dot(u));
    smax = std::max(smax, P.dot(u));
  }
  const int K = static_cast<int>(curvatures.size());
  const double seg = (smax - smin) / K;

  // Unit-speed planar curve with piecewise-constant curvature.
  auto curve = [&](double s) {
    double x = 0.0, z = 0.0, phi = 0.0;
    double remaining = s - smin;
    for (int k = 0; k < K && remaining > 0.0; ++k) {
      const double L = (k == K - 1) ? remaining : std::min(seg, remaining);
      const double kap = curvatures[k];
      if (std::abs(kap) < 1e-12) {
        x += L * std::cos(phi);
        z += L * std::sin(phi);
      } else {
        x += (std::sin(phi + kap * L) - std::sin(phi)) / kap;
        z += (-std::cos(phi + kap * L) + std::cos(phi)) / kap;
      }
      phi += kap * L;
      remaining -= L;
    }
    return std::pair<double, double>{x, z};
  };

  PointCloud out;
  out.reserve(flat.size());
  for (const auto& P : flat) {
    const auto [x, z] = curve(P.dot(u));
    out.push_back((smin + x) * u + z * nz + P.dot(w) * w);
  }
  return out;
}

ResidualFn equiareal_residuals(const std::vector<Triangle>& triangles,
                               const std::vector<double>& target, double scale) {
  return [triangles, target, scale](const Eigen::VectorXd& x, Eigen::VectorXd& r,
                                    Eigen::MatrixXd* J) {
    r.resize(static_cast<int>(triangles.size()));
    if (J) J->setZero(r.size(), x.size());
    for (int k = 0; k < r.size(); ++k) {
      const auto& t = triangles[k];
      const Vec3 a = x.segment<3>(3 * t[0]);
      const Vec3 b = x.segment<3>(3 * t[1]);
      const Vec3 e = x.segment<3>(3 * t[2]);
      const Vec3 c = (a - b).cross(e - b);
      r(k) = scale * (0.25 * c.squaredNorm() - target[k]);
      if (J) {
        const Vec3 ga = 0.5 * (e - b).cross(c);
        const Vec3 ge = 0.5 * (b - a).cross(c);
        J->block<1, 3>(k, 3 * t[0]) = scale * ga.transpose();
        J->block<1, 3>(k, 3 * t[2]) = scale * ge.transpose();
        J->block<1, 3>(k, 3 * t[1]) = -scale * (ga + ge).transpose();
      }
    }
  };
}

SyntheticScene generate_isometric(const GeneratorConfig& config) {
  config.validate();
  Rng rng(config.seed);
  SyntheticScene scene;
  scene.mode = "iso";
  build_clouds(config, rng, scene);
  finish_observations(config, rng, scene);
  return scene;
}

SyntheticScene generate_equiareal(const GeneratorConfig& config) {
  config.validate();
  Rng rng(config.seed);
  SyntheticScene scene;
  scene.mode = "equi";
  build_clouds(config, rng, scene);
  if (scene.graph.e3.empty()) throw GenerationError("equiareal generation needs triangles");

  if (config.chi_e > 0.0) {
    double mean = 0.0;
    for (double a : scene.gt_areas) mean += a;
    mean /= static_cast<double>(scene.gt_areas.size());
    LmOptions lo;
    lo.max_iter = 500;
    for (auto& cloud : scene.gt_clouds) {
      for (auto& P : cloud) P += Vec3::Ones() * config.chi_e * uniform(rng, -0.5, 0.5);
      const auto fn = equiareal_residuals(scene.graph.e3, scene.gt_areas, 1.0 / mean);
      const LmResult res = lm_minimize(fn, stack(cloud), lo);
      if (!std::isfinite(res.cost)) throw GenerationError("equiareal projection diverged");
      cloud = unstack(res.x);
    }
  }
  finish_observations(config, rng, scene);
  return scene;
}

Lemma1Result lemma1_sample(long count, double h1_max, double h2_max, double edge_scale,
                           std::uint64_t seed) {
  if (count <= 0) throw InvalidArgument("sample count must be positive");
  if (h1_max < 0.0 || h2_max < 0.0) throw InvalidArgument("displacement bounds must be nonnegative");
  if (!(edge_scale > 0.0)) throw InvalidArgument("edge scale must be positive");

  Rng rng(seed);
  std::normal_distribution<double> gauss;
  long pos1 = 0, pos2 = 0;

  auto nonneg_disc = [](double a, double b, double c) {
    const double disc = b * b - 4.0 * a * c;
    return disc >= -1e-12 * (b * b + std::abs(4.0 * a * c));
  };

  for (long s = 0; s < count; ++s) {
    // Triangle in front of the camera with the requested mean edge length.
    Vec3 dir;
    do {
      dir = random_unit(rng);
    } while (dir.z() < std::cos(std::numbers::pi / 6.0));
    const Vec3 centre = dir * uniform(rng, 1.0, 3.0);
    std::array<Vec3, 3> off;
    for (auto& o : off) o = Vec3(gauss(rng), gauss(rng), gauss(rng));
    const double mean_edge =
        ((off[0] - off[1]).norm() + (off[1] - off[2]).norm() + (off[0] - off[2]).norm()) / 3.0;
    const double target = edge_scale * uniform(rng, 0.5, 1.5);
    std::array<Vec3, 3> P;
    for (int k = 0; k < 3; ++k) P[k] = centre + off[k] * (target / mean_edge);

    const double dj = P[0].norm(), dq = P[1].norm(), dr = P[2].norm();
    const auto G = area_quartic_coeffs(P[0] / dj, P[1] / dq, P[2] / dr).g;
    const double q0 = 4.0 * AreaQuarticCoeffs{G}.evaluate(dj, dq, dr);
    const double h1 = uniform(rng, 0.0, h1_max);
    const double h2 = uniform(rng, 0.0, h2_max);

    auto quadratic_root_exists = [&](double J, double Q) {
      const double a = G[2] * J * J + G[4] * Q * J + G[5] * Q * Q;
      const double b = G[1] * Q * J * J + G[3] * Q * Q * J;
      const double c = G[0] * Q * Q * J * J - q0;
      return nonneg_disc(a, b, c);
    };
    pos1 += quadratic_root_exists(dj + h1, dq);
    pos2 += quadratic_root_exists(dj + h1, dq + h2);
  }
  return {static_cast<double>(pos1) / count, static_cast<double>(pos2) / count, count};
}

}  // namespace nrsfm
