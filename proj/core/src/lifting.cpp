#include "nrsfm/lifting.hpp"

#include "nrsfm/error.hpp"

namespace nrsfm {

GramLayout gram_layout(GramKind kind, int m, int p2_tilde) {
  switch (kind) {
    case GramKind::depth: return {kind, m};
    case GramKind::position: return {kind, 3 * m + 1};
    case GramKind::depth_lift: return {kind, m + p2_tilde};
    case GramKind::position_lift: return {kind, 3 * m + 1 + 6 * p2_tilde};
    case GramKind::theta_aux: return {kind, 6 * p2_tilde};
  }
  return {kind, 0};
}

LinearFunctional g_I_dsl(int j, int q, double dot_jq) {
  LinearFunctional f;
  f.add(j, j, 1.0);
  f.add(q, q, 1.0);
  f.add(j, q, -2.0 * dot_jq);
  f.compress();
  return f;
}

LinearFunctional g_I_pp(int j, int q) {
  LinearFunctional f;
  for (int k = 0; k < 3; ++k) f.add_square({{coord_index(j, k), 1.0}, {coord_index(q, k), -1.0}});
  f.compress();
  return f;
}

LinearFunctional f_reproj(int j, const Vec3& d) {
  const int X = coord_index(j, 0), Y = coord_index(j, 1), Z = coord_index(j, 2);
  LinearFunctional f;
  f.add(X, X, d.y() * d.y() + d.z() * d.z());
  f.add(Y, Y, d.x() * d.x() + d.z() * d.z());
  f.add(Z, Z, d.x() * d.x() + d.y() * d.y());
  f.add(X, Y, -2.0 * d.x() * d.y());
  f.add(X, Z, -2.0 * d.x() * d.z());
  f.add(Y, Z, -2.0 * d.y() * d.z());
  f.compress();
  return f;
}

LinearFunctional f_mdh_pp(int j, const Vec3& d) {
  LinearFunctional f;
  for (int k = 0; k < 3; ++k) f.add(0, coord_index(j, k), d(k));
  f.compress();
  return f;
}

LinearFunctional f_mdh_completion(int j, const std::vector<Vec3>& neighbour_sightlines) {
  if (neighbour_sightlines.empty()) {
    throw InvalidArgument("completion needs at least one pseudo-neighbour");
  }
  Vec3 sum = Vec3::Zero();
  for (const auto& d : neighbour_sightlines) sum += d;
  return f_mdh_pp(j, sum);
}

LinearFunctional g_E_dsl(const Triangle& t, const AreaQuarticCoeffs& c, const LiftIndexMaps& maps) {
  const auto [a1, b1, c1] = maps.omega(t);
  LinearFunctional f;
  f.add(a1, a1, c.g[0]);
  f.add(a1, c1, c.g[1]);
  f.add(c1, c1, c.g[2]);
  f.add(a1, b1, c.g[3]);
  f.add(b1, c1, c.g[4]);
  f.add(b1, b1, c.g[5]);
  f *= 0.25;
  f.compress();
  return f;
}

LinearFunctional area_from_products(int base_jq, int base_qr, int base_jr) {
  // (P_j - P_q) x (P_r - P_q) = P_j x P_r - P_j x P_q - P_q x P_r, and each
  // component of P_a x P_b is a difference of two products of the edge (a,b):
  //   x: Y_a Z_b - Z_a Y_b   y: Z_a X_b - X_a Z_b   z: X_a Y_b - Y_a X_b
  constexpr std::array<std::array<int, 2>, 3> comp{{{3, 5}, {4, 1}, {0, 2}}};
  const std::array<std::pair<int, double>, 3> edges{
      {{base_jr, 1.0}, {base_jq, -1.0}, {base_qr, -1.0}}};
  LinearFunctional f;
  for (const auto& [plus, minus] : comp) {
    std::vector<std::pair<int, double>> w;
    for (const auto& [base, sign] : edges) {
      w.emplace_back(base + plus, sign);
      w.emplace_back(base + minus, -sign);
    }
    f.add_square(w, 0.25);
  }
  f.compress();
  return f;
}

LinearFunctional g_E_pp(const Triangle& t, const LiftIndexMaps& maps) {
  return area_from_products(maps.theta_slot(t[0], t[1]), maps.theta_slot(t[1], t[2]),
                            maps.theta_slot(t[0], t[2]));
}

std::vector<DominancePair> consistency_constraints_T(const SimplicialGraph& graph,
                                                     const LiftIndexMaps& maps) {
  std::vector<DominancePair> out;
  for (const auto& [j, q] : graph.lifted) out.push_back({j, q, maps.edge_slot(j, q)});
  return out;
}

std::vector<DominancePair> consistency_constraints_U(const SimplicialGraph& graph,
                                                     const LiftIndexMaps& maps) {
  std::vector<DominancePair> out;
  for (const auto& [j, q] : graph.lifted) {
    const int base = maps.theta_slot(j, q);
    for (int s = 0; s < 6; ++s) {
      const auto [ka, kb] = kThetaAxes[s];
      out.push_back({coord_index(j, ka), coord_index(q, kb), base + s});
    }
  }
  return out;
}

std::array<double, 6> theta(const Vec3& Pa, const Vec3& Pb) {
  std::array<double, 6> out{};
  for (int s = 0; s < 6; ++s) out[s] = Pa(kThetaAxes[s].first) * Pb(kThetaAxes[s].second);
  return out;
}

Eigen::VectorXd depth_lift_vector(const std::vector<double>& depths, const LiftIndexMaps& maps) {
  Eigen::VectorXd v(maps.t_dim());
  for (int j = 0; j < maps.m; ++j) v(j) = depths[j];
  for (const auto& [e, k] : maps.order) v(maps.m + k) = depths[e.first] * depths[e.second];
  return v;
}

Eigen::VectorXd augmented_position_vector(const PointCloud& points) {
  Eigen::VectorXd v(3 * points.size() + 1);
  v(0) = 1.0;
  for (std::size_t j = 0; j < points.size(); ++j) v.segment<3>(1 + 3 * j) = points[j];
  return v;
}

Eigen::VectorXd position_lift_vector(const PointCloud& points, const LiftIndexMaps& maps) {
  Eigen::VectorXd v(maps.u_dim());
  v.head(3 * maps.m + 1) = augmented_position_vector(points);
  for (const auto& [e, k] : maps.order) {
    const auto th = theta(points[e.first], points[e.second]);
    for (int s = 0; s < 6; ++s) v(3 * maps.m + 1 + 6 * k + s) = th[s];
  }
  return v;
}

}  // namespace nrsfm
