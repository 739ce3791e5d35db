#pragma once

#include <array>
#include <utility>
#include <vector>

#include "nrsfm/conic/program.hpp"
#include "nrsfm/geometry.hpp"
#include "nrsfm/graph.hpp"

namespace nrsfm {

using conic::LinearFunctional;

/// Gram matrix families and their side lengths.
enum class GramKind { depth, position, depth_lift, position_lift, theta_aux };

struct GramLayout {
  GramKind kind = GramKind::depth;
  int dim = 0;
};

GramLayout gram_layout(GramKind kind, int m, int p2_tilde);

// All functionals below are returned unbound (block == -1) and use the
// 0-based index conventions of graph.hpp: depth j at j, lifted edge slots
// after the m depths, augmented position coordinates at 1 + 3j + k and
// product blocks after the 3m + 1 position entries.

/// Squared distance between depth-parameterised points j and q.
LinearFunctional g_I_dsl(int j, int q, double dot_jq);
/// Squared distance between points j and q of the augmented position Gram.
LinearFunctional g_I_pp(int j, int q);
/// |P_j x d|^2 on the augmented position Gram.
LinearFunctional f_reproj(int j, const Vec3& d);
/// <P_j, d> read from the first row of the augmented position Gram.
LinearFunctional f_mdh_pp(int j, const Vec3& d);
/// Sum over pseudo-neighbour sightlines of <P_j, d_l>.
LinearFunctional f_mdh_completion(int j, const std::vector<Vec3>& neighbour_sightlines);

/// Squared triangle area on the depth lift.
LinearFunctional g_E_dsl(const Triangle& t, const AreaQuarticCoeffs& coeffs,
                         const LiftIndexMaps& maps);
/// Squared triangle area on the position lift.
LinearFunctional g_E_pp(const Triangle& t, const LiftIndexMaps& maps);
/// Squared area given the first index of the product blocks of edges
/// (j,q), (q,r) and (j,r) inside some Gram matrix.
LinearFunctional area_from_products(int base_jq, int base_qr, int base_jr);

/// A pair y^2 <= z: the off-diagonal entry (row, col) and the diagonal
/// index whose entry dominates its square.
struct DominancePair {
  int row = 0;
  int col = 0;
  int diag = 0;

  bool operator==(const DominancePair&) const = default;
};

/// One pair per lifted edge: T(j,q)^2 <= T(slot, slot).
std::vector<DominancePair> consistency_constraints_T(const SimplicialGraph& graph,
                                                     const LiftIndexMaps& maps);
/// Six pairs per lifted edge linking coordinate products to product
/// diagonals of the position lift.
std::vector<DominancePair> consistency_constraints_U(const SimplicialGraph& graph,
                                                     const LiftIndexMaps& maps);

/// Rank-1 lift vectors of a single configuration.
Eigen::VectorXd depth_lift_vector(const std::vector<double>& depths, const LiftIndexMaps& maps);
Eigen::VectorXd position_lift_vector(const PointCloud& points, const LiftIndexMaps& maps);
/// (1, P_1, ..., P_m)
Eigen::VectorXd augmented_position_vector(const PointCloud& points);
/// The six products of an ordered edge.
std::array<double, 6> theta(const Vec3& Pa, const Vec3& Pb);

}  // namespace nrsfm
