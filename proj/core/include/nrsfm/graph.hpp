#pragma once

#include <array>
#include <map>
#include <span>
#include <utility>
#include <vector>

#include "nrsfm/geometry.hpp"

namespace nrsfm {

/// Undirected edge stored with first < second (0-based vertex indices).
using Edge = std::pair<int, int>;
/// Triangle (j, q, r) with j < q < r.
using Triangle = std::array<int, 3>;

enum class E3Mode { all, per_edge_cap, adaptive };

struct E3Options {
  E3Mode mode = E3Mode::all;
  int cap = 2;  // triangles per edge for per_edge_cap
};

struct SimplicialGraph {
  int m = 0;
  std::vector<Edge> e2;      // sorted
  std::vector<Triangle> e3;  // sorted
  std::vector<Edge> lifted;  // unique edges of e3, sorted

  int p1() const { return static_cast<int>(e2.size()); }
  int p2() const { return static_cast<int>(e3.size()); }
  int p2_tilde() const { return static_cast<int>(lifted.size()); }

  int edge_index(int j, int q) const;  // position in e2 or -1
  bool has_edge(int j, int q) const { return edge_index(j, q) >= 0; }

  /// Throws StructuralError when a triangle edge is missing from e2,
  /// indices are out of range or entries are duplicated.
  void validate() const;
};

/// Symmetric k-nearest-neighbour edges on 2D reference positions.
/// Ties are broken by the lower vertex index.
std::vector<Edge> build_e2(std::span<const Vec2> reference, int k);

/// All triangles closed under `e2`.
std::vector<Triangle> build_e3(const std::vector<Edge>& e2, int m);

/// Graph from explicit edges; triangles chosen according to `opts`.
/// When `reference` is non-empty, triangles with (near) zero reference area
/// are dropped and reference areas rank triangles for capped modes.
SimplicialGraph make_graph(int m, std::vector<Edge> e2, const E3Options& opts = {},
                           std::span<const Vec2> reference = {});

/// kNN graph on the reference image of `obs` (normalised coordinates).
SimplicialGraph build_graph(const ObservationSet& obs, int k, const E3Options& opts = {});

/// Slot bookkeeping for the lifted Gram matrices.
///
/// The depth lift lists the m depths followed by one product per lifted
/// edge; the position lift lists 1, the 3m coordinates, then six products
/// per lifted edge. All indices are 0-based matrix indices.
struct LiftIndexMaps {
  int m = 0;
  std::vector<Edge> lifted;
  std::map<Edge, int> order;  // lifted edge -> ordinal

  int t_dim() const { return m + static_cast<int>(lifted.size()); }
  int u_dim() const { return 3 * m + 1 + 6 * static_cast<int>(lifted.size()); }

  int ordinal(int j, int q) const;    // throws StructuralError if absent
  int edge_slot(int j, int q) const { return m + ordinal(j, q); }
  int theta_slot(int j, int q) const { return 3 * m + 1 + 6 * ordinal(j, q); }

  /// Slots of the products for edges (j,q), (q,r), (j,r).
  std::array<int, 3> omega(const Triangle& t) const;
  /// The three product blocks of a triangle in the order (j,q), (q,r), (j,r).
  std::array<int, 18> rho(const Triangle& t) const;
};

LiftIndexMaps build_lift_maps(const SimplicialGraph& graph);

/// Coordinate offsets (a, b) of the six products X_a Y_b, X_a Z_b, Y_a X_b,
/// Y_a Z_b, Z_a X_b, Z_a Y_b.
inline constexpr std::array<std::pair<int, int>, 6> kThetaAxes{
    {{0, 1}, {0, 2}, {1, 0}, {1, 2}, {2, 0}, {2, 1}}};

/// Index of coordinate k of point j inside the augmented position Gram.
inline int coord_index(int j, int k) { return 1 + 3 * j + k; }

}  // namespace nrsfm
