#include "nrsfm/graph.hpp"

#include <algorithm>
#include <numeric>
#include <set>
#include <string>

#include "nrsfm/error.hpp"
#include "nrsfm/tolerances.hpp"

namespace nrsfm {

namespace {

Edge ordered(int a, int b) { return a < b ? Edge{a, b} : Edge{b, a}; }

std::vector<Edge> triangle_edges(const Triangle& t) {
  return {{t[0], t[1]}, {t[1], t[2]}, {t[0], t[2]}};
}

double reference_area(std::span<const Vec2> ref, const Triangle& t) {
  const Vec2 u = ref[t[1]] - ref[t[0]];
  const Vec2 v = ref[t[2]] - ref[t[0]];
  return 0.5 * std::abs(u.x() * v.y() - u.y() * v.x());
}

std::vector<Edge> unique_edges(const std::vector<Triangle>& tris) {
  std::set<Edge> edges;
  for (const auto& t : tris) {
    for (const auto& e : triangle_edges(t)) edges.insert(e);
  }
  return {edges.begin(), edges.end()};
}

// Triangles sharing an edge form one component and every vertex is covered.
bool well_connected(const std::vector<Triangle>& tris, int m) {
  if (tris.empty()) return false;
  std::vector<char> covered(m, 0);
  for (const auto& t : tris) {
    for (int v : t) covered[v] = 1;
  }
  if (std::find(covered.begin(), covered.end(), 0) != covered.end()) return false;

  std::map<Edge, std::vector<int>> by_edge;
  for (int k = 0; k < static_cast<int>(tris.size()); ++k) {
    for (const auto& e : triangle_edges(tris[k])) by_edge[e].push_back(k);
  }
  std::vector<char> seen(tris.size(), 0);
  std::vector<int> stack{0};
  seen[0] = 1;
  std::size_t reached = 1;
  while (!stack.empty()) {
    const int k = stack.back();
    stack.pop_back();
    for (const auto& e : triangle_edges(tris[k])) {
      for (int other : by_edge[e]) {
        if (!seen[other]) {
          seen[other] = 1;
          ++reached;
          stack.push_back(other);
        }
      }
    }
  }
  return reached == tris.size();
}

std::vector<Triangle> capped(const std::vector<Triangle>& ranked, int cap) {
  std::map<Edge, int> use;
  std::vector<Triangle> out;
  for (const auto& t : ranked) {
    const auto edges = triangle_edges(t);
    bool ok = true;
    for (const auto& e : edges) ok = ok && use[e] < cap;
    if (!ok) continue;
    for (const auto& e : edges) ++use[e];
    out.push_back(t);
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

int SimplicialGraph::edge_index(int j, int q) const {
  const Edge e = ordered(j, q);
  auto it = std::lower_bound(e2.begin(), e2.end(), e);
  if (it == e2.end() || *it != e) return -1;
  return static_cast<int>(it - e2.begin());
}

void SimplicialGraph::validate() const {
  if (!std::is_sorted(e2.begin(), e2.end()) ||
      std::adjacent_find(e2.begin(), e2.end()) != e2.end()) {
    throw StructuralError("edge list must be sorted and duplicate-free");
  }
  for (const auto& [a, b] : e2) {
    if (a < 0 || b >= m || a >= b) {
      throw StructuralError("edge (" + std::to_string(a) + ", " + std::to_string(b) +
                            ") is out of range or not ordered");
    }
  }
  if (!std::is_sorted(e3.begin(), e3.end()) ||
      std::adjacent_find(e3.begin(), e3.end()) != e3.end()) {
    throw StructuralError("triangle list must be sorted and duplicate-free");
  }
  for (const auto& t : e3) {
    if (!(t[0] < t[1] && t[1] < t[2]) || t[0] < 0 || t[2] >= m) {
      throw StructuralError("malformed triangle");
    }
    for (const auto& [a, b] : triangle_edges(t)) {
      if (!has_edge(a, b)) {
        throw StructuralError("triangle edge (" + std::to_string(a) + ", " +
                              std::to_string(b) + ") is missing from the edge set");
      }
    }
  }
  if (lifted != unique_edges(e3)) throw StructuralError("lifted edge list is stale");
}

std::vector<Edge> build_e2(std::span<const Vec2> reference, int k) {
  const int m = static_cast<int>(reference.size());
  if (k < 1) throw InvalidArgument("neighbour count must be at least 1");
  if (m <= k) throw InvalidArgument("need more points than neighbours per point");

  for (int a = 0; a < m; ++a) {
    for (int b = a + 1; b < m; ++b) {
      if ((reference[a] - reference[b]).norm() <= Tolerances::kDuplicatePoint) {
        throw InvalidArgument("reference points " + std::to_string(a) + " and " +
                              std::to_string(b) + " coincide");
      }
    }
  }

  std::set<Edge> edges;
  std::vector<int> idx(m);
  for (int a = 0; a < m; ++a) {
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](int u, int v) {
      return (reference[u] - reference[a]).squaredNorm() <
             (reference[v] - reference[a]).squaredNorm();
    });
    int taken = 0;
    for (int v : idx) {
      if (v == a) continue;
      edges.insert(ordered(a, v));
      if (++taken == k) break;
    }
  }
  return {edges.begin(), edges.end()};
}

std::vector<Triangle> build_e3(const std::vector<Edge>& e2, int m) {
  std::vector<std::vector<char>> adj(m, std::vector<char>(m, 0));
  for (const auto& [a, b] : e2) adj[a][b] = adj[b][a] = 1;
  std::vector<Triangle> tris;
  for (const auto& [j, q] : e2) {
    for (int r = q + 1; r < m; ++r) {
      if (adj[j][r] && adj[q][r]) tris.push_back({j, q, r});
    }
  }
  std::sort(tris.begin(), tris.end());
  return tris;
}

SimplicialGraph make_graph(int m, std::vector<Edge> e2, const E3Options& opts,
                           std::span<const Vec2> reference) {
  for (auto& e : e2) e = ordered(e.first, e.second);
  std::sort(e2.begin(), e2.end());
  e2.erase(std::unique(e2.begin(), e2.end()), e2.end());

  SimplicialGraph g;
  g.m = m;
  g.e2 = std::move(e2);
  auto tris = build_e3(g.e2, m);

  std::vector<double> area(tris.size(), 1.0);
  if (!reference.empty()) {
    if (static_cast<int>(reference.size()) != m) {
      throw InvalidArgument("reference positions do not match vertex count");
    }
    std::vector<Triangle> kept;
    for (const auto& t : tris) {
      if (reference_area(reference, t) > Tolerances::kDegenerateArea) kept.push_back(t);
    }
    tris = std::move(kept);
    area.resize(tris.size());
    for (std::size_t k = 0; k < tris.size(); ++k) area[k] = reference_area(reference, tris[k]);
  }

  std::vector<int> order(tris.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return area[a] > area[b]; });
  std::vector<Triangle> ranked;
  for (int k : order) ranked.push_back(tris[k]);

  switch (opts.mode) {
    case E3Mode::all:
      g.e3 = tris;
      break;
    case E3Mode::per_edge_cap:
      if (opts.cap < 1) throw InvalidArgument("triangle cap per edge must be positive");
      g.e3 = capped(ranked, opts.cap);
      break;
    case E3Mode::adaptive: {
      g.e3 = tris;
      for (int cap = 1; cap < static_cast<int>(tris.size()); ++cap) {
        auto sel = capped(ranked, cap);
        if (well_connected(sel, m)) {
          g.e3 = std::move(sel);
          break;
        }
      }
      break;
    }
  }
  std::sort(g.e3.begin(), g.e3.end());
  g.lifted = unique_edges(g.e3);
  return g;
}

SimplicialGraph build_graph(const ObservationSet& obs, int k, const E3Options& opts) {
  std::vector<Vec2> ref(obs.m);
  for (int j = 0; j < obs.m; ++j) ref[j] = obs.point(0, j).head<2>();
  return make_graph(obs.m, build_e2(ref, k), opts, ref);
}

int LiftIndexMaps::ordinal(int j, int q) const {
  auto it = order.find(ordered(j, q));
  if (it == order.end()) {
    throw StructuralError("edge (" + std::to_string(j) + ", " + std::to_string(q) +
                          ") has no lift slot");
  }
  return it->second;
}

std::array<int, 3> LiftIndexMaps::omega(const Triangle& t) const {
  return {edge_slot(t[0], t[1]), edge_slot(t[1], t[2]), edge_slot(t[0], t[2])};
}

std::array<int, 18> LiftIndexMaps::rho(const Triangle& t) const {
  const std::array<int, 3> base{theta_slot(t[0], t[1]), theta_slot(t[1], t[2]),
                                theta_slot(t[0], t[2])};
  std::array<int, 18> out{};
  for (int b = 0; b < 3; ++b) {
    for (int s = 0; s < 6; ++s) out[6 * b + s] = base[b] + s;
  }
  return out;
}

LiftIndexMaps build_lift_maps(const SimplicialGraph& graph) {
  graph.validate();
  LiftIndexMaps maps;
  maps.m = graph.m;
  maps.lifted = graph.lifted;
  for (int k = 0; k < static_cast<int>(graph.lifted.size()); ++k) {
    maps.order[graph.lifted[k]] = k;
  }
  return maps;
}

}  // namespace nrsfm
