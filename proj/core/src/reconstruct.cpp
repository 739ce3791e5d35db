#include "nrsfm/reconstruct.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>

#include <Eigen/Eigenvalues>

#include "nrsfm/conic/epigraph.hpp"
#include "nrsfm/error.hpp"
#include "nrsfm/lifting.hpp"

namespace nrsfm {

using conic::AffineExpr;
using conic::ConicProgram;
using conic::entry;
using conic::scalar;

namespace {

constexpr std::array<std::pair<Method, const char*>, 7> kMethodNames{{
    {Method::snr_dsl, "snr-dsl"},
    {Method::snr_pp, "snr-pp"},
    {Method::qnr_dsl, "qnr-dsl"},
    {Method::qnr_pp, "qnr-pp"},
    {Method::hnr_dsl, "hnr-dsl"},
    {Method::hnr_pp, "hnr-pp"},
    {Method::hnr_pp_accel, "hnr-pp-accel"},
}};

LinearFunctional trace(int block, int from, int to) {
  LinearFunctional f;
  for (int k = from; k < to; ++k) f.add(k, k, 1.0);
  return f.bound(block);
}

// Edges (j,q), (q,r), (j,r) of a sorted triangle.
std::array<Edge, 3> triangle_edges(const Triangle& t) {
  return {Edge{t[0], t[1]}, Edge{t[1], t[2]}, Edge{t[0], t[2]}};
}

class Assembler {
 public:
  Assembler(const ObservationSet& obs, const SimplicialGraph& graph, Method method)
      : obs_(obs) {
    obs.validate();
    graph.validate();
    if (graph.m != obs.m) throw InvalidArgument("graph and observations disagree on m");
    if (graph.e2.empty()) throw StructuralError("graph has no edges");
    L.method = method;
    L.n = obs.n;
    L.m = obs.m;
    L.graph = graph;
    L.maps = build_lift_maps(graph);
    L.gram.assign(obs.n, -1);

    if (is_dsl(method) && !obs.fully_visible()) {
      throw IncompatibleData(to_string(method) +
                             " needs every point visible in every image; use a PP method "
                             "with correspondence completion");
    }
    if (is_hnr(method) && graph.e3.empty()) {
      throw IncompatibleData("graph has no triangles; use a QNR method instead");
    }

    L.g2 = prog.add_free(graph.p1(), "G2");
    AffineExpr total;
    for (int e = 0; e < graph.p1(); ++e) total.push_back(scalar(L.g2, e));
    prog.add_equality(std::move(total), 1.0, "scale");
    if (is_hnr(method)) L.g3 = prog.add_free(graph.p2(), "G3");
  }

  void objective(const std::string& part, const LinearFunctional& f) {
    prog.add_objective(f);
    part_expr(part).push_back(f);
  }

  void inverse(const std::string& part, const LinearFunctional& x) {
    const int w = conic::add_inverse_epigraph(prog, x, 1.0, part);
    part_expr(part).push_back(entry(w, 0, 0));
  }

  void coupling(const std::string& part, const LinearFunctional& g, LinearFunctional target,
                bool strict, double weight) {
    target *= -1.0;
    AffineExpr diff{g, target};
    if (strict) {
      prog.add_equality(std::move(diff), 0.0, part);
      return;
    }
    const int s = conic::add_abs_epigraph(prog, diff, weight, part);
    part_expr(part).push_back(scalar(s, 0, weight));
    part_expr(part).push_back(scalar(s, 1, weight));
  }

  void isometry(int i, int block, bool strict, double lambda_I) {
    for (int e = 0; e < L.graph.p1(); ++e) {
      const auto [j, q] = L.graph.e2[e];
      const LinearFunctional g =
          is_dsl(L.method)
              ? g_I_dsl(j, q, obs_.sightline(i, j).dot(obs_.sightline(i, q))).bound(block)
              : g_I_pp(j, q).bound(block);
      coupling("isometry", g, scalar(L.g2, e), strict, lambda_I);
    }
  }

  // Reprojection and depth terms of a position Gram block.
  void position_terms(int i, int block, int completion) {
    if (L.pseudo.empty()) L.pseudo = pseudo_neighbours(obs_, std::max(completion, 1));
    prog.add_equality({entry(block, 0, 0)}, 1.0, "corner");
    for (int j = 0; j < L.m; ++j) {
      LinearFunctional mdh;
      if (obs_.visible(i, j)) {
        objective("reprojection", f_reproj(j, obs_.sightline(i, j)).bound(block));
        mdh = f_mdh_pp(j, obs_.sightline(i, j));
      } else {
        if (completion <= 0) {
          throw IncompatibleData("hidden points need correspondence completion");
        }
        std::vector<Vec3> dirs;
        for (int l : L.pseudo[obs_.index(i, j)]) dirs.push_back(obs_.sightline(i, l));
        mdh = f_mdh_completion(j, dirs);
      }
      mdh *= -1.0;
      objective("depth", mdh.bound(block));
    }
  }

  void area_terms(int i, int block, double lambda_E) {
    for (int k = 0; k < L.graph.p2(); ++k) {
      const Triangle& t = L.graph.e3[k];
      LinearFunctional g;
      if (is_dsl(L.method)) {
        const auto coeffs = area_quartic_coeffs(obs_.sightline(i, t[0]), obs_.sightline(i, t[1]),
                                                obs_.sightline(i, t[2]));
        g = g_E_dsl(t, coeffs, L.maps);
      } else {
        g = g_E_pp(t, L.maps);
      }
      coupling("area", g.bound(block), scalar(L.g3, k), false, lambda_E);
    }
  }

  void dominance(int block, const std::vector<DominancePair>& pairs) {
    for (const auto& p : pairs) {
      conic::add_square_dominance(prog, entry(block, p.row, p.col), entry(block, p.diag, p.diag),
                                  "dominance");
    }
  }

  BuiltProgram finish() {
    prog.compress_objective();
    prog.validate();
    return {std::move(prog), std::move(L)};
  }

  ConicProgram prog;
  ProgramLayout L;

 private:
  AffineExpr& part_expr(const std::string& name) {
    for (auto& [n, e] : L.objective_parts) {
      if (n == name) return e;
    }
    L.objective_parts.emplace_back(name, AffineExpr{});
    return L.objective_parts.back().second;
  }

  const ObservationSet& obs_;
};

BuiltProgram build_dsl(const ObservationSet& obs, const SimplicialGraph& graph, Method method,
                       double lambda_I) {
  Assembler a(obs, graph, method);
  for (int i = 0; i < obs.n; ++i) {
    const int R = a.prog.add_psd(obs.m, "R" + std::to_string(i));
    a.L.gram[i] = R;
    a.objective("trace", trace(R, 0, obs.m));
    for (int j = 0; j < obs.m; ++j) a.inverse("inverse_depth", entry(R, j, j));
    a.isometry(i, R, method == Method::snr_dsl, lambda_I);
  }
  return a.finish();
}

BuiltProgram build_pp(const ObservationSet& obs, const SimplicialGraph& graph, Method method,
                      double lambda_I, int completion) {
  Assembler a(obs, graph, method);
  for (int i = 0; i < obs.n; ++i) {
    const int S = a.prog.add_psd(3 * obs.m + 1, "S" + std::to_string(i));
    a.L.gram[i] = S;
    a.objective("trace", trace(S, 0, 3 * obs.m + 1));
    a.position_terms(i, S, completion);
    a.isometry(i, S, method == Method::snr_pp, lambda_I);
  }
  return a.finish();
}

void check_weights(double lambda_I, double lambda_E) {
  if (!(lambda_I > 0.0)) throw InvalidArgument("lambda_I must be positive");
  if (!(lambda_E >= 0.0)) throw InvalidArgument("lambda_E must be nonnegative");
}

}  // namespace

std::string to_string(Method m) {
  for (const auto& [k, name] : kMethodNames) {
    if (k == m) return name;
  }
  return "unknown";
}

Method method_from_string(const std::string& s) {
  std::string t = s;
  std::replace(t.begin(), t.end(), '_', '-');
  std::transform(t.begin(), t.end(), t.begin(), [](unsigned char c) { return std::tolower(c); });
  for (const auto& [k, name] : kMethodNames) {
    if (t == name) return k;
  }
  throw InvalidArgument("unknown method '" + s + "'");
}

const std::vector<Method>& all_methods() {
  static const std::vector<Method> methods = [] {
    std::vector<Method> v;
    for (const auto& [k, name] : kMethodNames) v.push_back(k);
    return v;
  }();
  return methods;
}

void ReconstructionConfig::validate() const {
  if (!is_strict(method) && !(lambda_I > 0.0)) {
    throw InvalidArgument("lambda_I must be positive for " + to_string(method));
  }
  if (!(lambda_E >= 0.0)) throw InvalidArgument("lambda_E must be nonnegative");
  if (knn < 1) throw InvalidArgument("knn must be at least 1");
  if (completion < 0) throw InvalidArgument("pseudo-neighbour count must be nonnegative");
  if (!(solver.tol > 0.0) || solver.max_iter < 1) throw InvalidArgument("invalid solver settings");
}

BuiltProgram build_snr_dsl(const ObservationSet& obs, const SimplicialGraph& graph) {
  return build_dsl(obs, graph, Method::snr_dsl, 1.0);
}

BuiltProgram build_qnr_dsl(const ObservationSet& obs, const SimplicialGraph& graph,
                           double lambda_I) {
  check_weights(lambda_I, 0.0);
  return build_dsl(obs, graph, Method::qnr_dsl, lambda_I);
}

BuiltProgram build_snr_pp(const ObservationSet& obs, const SimplicialGraph& graph,
                          int completion) {
  return build_pp(obs, graph, Method::snr_pp, 1.0, completion);
}

BuiltProgram build_qnr_pp(const ObservationSet& obs, const SimplicialGraph& graph,
                          double lambda_I, int completion) {
  check_weights(lambda_I, 0.0);
  return build_pp(obs, graph, Method::qnr_pp, lambda_I, completion);
}

BuiltProgram build_hnr_dsl(const ObservationSet& obs, const SimplicialGraph& graph,
                           double lambda_I, double lambda_E) {
  check_weights(lambda_I, lambda_E);
  Assembler a(obs, graph, Method::hnr_dsl);
  const auto pairs = consistency_constraints_T(graph, a.L.maps);
  for (int i = 0; i < obs.n; ++i) {
    const int T = a.prog.add_psd(a.L.maps.t_dim(), "T" + std::to_string(i));
    a.L.gram[i] = T;
    a.objective("trace", trace(T, 0, a.L.maps.t_dim()));
    for (int j = 0; j < obs.m; ++j) a.inverse("inverse_depth", entry(T, j, j));
    a.isometry(i, T, false, lambda_I);
    a.area_terms(i, T, lambda_E);
    a.dominance(T, pairs);
  }
  return a.finish();
}

BuiltProgram build_hnr_pp(const ObservationSet& obs, const SimplicialGraph& graph,
                          double lambda_I, double lambda_E, int completion) {
  check_weights(lambda_I, lambda_E);
  Assembler a(obs, graph, Method::hnr_pp);
  const auto pairs = consistency_constraints_U(graph, a.L.maps);
  for (int i = 0; i < obs.n; ++i) {
    const int U = a.prog.add_psd(a.L.maps.u_dim(), "U" + std::to_string(i));
    a.L.gram[i] = U;
    a.objective("trace", trace(U, 0, a.L.maps.u_dim()));
    a.position_terms(i, U, completion);
    a.isometry(i, U, false, lambda_I);
    a.area_terms(i, U, lambda_E);
    a.dominance(U, pairs);
  }
  return a.finish();
}

BuiltProgram build_hnr_pp_accel(const ObservationSet& obs, const SimplicialGraph& graph,
                                double lambda_I, double lambda_E, int completion) {
  check_weights(lambda_I, lambda_E);
  Assembler a(obs, graph, Method::hnr_pp_accel);
  const int m = obs.m;

  // First occurrence (triangle, position) of every lifted edge.
  std::vector<std::pair<int, int>> canonical(graph.p2_tilde(), {-1, -1});
  for (int k = 0; k < graph.p2(); ++k) {
    const auto edges = triangle_edges(graph.e3[k]);
    for (int p = 0; p < 3; ++p) {
      auto& c = canonical[a.L.maps.ordinal(edges[p].first, edges[p].second)];
      if (c.first < 0) c = {k, p};
    }
  }

  a.L.beta.assign(obs.n, {});
  for (int i = 0; i < obs.n; ++i) {
    const std::string tag = std::to_string(i);
    const int S = a.prog.add_psd(3 * m + 1, "S" + tag);
    a.L.gram[i] = S;
    auto& beta = a.L.beta[i];
    for (int k = 0; k < graph.p2(); ++k) {
      beta.push_back(a.prog.add_psd(18, "beta" + tag + "_" + std::to_string(k)));
    }

    a.objective("trace", trace(S, 0, 3 * m + 1));
    for (const auto& [k, p] : canonical) a.objective("trace", trace(beta[k], 6 * p, 6 * p + 6));

    for (int k = 0; k < graph.p2(); ++k) {
      const auto edges = triangle_edges(graph.e3[k]);
      for (int p = 0; p < 3; ++p) {
        const auto [ck, cp] = canonical[a.L.maps.ordinal(edges[p].first, edges[p].second)];
        if (ck == k && cp == p) continue;
        for (int r = 0; r < 6; ++r) {
          for (int c = r; c < 6; ++c) {
            a.prog.add_equality({entry(beta[k], 6 * p + r, 6 * p + c),
                                 entry(beta[ck], 6 * cp + r, 6 * cp + c, -1.0)},
                                0.0, "shared");
          }
        }
      }
    }

    a.position_terms(i, S, completion);
    a.isometry(i, S, false, lambda_I);

    for (int k = 0; k < graph.p2(); ++k) {
      a.coupling("area", area_from_products(0, 6, 12).bound(beta[k]), scalar(a.L.g3, k), false,
                 lambda_E);
    }

    for (const auto& [j, q] : graph.lifted) {
      const auto [ck, cp] = canonical[a.L.maps.ordinal(j, q)];
      for (int s = 0; s < 6; ++s) {
        const auto [ka, kb] = kThetaAxes[s];
        conic::add_square_dominance(a.prog, entry(S, coord_index(j, ka), coord_index(q, kb)),
                                    entry(beta[ck], 6 * cp + s, 6 * cp + s), "dominance");
      }
    }
  }
  return a.finish();
}

BuiltProgram build_program(const ObservationSet& obs, const SimplicialGraph& graph,
                           const ReconstructionConfig& cfg) {
  cfg.validate();
  switch (cfg.method) {
    case Method::snr_dsl: return build_snr_dsl(obs, graph);
    case Method::qnr_dsl: return build_qnr_dsl(obs, graph, cfg.lambda_I);
    case Method::snr_pp: return build_snr_pp(obs, graph, cfg.completion);
    case Method::qnr_pp: return build_qnr_pp(obs, graph, cfg.lambda_I, cfg.completion);
    case Method::hnr_dsl: return build_hnr_dsl(obs, graph, cfg.lambda_I, cfg.lambda_E);
    case Method::hnr_pp: return build_hnr_pp(obs, graph, cfg.lambda_I, cfg.lambda_E, cfg.completion);
    case Method::hnr_pp_accel:
      return build_hnr_pp_accel(obs, graph, cfg.lambda_I, cfg.lambda_E, cfg.completion);
  }
  throw InvalidArgument("unknown method");
}

std::vector<std::vector<int>> pseudo_neighbours(const ObservationSet& obs, int s) {
  if (s < 1) throw InvalidArgument("pseudo-neighbour count must be positive");
  std::vector<std::vector<int>> out(static_cast<std::size_t>(obs.n) * obs.m);
  for (int i = 0; i < obs.n; ++i) {
    for (int j = 0; j < obs.m; ++j) {
      if (obs.visible(i, j)) continue;
      std::vector<std::pair<double, int>> cand;
      for (int l = 0; l < obs.m; ++l) {
        if (l == j || !obs.visible(i, l)) continue;
        cand.emplace_back((obs.point(0, l) - obs.point(0, j)).squaredNorm(), l);
      }
      if (cand.empty()) throw IncompatibleData("image has no visible point to complete from");
      const std::size_t take = std::min<std::size_t>(s, cand.size());
      std::partial_sort(cand.begin(), cand.begin() + static_cast<long>(take), cand.end());
      auto& list = out[obs.index(i, j)];
      for (std::size_t k = 0; k < take; ++k) list.push_back(cand[k].second);
    }
  }
  return out;
}

std::vector<Eigen::MatrixXd> lift_ground_truth(const BuiltProgram& built,
                                               const std::vector<PointCloud>& gt) {
  const auto& L = built.layout;
  if (static_cast<int>(gt.size()) != L.n) throw InvalidArgument("frame count mismatch");
  for (const auto& P : gt) {
    if (static_cast<int>(P.size()) != L.m) throw InvalidArgument("point count mismatch");
  }
  const auto& graph = L.graph;

  double sum = 0.0;
  std::vector<double> g2(graph.p1(), 0.0);
  for (int e = 0; e < graph.p1(); ++e) {
    for (const auto& P : gt) g2[e] += dist_sq(P[graph.e2[e].first], P[graph.e2[e].second]);
    g2[e] /= L.n;
    sum += g2[e];
  }
  const double c = 1.0 / std::sqrt(sum);
  std::vector<PointCloud> clouds = gt;
  for (auto& P : clouds) {
    for (auto& p : P) p *= c;
  }

  auto x = built.program.zero_point();
  for (int e = 0; e < graph.p1(); ++e) x[L.g2](e, 0) = g2[e] / sum;
  if (L.g3 >= 0) {
    for (int k = 0; k < graph.p2(); ++k) {
      const auto& t = graph.e3[k];
      double a = 0.0;
      for (const auto& P : clouds) a += area_sq(P[t[0]], P[t[1]], P[t[2]]);
      x[L.g3](k, 0) = a / L.n;
    }
  }

  for (int i = 0; i < L.n; ++i) {
    const PointCloud& P = clouds[i];
    Eigen::VectorXd v;
    switch (L.method) {
      case Method::snr_dsl:
      case Method::qnr_dsl:
        v.resize(L.m);
        for (int j = 0; j < L.m; ++j) v(j) = P[j].norm();
        break;
      case Method::hnr_dsl: {
        std::vector<double> depths(L.m);
        for (int j = 0; j < L.m; ++j) depths[j] = P[j].norm();
        v = depth_lift_vector(depths, L.maps);
        break;
      }
      case Method::snr_pp:
      case Method::qnr_pp:
      case Method::hnr_pp_accel:
        v = augmented_position_vector(P);
        break;
      case Method::hnr_pp:
        v = position_lift_vector(P, L.maps);
        break;
    }
    x[L.gram[i]] = v * v.transpose();

    if (L.method == Method::hnr_pp_accel) {
      for (int k = 0; k < graph.p2(); ++k) {
        Eigen::VectorXd b(18);
        const auto edges = triangle_edges(graph.e3[k]);
        for (int p = 0; p < 3; ++p) {
          const auto th = theta(P[edges[p].first], P[edges[p].second]);
          for (int s = 0; s < 6; ++s) b(6 * p + s) = th[s];
        }
        x[L.beta[i][k]] = b * b.transpose();
      }
    }
  }
  built.program.complete_auxiliary(x);
  return x;
}

FeasibilityReport check_point(const ConicProgram& prog, const std::vector<Eigen::MatrixXd>& x) {
  return {prog.max_residual(x), prog.min_cone_margin(x), prog.objective_value(x)};
}

Reconstruction extract_points(const BuiltProgram& built, const conic::ConicSolution& sol,
                              const ObservationSet& obs) {
  if (!sol.optimal()) {
    throw SolverError(std::string("solver finished with status ") + conic::to_string(sol.status) +
                      (sol.message.empty() ? "" : ": " + sol.message));
  }
  const auto& L = built.layout;
  Reconstruction rec;
  rec.method = L.method;
  auto& diag = rec.diagnostics;
  diag.status = conic::to_string(sol.status);
  diag.iterations = sol.iterations;
  diag.objective = sol.objective;
  diag.residuals = sol.residuals;
  for (const auto& [name, expr] : L.objective_parts) {
    diag.objective_parts.emplace_back(name, built.program.evaluate(expr, sol.x));
  }

  for (int i = 0; i < L.n; ++i) {
    const Eigen::MatrixXd& G = sol.x[L.gram[i]];
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(G);
    BlockSpectrum spec;
    const auto& ev = es.eigenvalues();
    for (int k = static_cast<int>(ev.size()) - 1; k >= 0 && spec.top.size() < 5; --k) {
      spec.top.push_back(ev(k));
    }
    spec.ratio = spec.top.size() > 1 && spec.top[0] > 0.0 ? spec.top[1] / spec.top[0] : 0.0;
    diag.spectra.push_back(spec);

    PointCloud P(L.m);
    if (is_dsl(L.method)) {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ed(G.topLeftCorner(L.m, L.m));
      const int top = L.m - 1;
      Eigen::VectorXd depth = ed.eigenvectors().col(top) * std::sqrt(std::max(ed.eigenvalues()(top), 0.0));
      if (depth.sum() < 0.0) depth = -depth;
      for (int j = 0; j < L.m; ++j) {
        P[j] = depth(j) * obs.sightline(i, j);
        if (depth(j) < -1e-6) ++diag.negative_depths;
      }
    } else {
      for (int j = 0; j < L.m; ++j) {
        for (int k = 0; k < 3; ++k) P[j](k) = G(0, coord_index(j, k));
        if (P[j].z() < -1e-6) ++diag.negative_depths;
      }
    }
    rec.clouds.push_back(std::move(P));
  }

  const auto& g2 = sol.x[L.g2];
  rec.geodesics.assign(g2.data(), g2.data() + g2.size());
  if (L.g3 >= 0) {
    const auto& g3 = sol.x[L.g3];
    rec.areas.assign(g3.data(), g3.data() + g3.size());
  }
  return rec;
}

Reconstruction reconstruct(const ObservationSet& obs, const SimplicialGraph& graph,
                           const ReconstructionConfig& cfg, const conic::SolverBackend* backend) {
  const BuiltProgram built = build_program(obs, graph, cfg);
  const conic::ConicSolution sol =
      backend ? backend->solve(built.program, cfg.solver) : conic::solve(built.program, cfg.solver);
  return extract_points(built, sol, obs);
}

}  // namespace nrsfm
