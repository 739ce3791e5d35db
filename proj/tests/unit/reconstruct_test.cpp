#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <map>

#include <Eigen/Geometry>

#include "nrsfm/conic/backend.hpp"
#include "nrsfm/error.hpp"
#include "nrsfm/eval.hpp"
#include "nrsfm/lifting.hpp"
#include "nrsfm/reconstruct.hpp"
#include "nrsfm/synth.hpp"
#include "oracles.hpp"

using namespace nrsfm;
using nrsfm::testing::Sampler;

namespace {

GeneratorConfig iso(int ma, int mb, int n, std::uint64_t seed) {
  GeneratorConfig c;
  c.m_a = ma;
  c.m_b = mb;
  c.n = n;
  c.seed = seed;
  return c;
}

ObservationSet observe(const std::vector<PointCloud>& clouds) {
  const int n = static_cast<int>(clouds.size());
  const int m = static_cast<int>(clouds[0].size());
  std::vector<Vec3> pts;
  for (const auto& X : clouds)
    for (const auto& P : X) pts.push_back(P / P.z());
  return ObservationSet::from_normalized(n, m, pts, std::vector<std::uint8_t>(n * m, 1));
}

int count_blocks(const conic::ConicProgram& p, const std::string& label) {
  return static_cast<int>(std::count_if(p.blocks().begin(), p.blocks().end(),
                                        [&](const auto& b) { return b.label == label; }));
}

int count_rows(const conic::ConicProgram& p, const std::string& label) {
  return static_cast<int>(std::count_if(p.constraints().begin(), p.constraints().end(),
                                        [&](const auto& c) { return c.label == label; }));
}

// Largest s0 + s1 over the absolute-value epigraphs with the given label.
double max_slack(const conic::ConicProgram& p, const conic::ConicSolution& sol,
                 const std::string& label) {
  double worst = 0.0;
  for (int b = 0; b < p.num_blocks(); ++b) {
    const auto& blk = p.blocks()[b];
    if (blk.label == label && blk.kind == conic::ConeKind::nonneg) {
      worst = std::max(worst, sol.x[b](0, 0) + sol.x[b](1, 0));
    }
  }
  return worst;
}

double pct_error(const SyntheticScene& s, const Reconstruction& r) {
  const auto e = evaluate(r.clouds, s.gt_clouds);
  return 100.0 * e.rms / e.diameter;
}

// Three images of one triangle related by area-preserving shears and rigid motions.
std::vector<PointCloud> equiareal_triangles() {
  const PointCloud base{{-0.3, -0.2, 0.0}, {0.35, -0.1, 0.0}, {0.0, 0.3, 0.0}};
  const double shear[3] = {0.0, 0.4, -0.3};
  const double tilt[3] = {0.1, -0.3, 0.25};
  std::vector<PointCloud> out;
  for (int i = 0; i < 3; ++i) {
    const Eigen::Matrix3d R =
        Eigen::AngleAxisd(tilt[i], Vec3(1, 0.5, 0).normalized()).toRotationMatrix();
    PointCloud X;
    for (const auto& p : base) {
      const Vec3 q(p.x() + shear[i] * p.y(), p.y(), 0.0);
      X.push_back(R * q + Vec3(0.05 * i, -0.02 * i, 1.0 + 0.1 * i));
    }
    out.push_back(X);
  }
  return out;
}

}  // namespace

TEST(Method, NamesRoundTrip) {
  for (Method m : all_methods()) EXPECT_EQ(method_from_string(to_string(m)), m);
  EXPECT_EQ(method_from_string("HNR_PP_ACCEL"), Method::hnr_pp_accel);
  EXPECT_THROW(method_from_string("lsq"), InvalidArgument);
  EXPECT_EQ(all_methods().size(), 7u);
}

TEST(Config, Validation) {
  ReconstructionConfig c;
  EXPECT_NO_THROW(c.validate());
  c.lambda_I = 0.0;
  EXPECT_THROW(c.validate(), InvalidArgument);
  c.method = Method::snr_pp;
  EXPECT_NO_THROW(c.validate());
  c = {};
  c.lambda_E = -1.0;
  EXPECT_THROW(c.validate(), InvalidArgument);
  c = {};
  c.completion = -2;
  EXPECT_THROW(c.validate(), InvalidArgument);
}

TEST(SnrDsl, OneEdgeProgramCounts) {
  const auto obs = observe({{{0.1, 0.0, 1.0}, {-0.2, 0.1, 1.2}}});
  const auto g = make_graph(2, {{0, 1}});
  const auto built = build_snr_dsl(obs, g);
  const auto& p = built.program;
  EXPECT_EQ(count_blocks(p, "R0"), 1);
  EXPECT_EQ(p.blocks()[built.layout.gram[0]].dim, 2);
  EXPECT_EQ(count_blocks(p, "inverse_depth"), 2);
  EXPECT_EQ(count_rows(p, "isometry"), 1);
  EXPECT_EQ(count_rows(p, "scale"), 1);
  int psd = 0;
  for (const auto& b : p.blocks()) psd += b.kind == conic::ConeKind::psd && b.label == "R0";
  EXPECT_EQ(psd, 1);
}

TEST(SnrDsl, HiddenPointsAreIncompatible) {
  auto c = iso(3, 3, 3, 1);
  c.hidden_fraction = 0.2;
  const auto s = generate_isometric(c);
  EXPECT_THROW(build_snr_dsl(s.observations, s.graph), IncompatibleData);
  EXPECT_THROW(build_qnr_dsl(s.observations, s.graph, 100.0), IncompatibleData);
  EXPECT_THROW(build_hnr_dsl(s.observations, s.graph, 100.0, 10.0), IncompatibleData);
  EXPECT_THROW(build_qnr_pp(s.observations, s.graph, 100.0, 0), IncompatibleData);
  EXPECT_NO_THROW(build_qnr_pp(s.observations, s.graph, 100.0, 3));
}

TEST(SnrDsl, NoiselessRigidSceneAccuracy) {
  auto c = iso(4, 4, 3, 0);
  c.flat = true;
  const auto s = generate_isometric(c);
  ReconstructionConfig rc;
  rc.method = Method::snr_dsl;
  const auto r = reconstruct(s.observations, s.graph, rc);
  EXPECT_LE(pct_error(s, r), 1.0);
}

TEST(SnrDsl, GeodesicsSumToOne) {
  const auto s = generate_isometric(iso(3, 3, 3, 2));
  ReconstructionConfig rc;
  rc.method = Method::snr_dsl;
  const auto r = reconstruct(s.observations, s.graph, rc);
  double sum = 0.0;
  for (double g : r.geodesics) {
    EXPECT_GE(g, -1e-8);
    sum += g;
  }
  EXPECT_NEAR(sum, 1.0, 1e-6);
}

TEST(QnrDsl, RejectsZeroWeight) {
  const auto s = generate_isometric(iso(3, 3, 2, 3));
  EXPECT_THROW(build_qnr_dsl(s.observations, s.graph, 0.0), InvalidArgument);
  EXPECT_THROW(build_qnr_pp(s.observations, s.graph, -1.0), InvalidArgument);
  EXPECT_THROW(build_hnr_dsl(s.observations, s.graph, 10.0, -1.0), InvalidArgument);
}

TEST(QnrDsl, ObjectiveApproachesStrictVariant) {
  const auto s = generate_isometric(iso(3, 3, 3, 4));
  const auto strict = conic::solve(build_snr_dsl(s.observations, s.graph).program);
  ASSERT_TRUE(strict.optimal());
  std::vector<double> gaps;
  for (double lam : {10.0, 100.0, 1000.0}) {
    const auto sol = conic::solve(build_qnr_dsl(s.observations, s.graph, lam).program);
    ASSERT_TRUE(sol.optimal());
    gaps.push_back(strict.objective - sol.objective);
  }
  EXPECT_GE(gaps[0], -1e-6);
  EXPECT_LE(gaps[1], gaps[0] + 1e-6);
  EXPECT_LE(gaps[2], gaps[1] + 1e-6);
  EXPECT_LE(std::abs(gaps[2]), 1e-4 * std::abs(strict.objective) + 1e-6);
}

TEST(QnrDsl, NoiselessSlacksVanish) {
  const auto s = generate_isometric(iso(3, 3, 3, 5));
  const auto built = build_qnr_dsl(s.observations, s.graph, 100.0);
  const auto sol = conic::solve(built.program);
  ASSERT_TRUE(sol.optimal());
  EXPECT_LE(max_slack(built.program, sol, "isometry"), 1e-4);
}

TEST(SnrPp, CornerIsPinned) {
  const auto s = generate_isometric(iso(3, 3, 3, 6));
  const auto built = build_snr_pp(s.observations, s.graph);
  EXPECT_EQ(count_rows(built.program, "corner"), 3);
  EXPECT_EQ(built.program.blocks()[built.layout.gram[0]].dim, 28);
  const auto sol = conic::solve(built.program);
  ASSERT_TRUE(sol.optimal());
  for (int b : built.layout.gram) EXPECT_NEAR(sol.x[b](0, 0), 1.0, 1e-7);
}

TEST(SnrPp, NoiselessReprojection) {
  auto c = iso(4, 4, 3, 0);
  c.flat = true;
  const auto s = generate_isometric(c);
  ReconstructionConfig rc;
  rc.method = Method::snr_pp;
  const auto r = reconstruct(s.observations, s.graph, rc);
  double worst = 0.0;
  for (int i = 0; i < s.config.n; ++i) {
    for (int j = 0; j < s.config.m(); ++j) {
      const Vec3& P = r.clouds[i][j];
      const Vec3& d = s.observations.sightline(i, j);
      worst = std::max(worst, P.squaredNorm() - P.dot(d) * P.dot(d));
    }
  }
  EXPECT_LE(worst, 1e-6);
}

TEST(QnrPp, CompletionKeepsHiddenPointsClose) {
  double ratio = 0.0;
  const int seeds = 5;
  for (int seed = 0; seed < seeds; ++seed) {
    auto c = iso(4, 4, 4, seed);
    c.hidden_fraction = 0.2;
    const auto s = generate_isometric(c);
    ReconstructionConfig rc;
    rc.method = Method::qnr_pp;
    rc.completion = 3;
    const auto r = reconstruct(s.observations, s.graph, rc);
    for (const auto& X : r.clouds)
      for (const auto& P : X) ASSERT_TRUE(P.allFinite());
    PointMask hidden = s.visibility;
    for (auto& v : hidden) v = !v;
    const double sc = align_scale(r.clouds, s.gt_clouds);
    ratio += rms_med(r.clouds, s.gt_clouds, sc, hidden).first /
             rms_med(r.clouds, s.gt_clouds, sc, s.visibility).first;
  }
  EXPECT_LE(ratio / seeds, 3.0);
}

TEST(PseudoNeighbours, NearestVisibleInReferenceImage) {
  std::vector<Vec3> pts;
  const double xs[5] = {0.0, 0.1, 0.25, 0.6, 0.7};
  for (int i = 0; i < 2; ++i)
    for (double x : xs) pts.emplace_back(x, 0.0, 1.0);
  std::vector<std::uint8_t> vis(10, 1);
  vis[5 + 2] = 0;
  vis[5 + 3] = 0;
  const auto obs = ObservationSet::from_normalized(2, 5, pts, vis);
  const auto nb = pseudo_neighbours(obs, 2);
  EXPECT_TRUE(nb[obs.index(0, 2)].empty());
  EXPECT_EQ(nb[obs.index(1, 2)], (std::vector<int>{1, 0}));
  EXPECT_EQ(nb[obs.index(1, 3)], (std::vector<int>{4, 1}));
  EXPECT_THROW(pseudo_neighbours(obs, 0), InvalidArgument);
}

TEST(HnrDsl, OneTriangleAreaSlacks) {
  const auto clouds = equiareal_triangles();
  const auto obs = observe(clouds);
  const auto g = make_graph(3, {{0, 1}, {0, 2}, {1, 2}});
  ASSERT_EQ(g.p2(), 1);
  const auto built = build_hnr_dsl(obs, g, 100.0, 10.0);
  const auto sol = conic::solve(built.program);
  ASSERT_TRUE(sol.optimal());
  EXPECT_LE(max_slack(built.program, sol, "area"), 1e-4);
}

TEST(HnrDsl, ZeroAreaWeightMatchesQnr) {
  const auto s = generate_isometric(iso(3, 3, 3, 7));
  const auto h = build_hnr_dsl(s.observations, s.graph, 100.0, 0.0);
  const auto q = build_qnr_dsl(s.observations, s.graph, 100.0);
  const auto hs = conic::solve(h.program);
  const auto qs = conic::solve(q.program);
  ASSERT_TRUE(hs.optimal());
  ASSERT_TRUE(qs.optimal());
  double lift_trace = 0.0;
  for (int b : h.layout.gram) {
    for (int k = s.config.m(); k < h.layout.maps.t_dim(); ++k) lift_trace += hs.x[b](k, k);
  }
  EXPECT_LE(std::abs(hs.objective - lift_trace - qs.objective), 1e-5);
}

TEST(HnrDsl, DominanceCountIsLiftedEdges) {
  const auto s = generate_isometric(iso(3, 3, 2, 8));
  const auto built = build_hnr_dsl(s.observations, s.graph, 100.0, 10.0);
  const int pt = s.graph.p2_tilde();
  ASSERT_GT(pt, 0);
  EXPECT_EQ(count_blocks(built.program, "dominance"), 2 * pt);
  EXPECT_EQ(built.program.blocks()[built.layout.gram[0]].dim, 9 + pt);
  EXPECT_EQ(count_blocks(built.program, "area"), 2 * s.graph.p2());
}

TEST(HnrDsl, NoTrianglesIsIncompatible) {
  const auto obs = observe({{{0.1, 0.0, 1.0}, {-0.2, 0.1, 1.2}, {0.0, 0.3, 1.1}}});
  const auto g = make_graph(3, {{0, 1}, {1, 2}});
  EXPECT_THROW(build_hnr_dsl(obs, g, 100.0, 10.0), IncompatibleData);
  EXPECT_THROW(build_hnr_pp(obs, g, 100.0, 10.0), IncompatibleData);
  EXPECT_THROW(build_hnr_pp_accel(obs, g, 100.0, 10.0), IncompatibleData);
}

TEST(HnrPp, BlockDimension) {
  const auto obs = observe(equiareal_triangles());
  const auto g = make_graph(3, {{0, 1}, {0, 2}, {1, 2}});
  const auto built = build_hnr_pp(obs, g, 100.0, 10.0);
  EXPECT_EQ(built.program.blocks()[built.layout.gram[0]].dim, 28);
  EXPECT_EQ(count_blocks(built.program, "dominance"), 3 * 6 * 3);

  const auto s = generate_isometric(iso(3, 3, 2, 9));
  const auto big = build_hnr_pp(s.observations, s.graph, 100.0, 10.0);
  EXPECT_EQ(big.program.blocks()[big.layout.gram[1]].dim, 3 * 9 + 1 + 6 * s.graph.p2_tilde());
}

TEST(HnrPpAccel, BlockInventory) {
  const auto obs = observe({{{0, 0, 1}, {0.3, 0, 1.1}, {0, 0.3, 0.9}, {0.3, 0.3, 1.0}}});
  const auto g = make_graph(4, {{0, 1}, {0, 2}, {1, 2}, {1, 3}, {2, 3}});
  ASSERT_EQ(g.p2(), 2);
  const auto built = build_hnr_pp_accel(obs, g, 100.0, 10.0);
  const auto& p = built.program;
  EXPECT_EQ(p.blocks()[built.layout.gram[0]].dim, 13);
  ASSERT_EQ(built.layout.beta[0].size(), 2u);
  for (int b : built.layout.beta[0]) {
    EXPECT_EQ(p.blocks()[b].dim, 18);
    EXPECT_EQ(p.blocks()[b].kind, conic::ConeKind::psd);
  }
  int big = 0;
  for (const auto& b : p.blocks()) big += b.kind == conic::ConeKind::psd && b.dim > 2;
  EXPECT_EQ(big, 3);
  EXPECT_EQ(count_rows(p, "shared"), 21);

  const auto sol = conic::solve(p);
  ASSERT_TRUE(sol.optimal());
  // Edge (1,2) sits at position 1 of the first triangle and position 0 of the second.
  const auto& b0 = sol.x[built.layout.beta[0][0]];
  const auto& b1 = sol.x[built.layout.beta[0][1]];
  EXPECT_LE((b0.block(6, 6, 6, 6) - b1.block(0, 0, 6, 6)).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(GroundTruth, LiftIsFeasibleForEveryMethod) {
  const auto s = generate_isometric(iso(3, 3, 3, 10));
  for (Method m : all_methods()) {
    ReconstructionConfig rc;
    rc.method = m;
    const auto built = build_program(s.observations, s.graph, rc);
    const auto x = lift_ground_truth(built, s.gt_clouds);
    const auto rep = check_point(built.program, x);
    EXPECT_LE(rep.max_residual, 1e-8) << to_string(m);
    EXPECT_GE(rep.min_cone_margin, -1e-8) << to_string(m);
  }
}

TEST(GroundTruth, LiftShapeChecks) {
  const auto s = generate_isometric(iso(3, 3, 2, 11));
  const auto built = build_snr_dsl(s.observations, s.graph);
  EXPECT_THROW(lift_ground_truth(built, {s.gt_clouds[0]}), InvalidArgument);
}

TEST(Extract, DepthsFromRankOneDsl) {
  const PointCloud X{{0.1, 0.0, 1.0}, {-0.2, 0.1, 2.0}, {0.0, 0.3, 3.0}};
  const auto obs = observe({X});
  const auto g = make_graph(3, {{0, 1}, {0, 2}, {1, 2}});
  const auto built = build_snr_dsl(obs, g);
  conic::ConicSolution sol;
  sol.status = conic::SolveStatus::optimal;
  sol.x = built.program.zero_point();
  const Eigen::Vector3d depth(1.0, 2.0, 3.0);
  sol.x[built.layout.gram[0]] = depth * depth.transpose();
  const auto rec = extract_points(built, sol, obs);
  for (int j = 0; j < 3; ++j) {
    EXPECT_NEAR(rec.clouds[0][j].norm(), depth(j), 1e-12);
    EXPECT_NEAR(rec.clouds[0][j].normalized().dot(obs.sightline(0, j)), 1.0, 1e-12);
  }
  EXPECT_NEAR(rec.diagnostics.spectra[0].ratio, 0.0, 1e-12);

  Sampler rs(71);
  Eigen::MatrixXd E(3, 3);
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b) E(a, b) = rs.gauss();
  sol.x[built.layout.gram[0]] = depth * depth.transpose() + 1e-6 * (E + E.transpose());
  const auto near = extract_points(built, sol, obs);
  for (int j = 0; j < 3; ++j) EXPECT_NEAR(near.clouds[0][j].norm(), depth(j), 1e-3);
}

TEST(Extract, PositionsFromFirstColumn) {
  const PointCloud X{{0.1, 0.0, 1.0}, {-0.2, 0.1, 1.2}, {0.0, 0.3, 0.9}};
  const auto obs = observe({X});
  const auto g = make_graph(3, {{0, 1}, {0, 2}, {1, 2}});
  const auto built = build_snr_pp(obs, g);
  conic::ConicSolution sol;
  sol.status = conic::SolveStatus::optimal;
  sol.x = built.program.zero_point();
  const auto v = augmented_position_vector(X);
  sol.x[built.layout.gram[0]] = v * v.transpose();
  const auto rec = extract_points(built, sol, obs);
  EXPECT_LT(nrsfm::testing::max_abs_diff(rec.clouds[0], X), 1e-14);
  EXPECT_EQ(rec.diagnostics.negative_depths, 0);

  sol.status = conic::SolveStatus::max_iter;
  EXPECT_THROW(extract_points(built, sol, obs), SolverError);
}

TEST(Reconstruct, ObjectivePartsSumToObjective) {
  const auto s = generate_isometric(iso(3, 3, 3, 12));
  for (Method m : {Method::qnr_dsl, Method::qnr_pp, Method::hnr_dsl}) {
    ReconstructionConfig rc;
    rc.method = m;
    const auto r = reconstruct(s.observations, s.graph, rc);
    double sum = 0.0;
    std::map<std::string, double> parts(r.diagnostics.objective_parts.begin(),
                                        r.diagnostics.objective_parts.end());
    for (const auto& [name, v] : parts) sum += v;
    EXPECT_TRUE(parts.count("trace"));
    EXPECT_TRUE(parts.count("isometry"));
    EXPECT_NEAR(sum, r.diagnostics.objective, 1e-6 * (1.0 + std::abs(sum))) << to_string(m);
    EXPECT_EQ(r.diagnostics.spectra.size(), 3u);
    EXPECT_EQ(r.geodesics.size(), s.graph.e2.size());
    EXPECT_EQ(r.areas.size(), is_hnr(m) ? s.graph.e3.size() : 0u);
  }
}

TEST(Reconstruct, IterationCapRaisesSolverError) {
  const auto s = generate_isometric(iso(3, 3, 2, 13));
  ReconstructionConfig rc;
  rc.solver.max_iter = 1;
  EXPECT_THROW(reconstruct(s.observations, s.graph, rc), SolverError);
}

TEST(Reconstruct, ExplicitBackendMatchesDefault) {
  const auto s = generate_isometric(iso(3, 3, 2, 14));
  ReconstructionConfig rc;
  const conic::InteriorPointBackend ipm;
  const auto a = reconstruct(s.observations, s.graph, rc, &ipm);
  const auto b = reconstruct(s.observations, s.graph, rc);
  EXPECT_EQ(a.diagnostics.objective, b.diagnostics.objective);
  for (int i = 0; i < 2; ++i) EXPECT_EQ(a.clouds[i], b.clouds[i]);
}
