#include <gtest/gtest.h>

#include <cmath>
#include <sstream>
#include <string>

#include <Eigen/Eigenvalues>

#include "nrsfm/conic/backend.hpp"
#include "nrsfm/conic/epigraph.hpp"
#include "nrsfm/conic/interior_point.hpp"
#include "nrsfm/conic/ir_format.hpp"
#include "nrsfm/conic/program.hpp"
#include "nrsfm/error.hpp"
#include "oracles.hpp"

using namespace nrsfm;
using namespace nrsfm::conic;
using nrsfm::testing::Sampler;

namespace {

SolverOptions tight() {
  SolverOptions o;
  o.tol = 1e-9;
  return o;
}

// Adds x = value for a free scalar.
void fix(ConicProgram& p, int block, int idx, double value) {
  p.add_equality({scalar(block, idx)}, value, "fix");
}

double min_eig(const Eigen::MatrixXd& X) {
  return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(X).eigenvalues()(0);
}

}  // namespace

TEST(LinearFunctional, AddSquareExpandsProducts) {
  LinearFunctional f;
  f.add_square({{0, 2.0}, {1, -1.0}}, 0.5);
  f.compress();
  Eigen::Vector2d v(0.7, -1.3);
  const double want = 0.5 * std::pow(2.0 * v(0) - v(1), 2);
  EXPECT_NEAR(f.evaluate(v * v.transpose()), want, 1e-14);
}

TEST(LinearFunctional, CompressMergesAndDropsZeros) {
  LinearFunctional f;
  f.add(1, 0, 2.0);
  f.add(0, 1, -2.0);
  f.add(2, 2, 1.0);
  f.add(2, 2, 1.5);
  f.compress();
  ASSERT_EQ(f.terms.size(), 1u);
  EXPECT_EQ(f.terms[0], (Term{2, 2, 2.5}));
}

TEST(Program, ValidateRejectsUnknownBlocks) {
  ConicProgram p;
  p.add_psd(2);
  p.add_equality({entry(3, 0, 0)}, 1.0);
  EXPECT_THROW(p.validate(), InvalidArgument);

  ConicProgram q;
  q.add_psd(2);
  q.add_equality({entry(0, 0, 5)}, 1.0);
  EXPECT_THROW(q.validate(), InvalidArgument);
}

TEST(Solve, TraceWithPinnedCorner) {
  ConicProgram p;
  const int Y = p.add_psd(2);
  p.add_objective(entry(Y, 0, 0));
  p.add_objective(entry(Y, 1, 1));
  p.add_equality({entry(Y, 0, 0)}, 1.0);
  const auto s = solve_interior_point(p, tight());
  ASSERT_TRUE(s.optimal()) << s.message;
  EXPECT_NEAR(s.objective, 1.0, 1e-7);
  EXPECT_NEAR(s.x[Y](0, 0), 1.0, 1e-7);
  EXPECT_NEAR(s.x[Y](1, 1), 0.0, 1e-6);
  EXPECT_NEAR(s.x[Y](0, 1), 0.0, 1e-6);
}

TEST(Solve, BoundedLinearProgram) {
  // min -x s.t. x + s = 1, s >= 0
  ConicProgram p;
  const int x = p.add_free(1);
  const int s = p.add_nonneg(1);
  p.add_objective(scalar(x, 0, -1.0));
  p.add_equality({scalar(x, 0), scalar(s, 0)}, 1.0);
  const auto sol = solve_interior_point(p, tight());
  ASSERT_TRUE(sol.optimal());
  EXPECT_NEAR(sol.x[x](0), 1.0, 1e-7);
}

TEST(Solve, InfeasibleProgramIsNotOptimal) {
  ConicProgram p;
  const int s = p.add_nonneg(1);
  p.add_objective(scalar(s, 0));
  p.add_equality({scalar(s, 0)}, -1.0);
  const auto sol = solve_interior_point(p, tight());
  EXPECT_FALSE(sol.optimal());
}

TEST(Solve, SecondOrderCone) {
  // min t s.t. (t, 3, 4) in SOC
  ConicProgram p;
  const int q = p.add_block(ConeKind::soc, 3);
  p.add_objective(scalar(q, 0));
  fix(p, q, 1, 3.0);
  fix(p, q, 2, 4.0);
  const auto sol = solve_interior_point(p, tight());
  ASSERT_TRUE(sol.optimal());
  EXPECT_NEAR(sol.x[q](0), 5.0, 1e-6);
}

TEST(AbsEpigraph, MinimumAtZeroDifference) {
  ConicProgram p;
  const int x = p.add_free(1);
  LinearFunctional d = scalar(x, 0, -1.0);
  d.constant = 3.0;
  const int u = add_abs_epigraph(p, {d}, 1.0);
  const auto sol = solve_interior_point(p, tight());
  ASSERT_TRUE(sol.optimal());
  EXPECT_NEAR(sol.x[x](0), 3.0, 1e-6);
  EXPECT_NEAR(sol.objective, 0.0, 1e-7);
  EXPECT_NEAR(sol.x[u](0) + sol.x[u](1), 0.0, 1e-6);
}

TEST(AbsEpigraph, SlackEqualsAbsoluteResidual) {
  Sampler rs(41);
  for (int trial = 0; trial < 10; ++trial) {
    ConicProgram p;
    const int x = p.add_free(2);
    const double x0 = rs.uniform(-2, 2), x1 = rs.uniform(-2, 2);
    fix(p, x, 0, x0);
    fix(p, x, 1, x1);
    const double a = rs.uniform(-3, 3), b = rs.uniform(-3, 3), g = rs.uniform(-3, 3);
    LinearFunctional f = scalar(x, 0, a);
    f.add(1, 1, b);
    f.constant = -g;
    const int u = add_abs_epigraph(p, {f}, 2.0);
    const auto sol = solve_interior_point(p, tight());
    ASSERT_TRUE(sol.optimal());
    const double want = std::abs(a * x0 + b * x1 - g);
    EXPECT_NEAR(sol.x[u](0) + sol.x[u](1), want, 1e-6);
    EXPECT_NEAR(sol.objective, 2.0 * want, 2e-6);
  }
  ConicProgram bad;
  EXPECT_THROW(add_abs_epigraph(bad, {}, -1.0), InvalidArgument);
}

TEST(InverseEpigraph, FixedArgument) {
  for (double v : {2.0, 1.0, 0.25}) {
    ConicProgram p;
    const int x = p.add_free(1);
    fix(p, x, 0, v);
    const int w = add_inverse_epigraph(p, scalar(x, 0), 1.0);
    const auto sol = solve_interior_point(p, tight());
    ASSERT_TRUE(sol.optimal());
    EXPECT_NEAR(sol.x[w](0, 0), 1.0 / v, 1e-6);
    EXPECT_GE(sol.x[w](0, 0) * v, 1.0 - 10 * tight().tol);
  }
}

TEST(InverseEpigraph, ScalarPlusInverse) {
  // min x + 1/x over x > 0
  ConicProgram p;
  const int x = p.add_nonneg(1);
  p.add_objective(scalar(x, 0));
  add_inverse_epigraph(p, scalar(x, 0), 1.0);
  const auto sol = solve_interior_point(p, tight());
  ASSERT_TRUE(sol.optimal());
  // The minimum is quadratic, so the minimiser is only as accurate as the
  // square root of the objective accuracy.
  EXPECT_NEAR(sol.objective, 2.0, 1e-7);
  EXPECT_NEAR(sol.x[x](0), 1.0, std::sqrt(1e-7));
}

TEST(SquareDominance, ForcedValues) {
  Sampler rs(42);
  for (double y : {2.0, 0.0, rs.uniform(-3, 3), rs.uniform(-3, 3)}) {
    ConicProgram p;
    const int v = p.add_free(2);
    fix(p, v, 0, y);
    p.add_objective(scalar(v, 1));
    add_square_dominance(p, scalar(v, 0), scalar(v, 1));
    const auto sol = solve_interior_point(p, tight());
    ASSERT_TRUE(sol.optimal());
    EXPECT_NEAR(sol.x[v](1), y * y, 1e-7 * (1 + y * y)) << "y = " << y;
  }
}

TEST(CompleteAuxiliary, FillsEpigraphsExactly) {
  ConicProgram p;
  const int x = p.add_free(2);
  LinearFunctional d = scalar(x, 0);
  d.constant = -1.0;
  add_abs_epigraph(p, {d}, 1.0);
  add_inverse_epigraph(p, scalar(x, 1), 1.0);
  add_square_dominance(p, scalar(x, 0), scalar(x, 1));
  auto pt = p.zero_point();
  pt[x](0) = -0.5;
  pt[x](1) = 2.0;
  p.complete_auxiliary(pt);
  EXPECT_LT(p.max_residual(pt), 1e-14);
  EXPECT_GE(p.min_cone_margin(pt), -1e-14);
  EXPECT_NEAR(p.objective_value(pt), 1.5 + 0.5, 1e-14);
}

TEST(EdmCompletion, RecoversCenteredGram) {
  Sampler rs(43);
  for (int n : {4, 5}) {
    std::vector<Vec3> pts;
    for (int k = 0; k < n; ++k) pts.push_back(rs.point(1.0));
    const auto prog = nrsfm::testing::edm_trace_program(pts);
    const auto sol = solve_interior_point(prog, tight());
    ASSERT_TRUE(sol.optimal());
    const Eigen::MatrixXd G = nrsfm::testing::centered_gram(pts);
    EXPECT_LE((sol.x[0] - G).norm(), 1e-6 * G.norm());
    EXPECT_LE(sol.residuals.primal, 1e-7);
    EXPECT_LE(sol.residuals.dual, 1e-7);
    EXPECT_LE(sol.residuals.gap, 1e-7);
    EXPECT_GE(sol.objective, sol.dual_objective - 1e-7 * (1 + std::abs(sol.objective)));
    EXPECT_GE(min_eig(sol.x[0]), -1e-7);
  }
}

TEST(Solve, IsDeterministic) {
  Sampler rs(44);
  std::vector<Vec3> pts;
  for (int k = 0; k < 6; ++k) pts.push_back(rs.point(1.0));
  const auto prog = nrsfm::testing::edm_trace_program(pts);
  const auto a = solve_interior_point(prog);
  const auto b = solve_interior_point(prog);
  EXPECT_EQ(a.iterations, b.iterations);
  EXPECT_EQ(a.objective, b.objective);
  EXPECT_EQ(a.x[0], b.x[0]);
}

TEST(Solve, OptimalStatusMeetsTolerance) {
  Sampler rs(45);
  std::vector<Vec3> pts;
  for (int k = 0; k < 7; ++k) pts.push_back(rs.point(1.0));
  SolverOptions o;
  o.tol = 1e-6;
  const auto sol = solve_interior_point(nrsfm::testing::edm_trace_program(pts), o);
  ASSERT_TRUE(sol.optimal());
  EXPECT_LE(std::max({sol.residuals.primal, sol.residuals.dual, sol.residuals.gap}), o.tol);
}

TEST(IrFormat, EmptyProgramIsHeaderOnly) {
  std::ostringstream os;
  write_program(os, ConicProgram{});
  const std::string text = os.str();
  EXPECT_EQ(text.rfind("CONIC-IR 1", 0), 0u);
  EXPECT_NE(text.find("blocks 0"), std::string::npos);
  EXPECT_NE(text.find("constraints 0"), std::string::npos);
  std::istringstream is(text);
  EXPECT_EQ(read_program(is), ConicProgram{});
}

TEST(IrFormat, RoundTripIsExact) {
  Sampler rs(46);
  ConicProgram p;
  const int Y = p.add_psd(3, "Y");
  const int x = p.add_free(2, "x");
  p.add_block(ConeKind::soc, 3, "cone");
  LinearFunctional d = scalar(x, 0, rs.uniform());
  d.constant = rs.uniform();
  add_abs_epigraph(p, {d, entry(Y, 0, 2, rs.uniform())}, 0.1 * rs.uniform(), "abs");
  add_inverse_epigraph(p, entry(Y, 1, 1), 1.0 / 3.0);
  p.add_objective(entry(Y, 0, 0, std::sqrt(2.0)));
  p.set_objective_constant(-1.0 / 7.0);
  p.compress_objective();

  std::ostringstream os;
  write_program(os, p);
  std::istringstream is(os.str());
  const ConicProgram back = read_program(is);
  EXPECT_EQ(back, p);
  std::ostringstream again;
  write_program(again, back);
  EXPECT_EQ(again.str(), os.str());
}

TEST(IrFormat, EdmProgramRowCount) {
  Sampler rs(47);
  std::vector<Vec3> pts;
  for (int k = 0; k < 5; ++k) pts.push_back(rs.point());
  std::ostringstream os;
  write_program(os, nrsfm::testing::edm_trace_program(pts));
  const std::string text = os.str();
  EXPECT_NE(text.find("blocks 1"), std::string::npos);
  EXPECT_NE(text.find("constraints 10"), std::string::npos);
  int rows = 0, psd = 0;
  std::istringstream lines(text);
  for (std::string line; std::getline(lines, line);) {
    rows += line.rfind("row ", 0) == 0;
    psd += line.find(" psd ") != std::string::npos;
  }
  EXPECT_EQ(rows, 10);
  EXPECT_EQ(psd, 1);
}

TEST(IrFormat, MalformedInputThrows) {
  std::istringstream bad("CONIC-IR 2\n");
  EXPECT_THROW(read_program(bad), Error);
  std::istringstream truncated("CONIC-IR 1\nblocks 1\n0 psd 3");
  EXPECT_THROW(read_program(truncated), Error);
}

TEST(IrFormat, SolutionRoundTrip) {
  Sampler rs(48);
  std::vector<Vec3> pts;
  for (int k = 0; k < 4; ++k) pts.push_back(rs.point());
  const auto sol = solve_interior_point(nrsfm::testing::edm_trace_program(pts));
  std::ostringstream os;
  write_solution(os, sol);
  std::istringstream is(os.str());
  const auto back = read_solution(is);
  EXPECT_EQ(back.status, sol.status);
  EXPECT_EQ(back.objective, sol.objective);
  EXPECT_EQ(back.iterations, sol.iterations);
  EXPECT_EQ(back.x[0], sol.x[0]);
  EXPECT_EQ(back.y, sol.y);
}

TEST(Backend, FailingExternalCommandIsSolverError) {
  ExternalProcessBackend b("false");
  ConicProgram p;
  const int x = p.add_nonneg(1);
  p.add_objective(scalar(x, 0));
  EXPECT_THROW(b.solve(p, {}), SolverError);
}

TEST(Status, NamesRoundTrip) {
  for (auto s : {SolveStatus::optimal, SolveStatus::infeasible, SolveStatus::unbounded,
                 SolveStatus::max_iter, SolveStatus::numerical_error}) {
    EXPECT_EQ(status_from_string(to_string(s)), s);
  }
  for (auto k : {ConeKind::psd, ConeKind::soc, ConeKind::nonneg, ConeKind::free_var}) {
    EXPECT_EQ(cone_from_string(to_string(k)), k);
  }
}
