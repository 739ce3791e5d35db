#pragma once

#include "nrsfm/conic/program.hpp"
#include "nrsfm/tolerances.hpp"

namespace nrsfm::conic {

struct SolverOptions {
  double tol = Tolerances::kSolverResidual;
  int max_iter = Tolerances::kSolverMaxIter;
  bool verbose = false;
};

/// Primal-dual infeasible interior-point method (HKM search direction with
/// Mehrotra predictor-corrector) on the equilibrated program.
///
/// Residuals are measured on the original data:
///   primal = |b - A(x)| / (1 + |b|)
///   dual   = |c - A^T y - z| / (1 + |c|)
///   gap    = |pobj - dobj| / (1 + |pobj| + |dobj|)
/// and status is optimal once all three are below tol.
ConicSolution solve_interior_point(const ConicProgram& prog, const SolverOptions& opts = {});

}  // namespace nrsfm::conic
