#pragma once

namespace nrsfm {

// Numerical thresholds shared across modules. Tests and the CLI read these
// instead of repeating literals.
struct Tolerances {
  // Unit-norm check on sightlines.
  static constexpr double kUnitNorm = 1e-12;
  // Two reference points closer than this are duplicates.
  static constexpr double kDuplicatePoint = 1e-12;
  // Reference-image triangles with area below this are dropped from E3.
  static constexpr double kDegenerateArea = 1e-12;
  // Default residual tolerance for the conic solver.
  static constexpr double kSolverResidual = 1e-7;
  // Interior-point iteration cap.
  static constexpr int kSolverMaxIter = 200;
  // Constraint satisfaction used when checking lifted ground truth.
  static constexpr double kLiftFeasibility = 1e-8;
};

}  // namespace nrsfm
