#pragma once

#include <string>

#include "nrsfm/conic/program.hpp"

namespace nrsfm::conic {

/// Adds weight * |diff| to the objective through a pair of nonnegative
/// slacks s+ and s- with diff = s+ - s-. Returns the slack block id.
int add_abs_epigraph(ConicProgram& prog, const AffineExpr& diff, double weight,
                     const std::string& label = {});

/// Adds weight * t with t >= 1 / x, encoded as [[t, 1], [1, x]] PSD.
/// Returns the id of the 2x2 block; its (0,0) entry is t.
int add_inverse_epigraph(ConicProgram& prog, const LinearFunctional& x, double weight,
                         const std::string& label = {});

/// Enforces y^2 <= z through [[z, y], [y, 1]] PSD. Returns the block id.
int add_square_dominance(ConicProgram& prog, const LinearFunctional& y,
                         const LinearFunctional& z, const std::string& label = {});

}  // namespace nrsfm::conic
