#pragma once

#include <iosfwd>
#include <string>

#include "nrsfm/conic/program.hpp"

namespace nrsfm::conic {

// Text interchange format, version 1. Indices are 0-based and numbers are
// written with 17 significant digits so a round trip is exact.
//
//   CONIC-IR 1
//   blocks <B>
//   <id> <psd|soc|nonneg|free> <dim> <label>
//   objective <constant> <F>
//   <functional> x F
//   constraints <R>
//   row <index> <rhs> <F> <label>
//   <functional> x F
//   end
//
// where each functional is a header "f <block> <T>" followed by T
// triplets "<row> <col> <coef>" with row <= col.
//
// Labels never contain whitespace; an empty label is written as "-".
void write_program(std::ostream& os, const ConicProgram& prog);
ConicProgram read_program(std::istream& is);

void export_program(const ConicProgram& prog, const std::string& path);
ConicProgram import_program(const std::string& path);

// Solution file, version 1:
//
//   CONIC-SOL 1
//   status <name>
//   objective <primal> <dual>
//   residuals <primal> <dual> <gap>
//   iterations <k>
//   block <id> <rows> <cols>
//   <values, row-major>
//   dual <R>
//   <values>
//   end
void write_solution(std::ostream& os, const ConicSolution& sol);
ConicSolution read_solution(std::istream& is);

void export_solution(const ConicSolution& sol, const std::string& path);
ConicSolution import_solution(const std::string& path);

}  // namespace nrsfm::conic
