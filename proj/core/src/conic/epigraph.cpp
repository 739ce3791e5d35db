#include "nrsfm/conic/epigraph.hpp"

#include "nrsfm/error.hpp"

namespace nrsfm::conic {

namespace {

AffineExpr negated(AffineExpr e) {
  for (auto& f : e) f *= -1.0;
  return e;
}

}  // namespace

int add_abs_epigraph(ConicProgram& prog, const AffineExpr& diff, double weight,
                     const std::string& label) {
  if (!(weight >= 0.0)) throw InvalidArgument("epigraph weight must be nonnegative");
  const int s = prog.add_nonneg(2, label);
  AffineExpr row = diff;
  row.push_back(scalar(s, 0, -1.0));
  row.push_back(scalar(s, 1, 1.0));
  prog.add_equality(std::move(row), 0.0, label);
  LinearFunctional cost = scalar(s, 0, weight);
  cost.add(1, 1, weight);
  prog.add_objective(cost);
  prog.add_aux({AuxKind::abs_value, s, diff, {}});
  return s;
}

int add_inverse_epigraph(ConicProgram& prog, const LinearFunctional& x, double weight,
                         const std::string& label) {
  if (!(weight >= 0.0)) throw InvalidArgument("epigraph weight must be nonnegative");
  const int w = prog.add_psd(2, label);
  prog.add_equality({entry(w, 0, 1)}, 1.0, label);
  prog.add_equality({entry(w, 1, 1), negated({x})[0]}, 0.0, label);
  prog.add_objective(entry(w, 0, 0, weight));
  prog.add_aux({AuxKind::inverse, w, {x}, {}});
  return w;
}

int add_square_dominance(ConicProgram& prog, const LinearFunctional& y,
                         const LinearFunctional& z, const std::string& label) {
  const int w = prog.add_psd(2, label);
  prog.add_equality({entry(w, 0, 0), negated({z})[0]}, 0.0, label);
  prog.add_equality({entry(w, 0, 1), negated({y})[0]}, 0.0, label);
  prog.add_equality({entry(w, 1, 1)}, 1.0, label);
  prog.add_aux({AuxKind::square_dominance, w, {y}, {z}});
  return w;
}

}  // namespace nrsfm::conic
