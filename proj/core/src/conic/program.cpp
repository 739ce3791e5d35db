#include "nrsfm/conic/program.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include <Eigen/Eigenvalues>

#include "nrsfm/error.hpp"

namespace nrsfm::conic {

const char* to_string(ConeKind kind) {
  switch (kind) {
    case ConeKind::psd: return "psd";
    case ConeKind::soc: return "soc";
    case ConeKind::nonneg: return "nonneg";
    case ConeKind::free_var: return "free";
  }
  return "?";
}

ConeKind cone_from_string(const std::string& s) {
  if (s == "psd") return ConeKind::psd;
  if (s == "soc") return ConeKind::soc;
  if (s == "nonneg") return ConeKind::nonneg;
  if (s == "free") return ConeKind::free_var;
  throw InvalidArgument("unknown cone kind '" + s + "'");
}

const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::optimal: return "optimal";
    case SolveStatus::infeasible: return "infeasible";
    case SolveStatus::unbounded: return "unbounded";
    case SolveStatus::max_iter: return "max_iter";
    case SolveStatus::numerical_error: return "numerical_error";
  }
  return "?";
}

SolveStatus status_from_string(const std::string& s) {
  for (auto st : {SolveStatus::optimal, SolveStatus::infeasible, SolveStatus::unbounded,
                  SolveStatus::max_iter, SolveStatus::numerical_error}) {
    if (s == to_string(st)) return st;
  }
  throw InvalidArgument("unknown solve status '" + s + "'");
}

void LinearFunctional::add(int row, int col, double coef) {
  if (row > col) std::swap(row, col);
  terms.push_back({row, col, coef});
}

void LinearFunctional::add_square(const std::vector<std::pair<int, double>>& weighted,
                                  double scale) {
  for (std::size_t a = 0; a < weighted.size(); ++a) {
    for (std::size_t b = a; b < weighted.size(); ++b) {
      const double w = weighted[a].second * weighted[b].second * scale;
      add(weighted[a].first, weighted[b].first, a == b ? w : 2.0 * w);
    }
  }
  compress();
}

void LinearFunctional::compress() {
  std::map<std::pair<int, int>, double> acc;
  for (const auto& t : terms) acc[{t.row, t.col}] += t.coef;
  terms.clear();
  for (const auto& [rc, c] : acc) {
    if (c != 0.0) terms.push_back({rc.first, rc.second, c});
  }
}

LinearFunctional LinearFunctional::bound(int block_id) const {
  LinearFunctional f = *this;
  f.block = block_id;
  return f;
}

LinearFunctional& LinearFunctional::operator*=(double s) {
  for (auto& t : terms) t.coef *= s;
  constant *= s;
  return *this;
}

double LinearFunctional::evaluate(const Eigen::MatrixXd& X) const {
  double v = constant;
  if (X.cols() == 1 && X.rows() != 1) {
    for (const auto& t : terms) v += t.coef * X(t.row, 0);
  } else {
    for (const auto& t : terms) v += t.coef * X(t.row, t.col);
  }
  return v;
}

LinearFunctional entry(int block, int row, int col, double coef) {
  LinearFunctional f;
  f.block = block;
  f.add(row, col, coef);
  return f;
}

LinearFunctional scalar(int block, int index, double coef) { return entry(block, index, index, coef); }

int ConicProgram::add_block(ConeKind kind, int dim, std::string label) {
  if (dim <= 0) throw InvalidArgument("block dimension must be positive");
  if (kind == ConeKind::soc && dim < 2) throw InvalidArgument("second-order block needs dim >= 2");
  blocks_.push_back({kind, dim, std::move(label)});
  return static_cast<int>(blocks_.size()) - 1;
}

void ConicProgram::add_equality(AffineExpr lhs, double rhs, std::string label) {
  for (auto& f : lhs) {
    rhs -= f.constant;
    f.constant = 0.0;
    f.compress();
  }
  lhs.erase(std::remove_if(lhs.begin(), lhs.end(),
                           [](const LinearFunctional& f) { return f.terms.empty(); }),
            lhs.end());
  constraints_.push_back({std::move(lhs), rhs, std::move(label)});
}

void ConicProgram::add_objective(const LinearFunctional& f) {
  objective_constant_ += f.constant;
  LinearFunctional g = f;
  g.constant = 0.0;
  if (!g.terms.empty()) objective_.push_back(std::move(g));
}

void ConicProgram::add_objective(const AffineExpr& f) {
  for (const auto& g : f) add_objective(g);
}

void ConicProgram::compress_objective() {
  std::map<int, LinearFunctional> per_block;
  for (const auto& f : objective_) {
    auto& g = per_block[f.block];
    g.block = f.block;
    g.terms.insert(g.terms.end(), f.terms.begin(), f.terms.end());
  }
  objective_.clear();
  for (auto& [b, g] : per_block) {
    g.compress();
    if (!g.terms.empty()) objective_.push_back(std::move(g));
  }
}

namespace {

void check_functional(const LinearFunctional& f, const std::vector<Block>& blocks) {
  if (f.block < 0 || f.block >= static_cast<int>(blocks.size())) {
    throw InvalidArgument("functional references unknown block " + std::to_string(f.block));
  }
  const Block& b = blocks[f.block];
  for (const auto& t : f.terms) {
    if (!std::isfinite(t.coef)) throw InvalidArgument("non-finite coefficient");
    if (t.row < 0 || t.col >= b.dim || t.row > t.col) {
      throw InvalidArgument("term outside block " + std::to_string(f.block));
    }
    if (b.kind != ConeKind::psd && t.row != t.col) {
      throw InvalidArgument("off-diagonal term on scalar block " + std::to_string(f.block));
    }
  }
}

}  // namespace

void ConicProgram::validate() const {
  for (const auto& f : objective_) check_functional(f, blocks_);
  for (const auto& c : constraints_) {
    if (!std::isfinite(c.rhs)) throw InvalidArgument("non-finite right-hand side");
    for (const auto& f : c.lhs) check_functional(f, blocks_);
  }
}

std::vector<Eigen::MatrixXd> ConicProgram::zero_point() const {
  std::vector<Eigen::MatrixXd> x;
  x.reserve(blocks_.size());
  for (const auto& b : blocks_) {
    if (b.kind == ConeKind::psd) {
      x.emplace_back(Eigen::MatrixXd::Zero(b.dim, b.dim));
    } else {
      x.emplace_back(Eigen::MatrixXd::Zero(b.dim, 1));
    }
  }
  return x;
}

double ConicProgram::evaluate(const AffineExpr& e, const std::vector<Eigen::MatrixXd>& x) const {
  double v = 0.0;
  for (const auto& f : e) v += f.evaluate(x[f.block]);
  return v;
}

double ConicProgram::objective_value(const std::vector<Eigen::MatrixXd>& x) const {
  return objective_constant_ + evaluate(objective_, x);
}

void ConicProgram::complete_auxiliary(std::vector<Eigen::MatrixXd>& x) const {
  for (const auto& rec : aux_) {
    Eigen::MatrixXd& w = x[rec.block];
    switch (rec.kind) {
      case AuxKind::abs_value: {
        const double d = evaluate(rec.a, x);
        w(0, 0) = std::max(d, 0.0);
        w(1, 0) = std::max(-d, 0.0);
        break;
      }
      case AuxKind::inverse: {
        const double v = evaluate(rec.a, x);
        w << 1.0 / v, 1.0, 1.0, v;
        break;
      }
      case AuxKind::square_dominance: {
        const double y = evaluate(rec.a, x);
        const double z = evaluate(rec.b, x);
        w << z, y, y, 1.0;
        break;
      }
    }
  }
}

double ConicProgram::max_residual(const std::vector<Eigen::MatrixXd>& x) const {
  double worst = 0.0;
  for (const auto& c : constraints_) {
    worst = std::max(worst, std::abs(evaluate(c.lhs, x) - c.rhs));
  }
  return worst;
}

double ConicProgram::min_cone_margin(const std::vector<Eigen::MatrixXd>& x) const {
  double margin = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < blocks_.size(); ++k) {
    const auto& b = blocks_[k];
    switch (b.kind) {
      case ConeKind::psd: {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(x[k], Eigen::EigenvaluesOnly);
        margin = std::min(margin, es.eigenvalues().minCoeff());
        break;
      }
      case ConeKind::nonneg:
        margin = std::min(margin, x[k].minCoeff());
        break;
      case ConeKind::soc:
        margin = std::min(margin, x[k](0, 0) - x[k].bottomRows(b.dim - 1).norm());
        break;
      case ConeKind::free_var:
        break;
    }
  }
  return margin;
}

}  // namespace nrsfm::conic
