#include "nrsfm/conic/interior_point.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <Eigen/SparseCore>

#include "nrsfm/error.hpp"

namespace nrsfm::conic {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Coef {
  int a;
  int b;
  double v;
};

struct RowSlice {
  int row;
  std::vector<Coef> e;  // both halves of every off-diagonal entry
};

struct PsdData {
  int dim = 0;
  int source = -1;  // original block id
  bool arrow = false;
  std::vector<RowSlice> rows;
  MatrixXd C;
};

struct Slot {
  ConeKind kind;
  int index;  // psd index, or offset into the scalar vectors
};

struct Problem {
  int rows = 0;
  std::vector<PsdData> psd;
  int nl = 0;
  int nf = 0;
  Eigen::SparseMatrix<double> Al;
  MatrixXd Af;
  VectorXd cl;
  VectorXd cf;
  VectorXd b;
  std::vector<Slot> slot;
  std::vector<int> kept_rows;  // original row of each internal row (-1 for lowering rows)
};

void push_expanded(std::map<std::pair<int, int>, double>& acc, int r, int c, double coef) {
  if (r == c) {
    acc[{r, r}] += coef;
  } else {
    acc[{r, c}] += 0.5 * coef;
    acc[{c, r}] += 0.5 * coef;
  }
}

Problem assemble(const ConicProgram& prog) {
  Problem P;
  const auto& blocks = prog.blocks();
  P.slot.resize(blocks.size());
  for (std::size_t k = 0; k < blocks.size(); ++k) {
    const auto& bl = blocks[k];
    switch (bl.kind) {
      case ConeKind::psd:
      case ConeKind::soc: {
        PsdData d;
        d.dim = bl.dim;
        d.source = static_cast<int>(k);
        d.arrow = bl.kind == ConeKind::soc;
        d.C = MatrixXd::Zero(bl.dim, bl.dim);
        P.slot[k] = {ConeKind::psd, static_cast<int>(P.psd.size())};
        P.psd.push_back(std::move(d));
        break;
      }
      case ConeKind::nonneg:
        P.slot[k] = {ConeKind::nonneg, P.nl};
        P.nl += bl.dim;
        break;
      case ConeKind::free_var:
        P.slot[k] = {ConeKind::free_var, P.nf};
        P.nf += bl.dim;
        break;
    }
  }

  // Row list: original rows (minus empty ones) followed by arrow rows.
  struct RowBuild {
    std::map<int, std::map<std::pair<int, int>, double>> psd;
    std::map<int, double> nl;
    std::map<int, double> nf;
    double rhs = 0.0;
    int source = -1;
  };
  std::vector<RowBuild> rows;

  auto add_term = [&](RowBuild& rb, const LinearFunctional& f) {
    const Slot s = P.slot[f.block];
    for (const auto& t : f.terms) {
      switch (s.kind) {
        case ConeKind::psd:
          if (P.psd[s.index].arrow) {
            push_expanded(rb.psd[s.index], 0, t.row, t.coef);
          } else {
            push_expanded(rb.psd[s.index], t.row, t.col, t.coef);
          }
          break;
        case ConeKind::nonneg:
          rb.nl[s.index + t.row] += t.coef;
          break;
        case ConeKind::free_var:
          rb.nf[s.index + t.row] += t.coef;
          break;
        default:
          break;
      }
    }
  };

  const auto& cons = prog.constraints();
  for (std::size_t i = 0; i < cons.size(); ++i) {
    RowBuild rb;
    rb.rhs = cons[i].rhs;
    rb.source = static_cast<int>(i);
    for (const auto& f : cons[i].lhs) add_term(rb, f);
    bool empty = rb.nl.empty() && rb.nf.empty();
    for (auto& [p, m] : rb.psd) {
      for (auto& [rc, v] : m) empty = empty && v == 0.0;
    }
    if (empty) {
      if (std::abs(rb.rhs) > 0.0) throw SolverError("constraint '" + cons[i].label +
                                                    "' has no terms but a nonzero right-hand side");
      continue;
    }
    rows.push_back(std::move(rb));
  }
  for (std::size_t p = 0; p < P.psd.size(); ++p) {
    if (!P.psd[p].arrow) continue;
    const int d = P.psd[p].dim;
    for (int k = 1; k < d; ++k) {
      RowBuild rb;
      rb.psd[static_cast<int>(p)][{k, k}] = 1.0;
      rb.psd[static_cast<int>(p)][{0, 0}] = -1.0;
      rows.push_back(std::move(rb));
    }
    for (int a = 1; a < d; ++a) {
      for (int c = a + 1; c < d; ++c) {
        RowBuild rb;
        push_expanded(rb.psd[static_cast<int>(p)], a, c, 1.0);
        rows.push_back(std::move(rb));
      }
    }
  }

  P.rows = static_cast<int>(rows.size());
  P.b = VectorXd::Zero(P.rows);
  P.Af = MatrixXd::Zero(P.rows, P.nf);
  std::vector<Eigen::Triplet<double>> trip;
  for (int i = 0; i < P.rows; ++i) {
    const auto& rb = rows[i];
    P.b(i) = rb.rhs;
    P.kept_rows.push_back(rb.source);
    for (const auto& [p, m] : rb.psd) {
      RowSlice rs{i, {}};
      for (const auto& [rc, v] : m) {
        if (v != 0.0) rs.e.push_back({rc.first, rc.second, v});
      }
      if (!rs.e.empty()) P.psd[p].rows.push_back(std::move(rs));
    }
    for (const auto& [k, v] : rb.nl) trip.emplace_back(i, k, v);
    for (const auto& [k, v] : rb.nf) P.Af(i, k) += v;
  }
  P.Al.resize(P.rows, P.nl);
  P.Al.setFromTriplets(trip.begin(), trip.end());

  P.cl = VectorXd::Zero(P.nl);
  P.cf = VectorXd::Zero(P.nf);
  for (const auto& f : prog.objective()) {
    const Slot s = P.slot[f.block];
    for (const auto& t : f.terms) {
      switch (s.kind) {
        case ConeKind::psd: {
          MatrixXd& C = P.psd[s.index].C;
          const int r = P.psd[s.index].arrow ? 0 : t.row;
          const int c = t.col;
          if (r == c) {
            C(r, r) += t.coef;
          } else {
            C(r, c) += 0.5 * t.coef;
            C(c, r) += 0.5 * t.coef;
          }
          break;
        }
        case ConeKind::nonneg:
          P.cl(s.index + t.row) += t.coef;
          break;
        case ConeKind::free_var:
          P.cf(s.index + t.row) += t.coef;
          break;
        default:
          break;
      }
    }
  }
  return P;
}

// Scales rows to unit norm and the objective / right-hand side to O(1).
struct Scaling {
  VectorXd row;  // internal row = original row * row(i)
  double b = 1.0;
  double c = 1.0;
};

Scaling equilibrate(Problem& P) {
  Scaling s;
  VectorXd norm2 = VectorXd::Zero(P.rows);
  for (const auto& d : P.psd) {
    for (const auto& rs : d.rows) {
      for (const auto& e : rs.e) norm2(rs.row) += e.v * e.v;
    }
  }
  for (int k = 0; k < P.Al.outerSize(); ++k) {
    for (Eigen::SparseMatrix<double>::InnerIterator it(P.Al, k); it; ++it) {
      norm2(it.row()) += it.value() * it.value();
    }
  }
  norm2 += P.Af.rowwise().squaredNorm();
  s.row = norm2.cwiseSqrt().cwiseInverse();

  for (auto& d : P.psd) {
    for (auto& rs : d.rows) {
      for (auto& e : rs.e) e.v *= s.row(rs.row);
    }
  }
  P.Al = s.row.asDiagonal() * P.Al;
  P.Af = s.row.asDiagonal() * P.Af;
  P.b = s.row.cwiseProduct(P.b);

  double cn2 = P.cl.squaredNorm() + P.cf.squaredNorm();
  for (const auto& d : P.psd) cn2 += d.C.squaredNorm();
  s.b = std::max(1.0, P.b.norm());
  s.c = std::max(1.0, std::sqrt(cn2));
  P.b /= s.b;
  for (auto& d : P.psd) d.C /= s.c;
  P.cl /= s.c;
  P.cf /= s.c;
  return s;
}

struct Iterate {
  std::vector<MatrixXd> X, Z;
  VectorXd xl, zl, xf, y;
};

double inner(const MatrixXd& A, const MatrixXd& B) { return A.cwiseProduct(B).sum(); }

MatrixXd adjoint_block(const PsdData& d, const VectorXd& y) {
  MatrixXd S = MatrixXd::Zero(d.dim, d.dim);
  for (const auto& rs : d.rows) {
    const double w = y(rs.row);
    if (w == 0.0) continue;
    for (const auto& e : rs.e) S(e.a, e.b) += w * e.v;
  }
  return S;
}

void apply_block(const PsdData& d, const MatrixXd& W, VectorXd& out) {
  for (const auto& rs : d.rows) {
    double s = 0.0;
    for (const auto& e : rs.e) s += e.v * W(e.a, e.b);
    out(rs.row) += s;
  }
}

VectorXd apply_A(const Problem& P, const std::vector<MatrixXd>& X, const VectorXd& xl,
                 const VectorXd& xf) {
  VectorXd out = VectorXd::Zero(P.rows);
  for (std::size_t p = 0; p < P.psd.size(); ++p) apply_block(P.psd[p], X[p], out);
  if (P.nl > 0) out += P.Al * xl;
  if (P.nf > 0) out += P.Af * xf;
  return out;
}

double max_step_psd(const MatrixXd& X, const MatrixXd& dX) {
  Eigen::LLT<MatrixXd> llt(X);
  if (llt.info() != Eigen::Success) return 0.0;
  const MatrixXd A = llt.matrixL().solve(dX);
  MatrixXd S = llt.matrixL().solve(A.transpose());
  S = 0.5 * (S + S.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(S, Eigen::EigenvaluesOnly);
  const double lmin = es.eigenvalues()(0);
  return lmin >= 0.0 ? kInf : -1.0 / lmin;
}

double max_step_vec(const VectorXd& x, const VectorXd& dx) {
  double a = kInf;
  for (int k = 0; k < x.size(); ++k) {
    if (dx(k) < 0.0) a = std::min(a, -x(k) / dx(k));
  }
  return a;
}

struct Metrics {
  double pinf = kInf;
  double dinf = kInf;
  double gap = kInf;
  double pobj = 0.0;
  double dobj = 0.0;
  double worst() const { return std::max({pinf, dinf, gap}); }
};

}  // namespace

ConicSolution solve_interior_point(const ConicProgram& prog, const SolverOptions& opts) {
  prog.validate();
  ConicSolution sol;
  Problem P;
  try {
    P = assemble(prog);
  } catch (const SolverError& e) {
    sol.status = SolveStatus::infeasible;
    sol.message = e.what();
    sol.x = prog.zero_point();
    sol.y = VectorXd::Zero(prog.num_constraints());
    return sol;
  }

  // Unscaled copies for residual reporting.
  const Problem P0 = P;
  const Scaling sc = equilibrate(P);
  const int np = static_cast<int>(P.psd.size());

  double bnorm0 = P0.b.norm();
  double cnorm0 = std::sqrt(P0.cl.squaredNorm() + P0.cf.squaredNorm());
  {
    double acc = cnorm0 * cnorm0;
    for (const auto& d : P0.psd) acc += d.C.squaredNorm();
    cnorm0 = std::sqrt(acc);
  }

  double nu = P.nl;
  for (const auto& d : P.psd) nu += d.dim;

  // Starting point.
  Iterate it;
  {
    VectorXd rowmax_b = VectorXd::Zero(P.rows);
    for (int p = 0; p < np; ++p) {
      const auto& d = P.psd[p];
      double anorm_max = 0.0;
      double ratio = 0.0;
      for (const auto& rs : d.rows) {
        double a2 = 0.0;
        for (const auto& e : rs.e) a2 += e.v * e.v;
        anorm_max = std::max(anorm_max, std::sqrt(a2));
        ratio = std::max(ratio, (1.0 + std::abs(P.b(rs.row))) / (1.0 + std::sqrt(a2)));
      }
      const double n = d.dim;
      const double xi = std::max({10.0, std::sqrt(n), n * ratio});
      const double eta = std::max({10.0, std::sqrt(n), d.C.norm(), anorm_max});
      it.X.push_back(xi * MatrixXd::Identity(d.dim, d.dim));
      it.Z.push_back(eta * MatrixXd::Identity(d.dim, d.dim));
    }
    const double xi_l = std::max(10.0, 1.0 + (P.b.size() ? P.b.cwiseAbs().maxCoeff() : 0.0));
    const double eta_l = std::max(10.0, 1.0 + (P.cl.size() ? P.cl.cwiseAbs().maxCoeff() : 0.0));
    it.xl = VectorXd::Constant(P.nl, xi_l);
    it.zl = VectorXd::Constant(P.nl, eta_l);
    it.xf = VectorXd::Zero(P.nf);
    it.y = VectorXd::Zero(P.rows);
  }

  auto unscaled_metrics = [&](const Iterate& w) {
    Metrics m;
    // Primal residual in original units: b - A(x) = bscale * D^-1 * (b_s - A_s x_s).
    const VectorXd rp = P.b - apply_A(P, w.X, w.xl, w.xf);
    const VectorXd rp0 = sc.b * rp.cwiseQuotient(sc.row);
    double rd2 = 0.0;
    for (int p = 0; p < np; ++p) {
      const MatrixXd R = P.psd[p].C - adjoint_block(P.psd[p], w.y) - w.Z[p];
      rd2 += R.squaredNorm();
    }
    if (P.nl > 0) rd2 += (P.cl - P.Al.transpose() * w.y - w.zl).squaredNorm();
    if (P.nf > 0) rd2 += (P.cf - P.Af.transpose() * w.y).squaredNorm();
    double pobj = 0.0;
    for (int p = 0; p < np; ++p) pobj += inner(P.psd[p].C, w.X[p]);
    pobj += P.cl.dot(w.xl) + P.cf.dot(w.xf);
    const double dobj = P.b.dot(w.y);
    m.pobj = sc.b * sc.c * pobj;
    m.dobj = sc.b * sc.c * dobj;
    m.pinf = rp0.norm() / (1.0 + bnorm0);
    m.dinf = sc.c * std::sqrt(rd2) / (1.0 + cnorm0);
    m.gap = std::abs(m.pobj - m.dobj) / (1.0 + std::abs(m.pobj) + std::abs(m.dobj));
    return m;
  };

  Iterate best = it;
  Metrics best_m = unscaled_metrics(it);
  SolveStatus status = SolveStatus::max_iter;
  int stalls = 0;
  int iter = 0;

  const int N = P.rows;
  for (iter = 0; iter < opts.max_iter; ++iter) {
    const Metrics m = unscaled_metrics(it);
    if (m.worst() < best_m.worst()) {
      best = it;
      best_m = m;
    }
    if (opts.verbose) {
      std::fprintf(stderr, "ipm %3d  pobj % .9e  dobj % .9e  pinf %.2e  dinf %.2e  gap %.2e\n",
                   iter, m.pobj, m.dobj, m.pinf, m.dinf, m.gap);
    }
    if (m.worst() <= opts.tol) {
      status = SolveStatus::optimal;
      best = it;
      best_m = m;
      break;
    }

    // Infeasibility certificates on the scaled data.
    {
      const double by = P.b.dot(it.y);
      if (by > 0.0) {
        double ray2 = 0.0;
        for (int p = 0; p < np; ++p) ray2 += (adjoint_block(P.psd[p], it.y) + it.Z[p]).squaredNorm();
        if (P.nl > 0) ray2 += (P.Al.transpose() * it.y + it.zl).squaredNorm();
        if (P.nf > 0) ray2 += (P.Af.transpose() * it.y).squaredNorm();
        if (by > 1e6 && std::sqrt(ray2) / by < 1e-8) {
          status = SolveStatus::infeasible;
          break;
        }
      }
      double cx = P.cl.dot(it.xl) + P.cf.dot(it.xf);
      for (int p = 0; p < np; ++p) cx += inner(P.psd[p].C, it.X[p]);
      if (cx < 0.0) {
        const double ax = apply_A(P, it.X, it.xl, it.xf).norm();
        if (-cx > 1e6 && ax / -cx < 1e-8) {
          status = SolveStatus::unbounded;
          break;
        }
      }
    }

    double mu = P.nl > 0 ? it.xl.dot(it.zl) : 0.0;
    for (int p = 0; p < np; ++p) mu += inner(it.X[p], it.Z[p]);
    mu /= nu;

    // Residuals and inverse duals.
    const VectorXd rp = P.b - apply_A(P, it.X, it.xl, it.xf);
    std::vector<MatrixXd> Rd(np), Zinv(np);
    bool ok = true;
    for (int p = 0; p < np; ++p) {
      Rd[p] = P.psd[p].C - adjoint_block(P.psd[p], it.y) - it.Z[p];
      Eigen::LLT<MatrixXd> llt(it.Z[p]);
      if (llt.info() != Eigen::Success) {
        ok = false;
        break;
      }
      Zinv[p] = llt.solve(MatrixXd::Identity(P.psd[p].dim, P.psd[p].dim));
      Zinv[p] = 0.5 * (Zinv[p] + Zinv[p].transpose()).eval();
    }
    if (!ok) {
      status = SolveStatus::numerical_error;
      break;
    }
    const VectorXd rdl = P.nl > 0 ? VectorXd(P.cl - P.Al.transpose() * it.y - it.zl) : VectorXd();
    const VectorXd rf = P.nf > 0 ? VectorXd(P.cf - P.Af.transpose() * it.y) : VectorXd();

    // Schur complement.
    MatrixXd M = MatrixXd::Zero(N, N);
    for (int p = 0; p < np; ++p) {
      const auto& rows = P.psd[p].rows;
      const MatrixXd& X = it.X[p];
      const MatrixXd& Zi = Zinv[p];
      for (std::size_t u = 0; u < rows.size(); ++u) {
        const auto& eu = rows[u].e;
        for (std::size_t v = u; v < rows.size(); ++v) {
          const auto& ev = rows[v].e;
          double s = 0.0;
          for (const auto& a : eu) {
            for (const auto& c : ev) s += a.v * c.v * X(a.b, c.a) * Zi(c.b, a.a);
          }
          M(rows[u].row, rows[v].row) += s;
          if (u != v) M(rows[v].row, rows[u].row) += s;
        }
      }
    }
    if (P.nl > 0) {
      const VectorXd ratio = it.xl.cwiseQuotient(it.zl);
      const Eigen::SparseMatrix<double> AD = P.Al * ratio.asDiagonal();
      M += MatrixXd(AD * P.Al.transpose());
    }

    MatrixXd K(N + P.nf, N + P.nf);
    K.setZero();
    K.topLeftCorner(N, N) = M;
    if (P.nf > 0) {
      K.topRightCorner(N, P.nf) = P.Af;
      K.bottomLeftCorner(P.nf, N) = P.Af.transpose();
    }
    Eigen::PartialPivLU<MatrixXd> lu(K);

    struct Direction {
      std::vector<MatrixXd> dX, dZ;
      VectorXd dxl, dzl, dxf, dy;
    };

    auto solve_direction = [&](double sigma, const Direction* pred) {
      Direction d;
      d.dX.resize(np);
      d.dZ.resize(np);
      VectorXd h = VectorXd::Zero(N);
      std::vector<MatrixXd> W(np);
      for (int p = 0; p < np; ++p) {
        W[p] = sigma * mu * Zinv[p] - it.X[p] - it.X[p] * Rd[p] * Zinv[p];
        if (pred) W[p] -= pred->dX[p] * pred->dZ[p] * Zinv[p];
        apply_block(P.psd[p], W[p], h);
      }
      VectorXd wl;
      if (P.nl > 0) {
        wl = (sigma * mu) * it.zl.cwiseInverse() - it.xl -
             it.xl.cwiseProduct(rdl).cwiseQuotient(it.zl);
        if (pred) wl -= pred->dxl.cwiseProduct(pred->dzl).cwiseQuotient(it.zl);
        h += P.Al * wl;
      }
      VectorXd rhs(N + P.nf);
      rhs.head(N) = rp - h;
      if (P.nf > 0) rhs.tail(P.nf) = rf;
      VectorXd sol = lu.solve(rhs);
      // One step of iterative refinement.
      sol += lu.solve(rhs - K * sol);
      d.dy = sol.head(N);
      d.dxf = P.nf > 0 ? VectorXd(sol.tail(P.nf)) : VectorXd();
      for (int p = 0; p < np; ++p) {
        d.dZ[p] = Rd[p] - adjoint_block(P.psd[p], d.dy);
        MatrixXd G = it.X[p] * d.dZ[p] * Zinv[p];
        MatrixXd dX = sigma * mu * Zinv[p] - it.X[p] - 0.5 * (G + G.transpose());
        if (pred) {
          MatrixXd H = pred->dX[p] * pred->dZ[p] * Zinv[p];
          dX -= 0.5 * (H + H.transpose());
        }
        d.dX[p] = 0.5 * (dX + dX.transpose());
      }
      if (P.nl > 0) {
        d.dzl = rdl - P.Al.transpose() * d.dy;
        d.dxl = (sigma * mu) * it.zl.cwiseInverse() - it.xl -
                it.xl.cwiseProduct(d.dzl).cwiseQuotient(it.zl);
        if (pred) d.dxl -= pred->dxl.cwiseProduct(pred->dzl).cwiseQuotient(it.zl);
      }
      return d;
    };

    auto step_limits = [&](const Direction& d) {
      double ap = kInf;
      double ad = kInf;
      for (int p = 0; p < np; ++p) {
        ap = std::min(ap, max_step_psd(it.X[p], d.dX[p]));
        ad = std::min(ad, max_step_psd(it.Z[p], d.dZ[p]));
      }
      if (P.nl > 0) {
        ap = std::min(ap, max_step_vec(it.xl, d.dxl));
        ad = std::min(ad, max_step_vec(it.zl, d.dzl));
      }
      return std::pair<double, double>{ap, ad};
    };

    const Direction pred = solve_direction(0.0, nullptr);
    auto [ap_max, ad_max] = step_limits(pred);
    const double ap_aff = std::min(1.0, ap_max);
    const double ad_aff = std::min(1.0, ad_max);
    double mu_aff = 0.0;
    for (int p = 0; p < np; ++p) {
      mu_aff += inner(it.X[p] + ap_aff * pred.dX[p], it.Z[p] + ad_aff * pred.dZ[p]);
    }
    if (P.nl > 0) mu_aff += (it.xl + ap_aff * pred.dxl).dot(it.zl + ad_aff * pred.dzl);
    mu_aff /= nu;
    const double sigma = std::clamp(std::pow(std::max(mu_aff, 0.0) / mu, 3.0), 0.0, 1.0);

    const Direction corr = solve_direction(sigma, &pred);
    auto [cp_max, cd_max] = step_limits(corr);
    const double gamma = 0.9 + 0.09 * std::min(ap_aff, ad_aff);
    const double ap = std::min(1.0, gamma * cp_max);
    const double ad = std::min(1.0, gamma * cd_max);

    for (int p = 0; p < np; ++p) {
      it.X[p] += ap * corr.dX[p];
      it.Z[p] += ad * corr.dZ[p];
    }
    if (P.nl > 0) {
      it.xl += ap * corr.dxl;
      it.zl += ad * corr.dzl;
    }
    if (P.nf > 0) it.xf += ap * corr.dxf;
    it.y += ad * corr.dy;

    if (!std::isfinite(ap) || !std::isfinite(ad)) {
      status = SolveStatus::numerical_error;
      break;
    }
    stalls = (ap < 1e-9 && ad < 1e-9) ? stalls + 1 : 0;
    if (stalls >= 3) {
      status = SolveStatus::numerical_error;
      break;
    }
  }

  if (status == SolveStatus::max_iter || status == SolveStatus::numerical_error) {
    const Metrics m = unscaled_metrics(it);
    if (m.worst() < best_m.worst()) {
      best = it;
      best_m = m;
    }
    if (best_m.worst() <= opts.tol) status = SolveStatus::optimal;
  }
  const Iterate& out = (status == SolveStatus::infeasible || status == SolveStatus::unbounded)
                           ? it
                           : best;
  const Metrics fm = unscaled_metrics(out);

  sol.status = status;
  sol.iterations = iter;
  sol.objective = fm.pobj + prog.objective_constant();
  sol.dual_objective = fm.dobj + prog.objective_constant();
  sol.residuals = {fm.pinf, fm.dinf, fm.gap};
  sol.x = prog.zero_point();
  for (std::size_t k = 0; k < prog.blocks().size(); ++k) {
    const Slot s = P.slot[k];
    const auto& bl = prog.blocks()[k];
    switch (bl.kind) {
      case ConeKind::psd:
        sol.x[k] = sc.b * out.X[s.index];
        break;
      case ConeKind::soc: {
        const MatrixXd& A = out.X[s.index];
        sol.x[k](0, 0) = sc.b * A(0, 0);
        for (int q = 1; q < bl.dim; ++q) sol.x[k](q, 0) = sc.b * A(0, q);
        break;
      }
      case ConeKind::nonneg:
        sol.x[k] = sc.b * out.xl.segment(s.index, bl.dim);
        break;
      case ConeKind::free_var:
        sol.x[k] = sc.b * out.xf.segment(s.index, bl.dim);
        break;
    }
  }
  sol.y = VectorXd::Zero(prog.num_constraints());
  for (int i = 0; i < P.rows; ++i) {
    if (P.kept_rows[i] >= 0) sol.y(P.kept_rows[i]) = sc.c * sc.row(i) * out.y(i);
  }
  char buf[160];
  std::snprintf(buf, sizeof buf, "%s after %d iterations (pinf %.2e, dinf %.2e, gap %.2e)",
                to_string(status), iter, fm.pinf, fm.dinf, fm.gap);
  sol.message = buf;
  return sol;
}

}  // namespace nrsfm::conic
