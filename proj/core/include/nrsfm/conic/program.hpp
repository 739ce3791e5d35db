#pragma once

#include <string>
#include <vector>

#include <Eigen/Core>

namespace nrsfm::conic {

enum class ConeKind { psd, soc, nonneg, free_var };

const char* to_string(ConeKind kind);
ConeKind cone_from_string(const std::string& s);

struct Term {
  int row = 0;
  int col = 0;
  double coef = 0.0;

  bool operator==(const Term&) const = default;
};

/// Linear functional over the entries of one block.
///
/// value(X) = constant + sum coef * X(row, col) with row <= col. An
/// off-diagonal coefficient multiplies the single stored entry, so a
/// formula referencing both X(r,c) and X(c,r) carries their combined weight.
/// Scalar blocks (nonneg, free, soc) use terms with row == col == index.
struct LinearFunctional {
  int block = -1;
  std::vector<Term> terms;
  double constant = 0.0;

  void add(int row, int col, double coef);
  /// Adds the lifted square (sum_k w_k v_k)^2 * scale, where v are variables
  /// of a symmetric matrix whose entry (a, b) stands for v_a v_b.
  void add_square(const std::vector<std::pair<int, double>>& weighted, double scale = 1.0);
  /// Merges repeated entries and drops exact zeros; sorts terms.
  void compress();
  LinearFunctional bound(int block_id) const;
  LinearFunctional& operator*=(double s);

  /// Value on a symmetric matrix (or column vector for scalar blocks).
  double evaluate(const Eigen::MatrixXd& X) const;

  bool operator==(const LinearFunctional&) const = default;
};

/// Sum of functionals, possibly over different blocks.
using AffineExpr = std::vector<LinearFunctional>;

LinearFunctional entry(int block, int row, int col, double coef = 1.0);
LinearFunctional scalar(int block, int index, double coef = 1.0);

struct Block {
  ConeKind kind = ConeKind::psd;
  int dim = 0;
  std::string label;

  bool operator==(const Block&) const = default;
};

struct Constraint {
  AffineExpr lhs;
  double rhs = 0.0;
  std::string label;

  bool operator==(const Constraint&) const = default;
};

enum class AuxKind { abs_value, inverse, square_dominance };

/// How an auxiliary block derives from the primary variables; used to
/// complete a candidate point (for example a ground-truth lift).
struct AuxRecord {
  AuxKind kind = AuxKind::abs_value;
  int block = -1;
  AffineExpr a;  // abs: difference; inverse: x; dominance: y
  AffineExpr b;  // dominance: z
};

/// Minimisation program over a product of symmetric cones with linear
/// equality constraints. Nonnegative and free blocks hold `dim` scalars.
class ConicProgram {
 public:
  int add_block(ConeKind kind, int dim, std::string label = {});
  int add_psd(int dim, std::string label = {}) { return add_block(ConeKind::psd, dim, std::move(label)); }
  int add_nonneg(int count, std::string label = {}) {
    return add_block(ConeKind::nonneg, count, std::move(label));
  }
  int add_free(int count, std::string label = {}) {
    return add_block(ConeKind::free_var, count, std::move(label));
  }

  void add_equality(AffineExpr lhs, double rhs, std::string label = {});
  void add_objective(const LinearFunctional& f);
  void add_objective(const AffineExpr& f);
  void add_aux(AuxRecord rec) { aux_.push_back(std::move(rec)); }

  const std::vector<Block>& blocks() const { return blocks_; }
  const std::vector<Constraint>& constraints() const { return constraints_; }
  const AffineExpr& objective() const { return objective_; }
  double objective_constant() const { return objective_constant_; }
  const std::vector<AuxRecord>& aux() const { return aux_; }

  int num_blocks() const { return static_cast<int>(blocks_.size()); }
  int num_constraints() const { return static_cast<int>(constraints_.size()); }

  /// Throws InvalidArgument on unresolved blocks, out-of-range terms or
  /// non-finite data.
  void validate() const;

  /// Merges objective terms per block.
  void compress_objective();

  /// Zero-initialised value storage: dim x dim for PSD, dim x 1 otherwise.
  std::vector<Eigen::MatrixXd> zero_point() const;

  double evaluate(const AffineExpr& e, const std::vector<Eigen::MatrixXd>& x) const;
  double objective_value(const std::vector<Eigen::MatrixXd>& x) const;

  /// Fills auxiliary blocks from the primary ones (exact epigraph values).
  void complete_auxiliary(std::vector<Eigen::MatrixXd>& x) const;

  /// Largest |lhs - rhs| over all rows.
  double max_residual(const std::vector<Eigen::MatrixXd>& x) const;
  /// Smallest cone margin: min eigenvalue for PSD, min entry for nonneg,
  /// x0 - |x_tail| for second-order blocks.
  double min_cone_margin(const std::vector<Eigen::MatrixXd>& x) const;

  bool operator==(const ConicProgram& o) const {
    return blocks_ == o.blocks_ && constraints_ == o.constraints_ &&
           objective_ == o.objective_ && objective_constant_ == o.objective_constant_;
  }

  void set_objective_constant(double c) { objective_constant_ = c; }

 private:
  std::vector<Block> blocks_;
  std::vector<Constraint> constraints_;
  AffineExpr objective_;
  double objective_constant_ = 0.0;
  std::vector<AuxRecord> aux_;
};

enum class SolveStatus { optimal, infeasible, unbounded, max_iter, numerical_error };

const char* to_string(SolveStatus s);
SolveStatus status_from_string(const std::string& s);

struct Residuals {
  double primal = 0.0;
  double dual = 0.0;
  double gap = 0.0;
};

struct ConicSolution {
  SolveStatus status = SolveStatus::numerical_error;
  std::vector<Eigen::MatrixXd> x;  // per block
  Eigen::VectorXd y;               // equality multipliers
  double objective = 0.0;
  double dual_objective = 0.0;
  Residuals residuals;
  int iterations = 0;
  std::string message;

  bool optimal() const { return status == SolveStatus::optimal; }
};

}  // namespace nrsfm::conic
