#include "nrsfm/conic/ir_format.hpp"

#include <fstream>
#include <iomanip>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include "nrsfm/error.hpp"

namespace nrsfm::conic {

namespace {

std::string encode_label(const std::string& s) {
  if (s.empty()) return "-";
  std::string out = s;
  for (char& c : out) {
    if (c == ' ' || c == '\t' || c == '\n' || c == '\r') c = '_';
  }
  return out;
}

std::string decode_label(const std::string& s) { return s == "-" ? std::string{} : s; }

void expect(std::istream& is, const std::string& word) {
  std::string got;
  if (!(is >> got) || got != word) {
    throw InvalidArgument("malformed file: expected '" + word + "', found '" + got + "'");
  }
}

template <typename T>
T read_value(std::istream& is, const char* what) {
  T v{};
  if (!(is >> v)) throw InvalidArgument(std::string("malformed file: cannot read ") + what);
  return v;
}

void write_expr(std::ostream& os, const AffineExpr& e) {
  for (const auto& f : e) {
    os << "f " << f.block << ' ' << f.terms.size() << '\n';
    for (const auto& t : f.terms) os << t.row << ' ' << t.col << ' ' << t.coef << '\n';
  }
}

AffineExpr read_expr(std::istream& is, long count) {
  AffineExpr e;
  e.reserve(static_cast<std::size_t>(count));
  for (long k = 0; k < count; ++k) {
    expect(is, "f");
    LinearFunctional f;
    f.block = read_value<int>(is, "block");
    const long nt = read_value<long>(is, "term count");
    for (long q = 0; q < nt; ++q) {
      Term t;
      t.row = read_value<int>(is, "row");
      t.col = read_value<int>(is, "col");
      t.coef = read_value<double>(is, "coefficient");
      f.terms.push_back(t);
    }
    e.push_back(std::move(f));
  }
  return e;
}

}  // namespace

void write_program(std::ostream& os, const ConicProgram& prog) {
  os << std::setprecision(17);
  os << "CONIC-IR 1\n";
  os << "blocks " << prog.num_blocks() << '\n';
  for (int k = 0; k < prog.num_blocks(); ++k) {
    const auto& b = prog.blocks()[k];
    os << k << ' ' << to_string(b.kind) << ' ' << b.dim << ' ' << encode_label(b.label) << '\n';
  }
  os << "objective " << prog.objective_constant() << ' ' << prog.objective().size() << '\n';
  write_expr(os, prog.objective());
  os << "constraints " << prog.num_constraints() << '\n';
  for (int i = 0; i < prog.num_constraints(); ++i) {
    const auto& c = prog.constraints()[i];
    os << "row " << i << ' ' << c.rhs << ' ' << c.lhs.size() << ' ' << encode_label(c.label) << '\n';
    write_expr(os, c.lhs);
  }
  os << "end\n";
}

ConicProgram read_program(std::istream& is) {
  expect(is, "CONIC-IR");
  const int version = read_value<int>(is, "version");
  if (version != 1) throw InvalidArgument("unsupported IR version " + std::to_string(version));

  ConicProgram prog;
  expect(is, "blocks");
  const int nb = read_value<int>(is, "block count");
  for (int k = 0; k < nb; ++k) {
    const int id = read_value<int>(is, "block id");
    if (id != k) throw InvalidArgument("block ids must be consecutive");
    const auto kind = cone_from_string(read_value<std::string>(is, "cone"));
    const int dim = read_value<int>(is, "dimension");
    prog.add_block(kind, dim, decode_label(read_value<std::string>(is, "label")));
  }

  expect(is, "objective");
  prog.set_objective_constant(read_value<double>(is, "objective constant"));
  const long nobj = read_value<long>(is, "objective size");
  for (auto& f : read_expr(is, nobj)) prog.add_objective(f);

  expect(is, "constraints");
  const int nc = read_value<int>(is, "constraint count");
  for (int i = 0; i < nc; ++i) {
    expect(is, "row");
    if (read_value<int>(is, "row index") != i) throw InvalidArgument("rows must be consecutive");
    const double rhs = read_value<double>(is, "rhs");
    const long nf = read_value<long>(is, "functional count");
    const std::string label = decode_label(read_value<std::string>(is, "label"));
    prog.add_equality(read_expr(is, nf), rhs, label);
  }
  expect(is, "end");
  prog.validate();
  return prog;
}

void export_program(const ConicProgram& prog, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw Error("cannot open '" + path + "' for writing");
  write_program(os, prog);
  if (!os) throw Error("failed writing '" + path + "'");
}

ConicProgram import_program(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw Error("cannot open '" + path + "'");
  return read_program(is);
}

void write_solution(std::ostream& os, const ConicSolution& sol) {
  os << std::setprecision(17);
  os << "CONIC-SOL 1\n";
  os << "status " << to_string(sol.status) << '\n';
  os << "objective " << sol.objective << ' ' << sol.dual_objective << '\n';
  os << "residuals " << sol.residuals.primal << ' ' << sol.residuals.dual << ' '
     << sol.residuals.gap << '\n';
  os << "iterations " << sol.iterations << '\n';
  for (std::size_t k = 0; k < sol.x.size(); ++k) {
    const auto& X = sol.x[k];
    os << "block " << k << ' ' << X.rows() << ' ' << X.cols() << '\n';
    for (int r = 0; r < X.rows(); ++r) {
      for (int c = 0; c < X.cols(); ++c) os << X(r, c) << (c + 1 < X.cols() ? ' ' : '\n');
    }
  }
  os << "dual " << sol.y.size() << '\n';
  for (int i = 0; i < sol.y.size(); ++i) os << sol.y(i) << '\n';
  os << "end\n";
}

ConicSolution read_solution(std::istream& is) {
  expect(is, "CONIC-SOL");
  if (read_value<int>(is, "version") != 1) throw InvalidArgument("unsupported solution version");
  ConicSolution sol;
  expect(is, "status");
  sol.status = status_from_string(read_value<std::string>(is, "status"));
  expect(is, "objective");
  sol.objective = read_value<double>(is, "objective");
  sol.dual_objective = read_value<double>(is, "dual objective");
  expect(is, "residuals");
  sol.residuals.primal = read_value<double>(is, "residual");
  sol.residuals.dual = read_value<double>(is, "residual");
  sol.residuals.gap = read_value<double>(is, "residual");
  expect(is, "iterations");
  sol.iterations = read_value<int>(is, "iterations");
  std::string word;
  while (is >> word && word == "block") {
    const auto id = read_value<std::size_t>(is, "block id");
    if (id != sol.x.size()) throw InvalidArgument("solution blocks must be consecutive");
    const int rows = read_value<int>(is, "rows");
    const int cols = read_value<int>(is, "cols");
    Eigen::MatrixXd X(rows, cols);
    for (int r = 0; r < rows; ++r) {
      for (int c = 0; c < cols; ++c) X(r, c) = read_value<double>(is, "value");
    }
    sol.x.push_back(std::move(X));
  }
  if (word != "dual") throw InvalidArgument("malformed solution: expected 'dual'");
  const int ny = read_value<int>(is, "dual size");
  sol.y.resize(ny);
  for (int i = 0; i < ny; ++i) sol.y(i) = read_value<double>(is, "dual value");
  expect(is, "end");
  return sol;
}

void export_solution(const ConicSolution& sol, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw Error("cannot open '" + path + "' for writing");
  write_solution(os, sol);
}

ConicSolution import_solution(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw Error("cannot open '" + path + "'");
  return read_solution(is);
}

}  // namespace nrsfm::conic
