#include "nrsfm/conic/backend.hpp"

#include <cstdlib>
#include <filesystem>
#include <random>
#include <sstream>

#include "nrsfm/conic/ir_format.hpp"
#include "nrsfm/error.hpp"

namespace nrsfm::conic {

namespace fs = std::filesystem;

ConicSolution InteriorPointBackend::solve(const ConicProgram& prog,
                                          const SolverOptions& opts) const {
  return solve_interior_point(prog, opts);
}

namespace {

std::string quoted(const std::string& s) {
  std::string out = "'";
  for (char c : s) {
    if (c == '\'') {
      out += "'\\''";
    } else {
      out += c;
    }
  }
  return out + "'";
}

}  // namespace

ConicSolution ExternalProcessBackend::solve(const ConicProgram& prog,
                                            const SolverOptions& opts) const {
  std::random_device rd;
  const fs::path dir = fs::temp_directory_path() /
                       ("nrsfm-conic-" + std::to_string(rd()) + "-" + std::to_string(rd()));
  fs::create_directories(dir);
  const fs::path in = dir / "program.ir";
  const fs::path out = dir / "solution.sol";
  export_program(prog, in.string());

  std::ostringstream cmd;
  cmd.precision(17);
  cmd << command_ << ' ' << quoted(in.string()) << ' ' << quoted(out.string()) << ' '
      << opts.tol << ' ' << opts.max_iter;
  const int rc = std::system(cmd.str().c_str());
  if (rc != 0 || !fs::exists(out)) {
    std::error_code ec;
    fs::remove_all(dir, ec);
    throw SolverError("external solver '" + command_ + "' failed with status " +
                      std::to_string(rc));
  }
  ConicSolution sol = import_solution(out.string());
  std::error_code ec;
  fs::remove_all(dir, ec);
  if (static_cast<int>(sol.x.size()) != prog.num_blocks()) {
    throw SolverError("external solver returned a solution with the wrong block count");
  }
  return sol;
}

std::unique_ptr<SolverBackend> default_backend() {
  const char* env = std::getenv(kBackendEnv);
  if (env != nullptr && *env != '\0') return std::make_unique<ExternalProcessBackend>(env);
  return std::make_unique<InteriorPointBackend>();
}

ConicSolution solve(const ConicProgram& prog, const SolverOptions& opts) {
  return default_backend()->solve(prog, opts);
}

}  // namespace nrsfm::conic
