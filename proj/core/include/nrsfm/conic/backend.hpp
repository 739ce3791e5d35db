#pragma once

#include <memory>
#include <string>

#include "nrsfm/conic/interior_point.hpp"
#include "nrsfm/conic/program.hpp"

namespace nrsfm::conic {

class SolverBackend {
 public:
  virtual ~SolverBackend() = default;
  virtual std::string name() const = 0;
  virtual ConicSolution solve(const ConicProgram& prog, const SolverOptions& opts) const = 0;
};

class InteriorPointBackend final : public SolverBackend {
 public:
  std::string name() const override { return "interior-point"; }
  ConicSolution solve(const ConicProgram& prog, const SolverOptions& opts) const override;
};

/// Runs an external executable as
///   <command> <program.ir> <solution.sol> <tol> <max_iter>
/// exchanging data through the text formats of ir_format.hpp.
class ExternalProcessBackend final : public SolverBackend {
 public:
  explicit ExternalProcessBackend(std::string command) : command_(std::move(command)) {}
  std::string name() const override { return "external:" + command_; }
  ConicSolution solve(const ConicProgram& prog, const SolverOptions& opts) const override;

 private:
  std::string command_;
};

inline constexpr const char* kBackendEnv = "NRSFM_CONIC_BACKEND";

/// Built-in solver unless NRSFM_CONIC_BACKEND names an external command.
std::unique_ptr<SolverBackend> default_backend();

ConicSolution solve(const ConicProgram& prog, const SolverOptions& opts = {});

}  // namespace nrsfm::conic
