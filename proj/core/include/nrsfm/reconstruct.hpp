#pragma once

#include <optional>
#include <string>
#include <vector>

#include "nrsfm/conic/backend.hpp"
#include "nrsfm/conic/program.hpp"
#include "nrsfm/geometry.hpp"
#include "nrsfm/graph.hpp"

namespace nrsfm {

enum class Method { snr_dsl, snr_pp, qnr_dsl, qnr_pp, hnr_dsl, hnr_pp, hnr_pp_accel };

/// "snr-dsl", "hnr-pp-accel", ...
std::string to_string(Method m);
/// Accepts both '-' and '_' separators; throws InvalidArgument otherwise.
Method method_from_string(const std::string& s);
const std::vector<Method>& all_methods();

inline bool is_dsl(Method m) {
  return m == Method::snr_dsl || m == Method::qnr_dsl || m == Method::hnr_dsl;
}
inline bool is_hnr(Method m) {
  return m == Method::hnr_dsl || m == Method::hnr_pp || m == Method::hnr_pp_accel;
}
inline bool is_strict(Method m) { return m == Method::snr_dsl || m == Method::snr_pp; }

struct ReconstructionConfig {
  Method method = Method::qnr_pp;
  double lambda_I = 100.0;
  double lambda_E = 10.0;
  int knn = 4;
  E3Options e3{};
  int completion = 0;  // pseudo-neighbour count, 0 disables completion
  conic::SolverOptions solver{};

  /// Throws InvalidArgument on bad weights or counts.
  void validate() const;
};

/// Where each unknown lives in an assembled program.
struct ProgramLayout {
  Method method = Method::snr_dsl;
  int n = 0;
  int m = 0;
  SimplicialGraph graph;
  LiftIndexMaps maps;
  std::vector<int> gram;                // per image: R, S', T or U block
  int g2 = -1;                          // free block of template squared lengths
  int g3 = -1;                          // free block of template squared areas (HNR)
  std::vector<std::vector<int>> beta;   // accelerated: per image, per triangle
  std::vector<std::vector<int>> pseudo; // per image * m + j: pseudo-neighbours of hidden points
  /// Named objective parts, for the breakdown in diagnostics.
  std::vector<std::pair<std::string, conic::AffineExpr>> objective_parts;
};

struct BuiltProgram {
  conic::ConicProgram program;
  ProgramLayout layout;
};

BuiltProgram build_snr_dsl(const ObservationSet& obs, const SimplicialGraph& graph);
BuiltProgram build_qnr_dsl(const ObservationSet& obs, const SimplicialGraph& graph,
                           double lambda_I);
BuiltProgram build_snr_pp(const ObservationSet& obs, const SimplicialGraph& graph,
                          int completion = 0);
BuiltProgram build_qnr_pp(const ObservationSet& obs, const SimplicialGraph& graph,
                          double lambda_I, int completion = 0);
BuiltProgram build_hnr_dsl(const ObservationSet& obs, const SimplicialGraph& graph,
                           double lambda_I, double lambda_E);
BuiltProgram build_hnr_pp(const ObservationSet& obs, const SimplicialGraph& graph,
                          double lambda_I, double lambda_E, int completion = 0);
BuiltProgram build_hnr_pp_accel(const ObservationSet& obs, const SimplicialGraph& graph,
                                double lambda_I, double lambda_E, int completion = 0);

BuiltProgram build_program(const ObservationSet& obs, const SimplicialGraph& graph,
                           const ReconstructionConfig& cfg);

/// For each hidden (i, j): the s points nearest to j in the reference image
/// that are visible in image i. Visible entries get an empty list.
std::vector<std::vector<int>> pseudo_neighbours(const ObservationSet& obs, int s);

/// Rank-1 lift of ground-truth clouds, rescaled so the template squared
/// lengths sum to one, with auxiliary blocks completed.
std::vector<Eigen::MatrixXd> lift_ground_truth(const BuiltProgram& built,
                                               const std::vector<PointCloud>& gt);

struct FeasibilityReport {
  double max_residual = 0.0;
  double min_cone_margin = 0.0;
  double objective = 0.0;
};

FeasibilityReport check_point(const conic::ConicProgram& prog,
                              const std::vector<Eigen::MatrixXd>& x);

struct BlockSpectrum {
  std::vector<double> top;  // leading eigenvalues, descending, at most five
  double ratio = 0.0;       // second / first
};

struct Diagnostics {
  std::string status;
  int iterations = 0;
  double objective = 0.0;
  conic::Residuals residuals;
  std::vector<BlockSpectrum> spectra;  // per image
  std::vector<std::pair<std::string, double>> objective_parts;
  int negative_depths = 0;
};

struct Reconstruction {
  Method method = Method::snr_dsl;
  std::vector<PointCloud> clouds;
  std::vector<double> geodesics;  // per e2 edge
  std::vector<double> areas;      // per e3 triangle (HNR only)
  Diagnostics diagnostics;
};

/// Throws SolverError unless the solution is optimal.
Reconstruction extract_points(const BuiltProgram& built, const conic::ConicSolution& sol,
                              const ObservationSet& obs);

/// Builds, solves and extracts. Uses the default backend when none is given.
Reconstruction reconstruct(const ObservationSet& obs, const SimplicialGraph& graph,
                           const ReconstructionConfig& cfg,
                           const conic::SolverBackend* backend = nullptr);

}  // namespace nrsfm
