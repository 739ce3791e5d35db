#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "nrsfm/conic/backend.hpp"
#include "nrsfm/conic/ir_format.hpp"
#include "nrsfm/error.hpp"
#include "nrsfm/eval.hpp"
#include "nrsfm/reconstruct.hpp"
#include "nrsfm/scene_io.hpp"
#include "nrsfm/synth.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace nrsfm;

namespace {

enum Exit : int {
  kOk = 0,
  kUsage = 2,
  kGeneration = 3,
  kSolver = 4,
  kIncompatible = 5,
};

int guarded(const std::function<int()>& body) {
  try {
    return body();
  } catch (const GenerationError& e) {
    std::cerr << "generation failed: " << e.what() << '\n';
    return kGeneration;
  } catch (const SolverError& e) {
    std::cerr << "solver failed: " << e.what() << '\n';
    return kSolver;
  } catch (const IncompatibleData& e) {
    std::cerr << "incompatible data: " << e.what() << '\n';
    return kIncompatible;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  }
}

void emit(const json& doc, const std::string& out) {
  if (out.empty()) {
    std::cout << doc.dump(1) << '\n';
    return;
  }
  std::ofstream os(out);
  if (!os) throw InvalidArgument("cannot write " + out);
  os << doc.dump(1) << '\n';
}

E3Options e3_options(const std::string& mode, int cap) {
  E3Options o;
  o.cap = cap;
  if (mode == "all") {
    o.mode = E3Mode::all;
  } else if (mode == "cap") {
    o.mode = E3Mode::per_edge_cap;
  } else if (mode == "adaptive") {
    o.mode = E3Mode::adaptive;
  } else {
    throw InvalidArgument("unknown triangle mode '" + mode + "'");
  }
  return o;
}

struct GenerateArgs {
  std::string mode = "iso";
  GeneratorConfig cfg;
  std::string noise_model = "uniform";
  std::string e3 = "all";
  std::string out;
};

int cmd_generate(const GenerateArgs& a) {
  GeneratorConfig cfg = a.cfg;
  cfg.noise = a.noise_model == "gaussian" ? NoiseModel::gaussian : NoiseModel::uniform;
  cfg.e3 = e3_options(a.e3, cfg.e3.cap);
  cfg.validate();
  const SyntheticScene scene =
      a.mode == "equi" ? generate_equiareal(cfg) : generate_isometric(cfg);
  const SceneFile file = scene_from_synthetic(scene);
  if (a.out.empty()) {
    std::cout << to_json(file).dump(1) << '\n';
  } else {
    write_scene(file, a.out);
  }
  return kOk;
}

struct ReconstructArgs {
  std::string in;
  std::string out;
  std::string method = "qnr-pp";
  double lambda_I = 100.0;
  double lambda_E = 10.0;
  std::optional<int> knn;
  std::string e3 = "all";
  int e3_cap = 2;
  int complete = 0;
  std::string format = "ply";
  double tol = Tolerances::kSolverResidual;
  int max_iter = Tolerances::kSolverMaxIter;
  std::string export_ir;
};

int cmd_reconstruct(const ReconstructArgs& a) {
  const SceneFile scene = read_scene(a.in);
  const ObservationSet obs = scene.observations();

  ReconstructionConfig cfg;
  cfg.method = method_from_string(a.method);
  cfg.lambda_I = a.lambda_I;
  cfg.lambda_E = a.lambda_E;
  cfg.knn = a.knn.value_or(scene.graph_knn > 0 ? scene.graph_knn : 4);
  cfg.e3 = e3_options(a.e3, a.e3_cap);
  cfg.completion = a.complete;
  cfg.solver.tol = a.tol;
  cfg.solver.max_iter = a.max_iter;
  cfg.validate();

  const bool reuse = scene.graph && (!a.knn || *a.knn == scene.graph_knn) && a.e3 == "all";
  const SimplicialGraph graph = reuse ? *scene.graph : build_graph(obs, cfg.knn, cfg.e3);

  const BuiltProgram built = build_program(obs, graph, cfg);
  if (!a.export_ir.empty()) conic::export_program(built.program, a.export_ir);
  const conic::ConicSolution sol = conic::solve(built.program, cfg.solver);
  const Reconstruction rec = extract_points(built, sol, obs);

  json doc = to_json(rec);
  doc["config"] = {{"lambda_I", cfg.lambda_I},
                   {"lambda_E", cfg.lambda_E},
                   {"knn", cfg.knn},
                   {"completion", cfg.completion},
                   {"graph_reused", reuse},
                   {"tol", cfg.solver.tol}};
  json e2 = json::array(), e3 = json::array();
  for (const auto& [p, q] : graph.e2) e2.push_back({p, q});
  for (const auto& t : graph.e3) e3.push_back({t[0], t[1], t[2]});
  doc["graph"] = {{"e2", e2}, {"e3", e3}};

  if (!scene.gt.empty()) {
    const EvalReport r =
        evaluate(rec.clouds, scene.gt, {}, &graph, rec.geodesics, rec.areas);
    doc["metrics"] = to_json(r);
  }

  if (a.out.empty()) {
    doc["clouds"] = to_json(rec)["clouds"];
    std::cout << doc.dump(1) << '\n';
  } else {
    write_result(a.out, doc, rec.clouds, a.format == "csv" ? CloudFormat::csv : CloudFormat::ply);
  }
  return kOk;
}

struct EvaluateArgs {
  std::string recon;
  std::string gt;
  std::string out;
  std::string csv;
  bool per_frame_scale = false;
};

int cmd_evaluate(const EvaluateArgs& a) {
  std::ifstream is(a.recon);
  if (!is) throw InvalidArgument("cannot read " + a.recon);
  json rj;
  try {
    is >> rj;
  } catch (const json::exception& e) {
    throw InvalidArgument("malformed result file: " + std::string(e.what()));
  }
  const Reconstruction rec = reconstruction_from_json(rj);
  const SceneFile scene = read_scene(a.gt);
  if (scene.gt.empty()) throw InvalidArgument("scene carries no ground truth");
  if (rec.clouds.size() != scene.gt.size()) throw InvalidArgument("frame count mismatch");
  for (std::size_t i = 0; i < rec.clouds.size(); ++i) {
    if (rec.clouds[i].size() != scene.gt[i].size()) throw InvalidArgument("point count mismatch");
  }

  std::optional<SimplicialGraph> graph = scene.graph;
  if (rj.contains("graph") && scene.graph) {
    json wrapped = {{"version", kSceneVersion}, {"n", scene.n}, {"m", scene.m},
                    {"image", to_json(scene)["image"]}, {"graph", rj["graph"]}};
    graph = scene_from_json(wrapped).graph;
  }
  std::vector<double> geodesics = rec.geodesics;
  std::vector<double> areas = rec.areas;
  if (graph && geodesics.size() != graph->e2.size()) {
    geodesics = scene.gt_geodesics;
    areas = scene.gt_areas;
  }
  if (graph && !areas.empty() && areas.size() != graph->e3.size()) areas.clear();

  const EvalReport r = evaluate(rec.clouds, scene.gt, {}, graph ? &*graph : nullptr, geodesics,
                                areas, a.per_frame_scale);
  emit(to_json(r), a.out);

  std::string csv = a.csv;
  if (csv.empty() && !a.out.empty()) {
    const fs::path p(a.out);
    csv = (p.parent_path() / (p.stem().string() + "_per_frame.csv")).string();
  }
  if (!csv.empty()) {
    std::ofstream os(csv);
    if (!os) throw InvalidArgument("cannot write " + csv);
    write_per_frame_csv(os, r.per_frame);
  }
  return kOk;
}

struct Lemma1Args {
  long samples = 100000;
  double h1_max = 0.1;
  double h2_max = 0.1;
  double edge_scale = 0.6;
  std::uint64_t seed = 0;
  std::string out;
};

int cmd_lemma1(const Lemma1Args& a) {
  if (a.samples <= 0 || a.h1_max < 0.0 || a.h2_max < 0.0 || !(a.edge_scale > 0.0)) {
    throw InvalidArgument("invalid sampler ranges");
  }
  const Lemma1Result r = lemma1_sample(a.samples, a.h1_max, a.h2_max, a.edge_scale, a.seed);
  emit({{"first", r.first},
        {"second", r.second},
        {"samples", r.samples},
        {"h1_max", a.h1_max},
        {"h2_max", a.h2_max},
        {"edge_scale", a.edge_scale},
        {"seed", a.seed}},
       a.out);
  return kOk;
}

struct SolveIrArgs {
  std::string in;
  std::string out;
  double tol = Tolerances::kSolverResidual;
  int max_iter = Tolerances::kSolverMaxIter;
};

int cmd_solve_ir(const SolveIrArgs& a) {
  const conic::ConicProgram prog = conic::import_program(a.in);
  conic::SolverOptions opts;
  opts.tol = a.tol;
  opts.max_iter = a.max_iter;
  const conic::ConicSolution sol = conic::InteriorPointBackend{}.solve(prog, opts);
  conic::export_solution(sol, a.out);
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Convex non-rigid structure-from-motion"};
  app.require_subcommand(1);

  GenerateArgs gen;
  auto* g = app.add_subcommand("generate", "Generate a synthetic scene");
  g->add_option("--mode", gen.mode, "iso or equi")->check(CLI::IsMember({"iso", "equi"}));
  g->add_option("--ma", gen.cfg.m_a, "Grid points along the first axis")->check(CLI::Range(2, 1000));
  g->add_option("--mb", gen.cfg.m_b, "Grid points along the second axis")->check(CLI::Range(2, 1000));
  g->add_option("--frames", gen.cfg.n, "Number of images")->check(CLI::PositiveNumber);
  g->add_option("--noise", gen.cfg.x_sigma, "Pixel noise multiplier")->check(CLI::NonNegativeNumber);
  g->add_option("--noise-model", gen.noise_model)->check(CLI::IsMember({"uniform", "gaussian"}));
  g->add_option("--chi-e", gen.cfg.chi_e, "Equiareal perturbation")->check(CLI::NonNegativeNumber);
  g->add_option("--seed", gen.cfg.seed);
  g->add_option("--knn", gen.cfg.knn)->check(CLI::PositiveNumber);
  g->add_option("--e3", gen.e3, "all, cap or adaptive")->check(CLI::IsMember({"all", "cap", "adaptive"}));
  g->add_option("--e3-cap", gen.cfg.e3.cap)->check(CLI::PositiveNumber);
  g->add_option("--hidden", gen.cfg.hidden_fraction, "Share of points hidden in images 2..n")
      ->check(CLI::Range(0.0, 0.99));
  g->add_option("--depth-min", gen.cfg.depth_min)->check(CLI::PositiveNumber);
  g->add_option("--depth-max", gen.cfg.depth_max)->check(CLI::PositiveNumber);
  g->add_option("--max-curvature", gen.cfg.max_curvature)->check(CLI::NonNegativeNumber);
  g->add_flag("--flat", gen.cfg.flat, "Disable bending");
  g->add_option("--out", gen.out, "Scene file (stdout when omitted)");

  ReconstructArgs rec;
  auto* r = app.add_subcommand("reconstruct", "Reconstruct a scene");
  r->add_option("--in", rec.in)->required()->check(CLI::ExistingFile);
  r->add_option("--out", rec.out, "Result JSON; clouds are written next to it");
  r->add_option("--method", rec.method)
      ->check(CLI::IsMember({"snr-dsl", "snr-pp", "qnr-dsl", "qnr-pp", "hnr-dsl", "hnr-pp",
                             "hnr-pp-accel"}));
  r->add_option("--lambda-i", rec.lambda_I)->check(CLI::NonNegativeNumber);
  r->add_option("--lambda-e", rec.lambda_E)->check(CLI::NonNegativeNumber);
  r->add_option("--knn", rec.knn)->check(CLI::PositiveNumber);
  r->add_option("--e3", rec.e3)->check(CLI::IsMember({"all", "cap", "adaptive"}));
  r->add_option("--e3-cap", rec.e3_cap)->check(CLI::PositiveNumber);
  r->add_option("--complete-missing", rec.complete, "Pseudo-neighbours per hidden point")
      ->check(CLI::NonNegativeNumber);
  r->add_option("--format", rec.format)->check(CLI::IsMember({"ply", "csv"}));
  r->add_option("--tol", rec.tol)->check(CLI::PositiveNumber);
  r->add_option("--max-iter", rec.max_iter)->check(CLI::PositiveNumber);
  r->add_option("--export-ir", rec.export_ir, "Also write the conic program");

  EvaluateArgs ev;
  auto* e = app.add_subcommand("evaluate", "Compare a reconstruction with ground truth");
  e->add_option("--recon", ev.recon)->required()->check(CLI::ExistingFile);
  e->add_option("--gt", ev.gt, "Scene with ground truth")->required()->check(CLI::ExistingFile);
  e->add_option("--out", ev.out);
  e->add_option("--csv", ev.csv, "Per-frame RMS table");
  e->add_flag("--per-frame-scale", ev.per_frame_scale);

  Lemma1Args lem;
  auto* l = app.add_subcommand("lemma1", "Discriminant sign sampler");
  l->add_option("--samples", lem.samples);
  l->add_option("--h1-max", lem.h1_max);
  l->add_option("--h2-max", lem.h2_max);
  l->add_option("--edge-scale", lem.edge_scale);
  l->add_option("--seed", lem.seed);
  l->add_option("--out", lem.out);

  SolveIrArgs ir;
  auto* s = app.add_subcommand("solve-ir", "Solve a conic program file");
  s->add_option("program", ir.in)->required()->check(CLI::ExistingFile);
  s->add_option("solution", ir.out)->required();
  s->add_option("tol", ir.tol);
  s->add_option("max_iter", ir.max_iter);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& ex) {
    return app.exit(ex);
  } catch (const CLI::ParseError& ex) {
    app.exit(ex);
    return kUsage;
  }

  if (*g) return guarded([&] { return cmd_generate(gen); });
  if (*r) return guarded([&] { return cmd_reconstruct(rec); });
  if (*e) return guarded([&] { return cmd_evaluate(ev); });
  if (*l) return guarded([&] { return cmd_lemma1(lem); });
  if (*s) return guarded([&] { return cmd_solve_ir(ir); });
  return kUsage;
}
