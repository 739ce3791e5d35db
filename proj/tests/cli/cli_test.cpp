#include <gtest/gtest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "nrsfm/scene_io.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const fs::path& workdir() {
  static const fs::path dir = [] {
    auto d = fs::temp_directory_path() / ("nrsfm_cli_test_" + std::to_string(::getpid()));
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

int run(const std::string& args, const std::string& env = {}) {
  const std::string cmd =
      env + " '" + std::string(NRSFM_CLI) + "' " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string path(const std::string& name) { return (workdir() / name).string(); }

std::string slurp(const std::string& p) {
  std::ifstream is(p);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

json load(const std::string& p) { return json::parse(slurp(p)); }

const std::string& iso_scene() {
  static const std::string p = [] {
    const auto out = path("iso.json");
    EXPECT_EQ(run("generate --mode iso --ma 4 --mb 4 --frames 3 --seed 7 --out " + out), 0);
    return out;
  }();
  return p;
}

}  // namespace

TEST(Generate, SceneShape) {
  const auto doc = load(iso_scene());
  EXPECT_EQ(doc["m"], 16);
  EXPECT_EQ(doc["n"], 3);
  EXPECT_EQ(doc["version"], 1);
  EXPECT_EQ(doc["generator"]["seed"], 7);
  EXPECT_NO_THROW(nrsfm::read_scene(iso_scene()));
}

TEST(Generate, Deterministic) {
  const auto again = path("iso_again.json");
  ASSERT_EQ(run("generate --mode iso --ma 4 --mb 4 --frames 3 --seed 7 --out " + again), 0);
  EXPECT_EQ(slurp(again), slurp(iso_scene()));
}

TEST(Generate, EquiarealResidual) {
  const auto out = path("equi.json");
  ASSERT_EQ(run("generate --mode equi --ma 3 --mb 3 --frames 3 --chi-e 0.5 --seed 2 --out " + out), 0);
  const auto doc = load(out);
  EXPECT_LE(doc["generator"]["max_area_residual"].get<double>(), 1e-6);
}

TEST(Generate, BadFlags) {
  EXPECT_EQ(run("generate --mode sphere"), 2);
  EXPECT_EQ(run("generate --ma 1"), 2);
  EXPECT_EQ(run("frobnicate"), 2);
}

TEST(Reconstruct, SnrDslOnNoiselessScene) {
  const auto out = path("snr.json");
  ASSERT_EQ(run("reconstruct --in " + iso_scene() + " --method snr-dsl --knn 4 --out " + out), 0);
  const auto doc = load(out);
  EXPECT_LE(doc["metrics"]["rms_pct_diameter"].get<double>(), 2.0);
  EXPECT_EQ(doc["cloud_files"].size(), 3u);
  for (int i = 0; i < 3; ++i) EXPECT_TRUE(fs::exists(path("snr_frame" + std::to_string(i) + ".ply")));
}

TEST(Reconstruct, HnrReportsAreaDeviation) {
  const auto scene = path("equi_hnr.json");
  ASSERT_EQ(run("generate --mode equi --ma 3 --mb 3 --frames 3 --chi-e 0.3 --seed 4 --out " + scene), 0);
  const auto out = path("hnr.json");
  ASSERT_EQ(run("reconstruct --in " + scene + " --method hnr-dsl --format csv --out " + out), 0);
  const auto doc = load(out);
  EXPECT_TRUE(doc["metrics"].contains("aE"));
  EXPECT_TRUE(doc.contains("areas"));
  EXPECT_TRUE(fs::exists(path("hnr_frame0.csv")));
}

TEST(Reconstruct, HiddenPointsWithDsl) {
  const auto scene = path("hidden.json");
  ASSERT_EQ(run("generate --ma 3 --mb 3 --frames 3 --hidden 0.2 --seed 3 --out " + scene), 0);
  EXPECT_EQ(run("reconstruct --in " + scene + " --method snr-dsl --out " + path("h.json")), 5);
  EXPECT_EQ(run("reconstruct --in " + scene + " --method qnr-pp --complete-missing 3 --out " +
                path("h.json")),
            0);
}

TEST(Reconstruct, IterationCapIsSolverFailure) {
  EXPECT_EQ(run("reconstruct --in " + iso_scene() + " --max-iter 1 --out " + path("cap.json")), 4);
}

TEST(Reconstruct, ExternalBackendMatchesBuiltIn) {
  const auto scene = path("ext_scene.json");
  ASSERT_EQ(run("generate --ma 3 --mb 3 --frames 2 --seed 5 --out " + scene), 0);
  const auto a = path("int.json"), b = path("ext.json");
  ASSERT_EQ(run("reconstruct --in " + scene + " --out " + a), 0);
  const std::string env =
      std::string("NRSFM_CONIC_BACKEND=\"'") + NRSFM_CLI + "' solve-ir\"";
  ASSERT_EQ(run("reconstruct --in " + scene + " --out " + b, env), 0);
  const double oa = load(a)["diagnostics"]["objective"];
  const double ob = load(b)["diagnostics"]["objective"];
  EXPECT_NEAR(oa, ob, 1e-8 * (1.0 + std::abs(oa)));
}

TEST(Evaluate, GroundTruthAgainstItself) {
  const auto scene = nrsfm::read_scene(iso_scene());
  nrsfm::Reconstruction r;
  r.clouds = scene.gt;
  std::ofstream(path("gt_recon.json")) << nrsfm::to_json(r).dump();
  for (auto& X : r.clouds)
    for (auto& P : X) P *= 0.5;
  std::ofstream(path("half_recon.json")) << nrsfm::to_json(r).dump();

  ASSERT_EQ(run("evaluate --recon " + path("gt_recon.json") + " --gt " + iso_scene() + " --out " +
                path("eval.json")),
            0);
  const auto e = load(path("eval.json"));
  EXPECT_NEAR(e["rms"].get<double>(), 0.0, 1e-12);
  EXPECT_NEAR(e["scale"].get<double>(), 1.0, 1e-12);
  const auto table = slurp(path("eval_per_frame.csv"));
  EXPECT_EQ(table.rfind("frame,rms\n", 0), 0u);

  ASSERT_EQ(run("evaluate --recon " + path("half_recon.json") + " --gt " + iso_scene() +
                " --out " + path("eval_half.json")),
            0);
  EXPECT_NEAR(load(path("eval_half.json"))["scale"].get<double>(), 2.0, 1e-12);
}

TEST(Evaluate, MismatchedDimensions) {
  nrsfm::Reconstruction r;
  r.clouds = {nrsfm::PointCloud(4, nrsfm::Vec3(0, 0, 1))};
  std::ofstream(path("tiny.json")) << nrsfm::to_json(r).dump();
  EXPECT_EQ(run("evaluate --recon " + path("tiny.json") + " --gt " + iso_scene()), 2);
}

TEST(Lemma1, Fractions) {
  const auto out = path("lemma1.json");
  ASSERT_EQ(run("lemma1 --samples 20000 --h1-max 0.1 --h2-max 0.1 --edge-scale 0.6 --out " + out), 0);
  const auto doc = load(out);
  EXPECT_GE(doc["first"].get<double>(), 0.75);
  EXPECT_GE(doc["second"].get<double>(), 0.75);
  EXPECT_EQ(doc["samples"], 20000);
}
