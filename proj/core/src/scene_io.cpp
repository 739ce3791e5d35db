#include "nrsfm/scene_io.hpp"

#include <fstream>
#include <iomanip>
#include <limits>
#include <set>
#include <sstream>

#include "nrsfm/error.hpp"

namespace nrsfm {

using nlohmann::json;

namespace {

json vec_json(const Vec2& v) { return json::array({v.x(), v.y()}); }
json vec_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

Vec2 vec2_from(const json& j) {
  if (!j.is_array() || j.size() != 2) throw InvalidArgument("expected a 2-vector");
  return {j[0].get<double>(), j[1].get<double>()};
}

Vec3 vec3_from(const json& j) {
  if (!j.is_array() || j.size() != 3) throw InvalidArgument("expected a 3-vector");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

json clouds_json(const std::vector<PointCloud>& clouds) {
  json out = json::array();
  for (const auto& c : clouds) {
    json frame = json::array();
    for (const auto& p : c) frame.push_back(vec_json(p));
    out.push_back(std::move(frame));
  }
  return out;
}

std::vector<PointCloud> clouds_from(const json& j) {
  std::vector<PointCloud> out;
  for (const auto& frame : j) {
    PointCloud c;
    for (const auto& p : frame) c.push_back(vec3_from(p));
    out.push_back(std::move(c));
  }
  return out;
}

SimplicialGraph graph_from(int m, const json& j) {
  SimplicialGraph g;
  g.m = m;
  for (const auto& e : j.at("e2")) g.e2.emplace_back(e.at(0).get<int>(), e.at(1).get<int>());
  for (const auto& t : j.value("e3", json::array())) {
    g.e3.push_back({t.at(0).get<int>(), t.at(1).get<int>(), t.at(2).get<int>()});
  }
  std::set<Edge> lifted;
  for (const auto& t : g.e3) {
    lifted.insert({t[0], t[1]});
    lifted.insert({t[1], t[2]});
    lifted.insert({t[0], t[2]});
  }
  g.lifted.assign(lifted.begin(), lifted.end());
  g.validate();
  return g;
}

json graph_json(const SimplicialGraph& g, int knn) {
  json e2 = json::array(), e3 = json::array();
  for (const auto& [a, b] : g.e2) e2.push_back({a, b});
  for (const auto& t : g.e3) e3.push_back({t[0], t[1], t[2]});
  return {{"knn", knn}, {"e2", e2}, {"e3", e3}};
}

bool same_graph(const std::optional<SimplicialGraph>& a, const std::optional<SimplicialGraph>& b) {
  if (a.has_value() != b.has_value()) return false;
  if (!a) return true;
  return a->m == b->m && a->e2 == b->e2 && a->e3 == b->e3 && a->lifted == b->lifted;
}

json generator_json(const SyntheticScene& s) {
  const auto& c = s.config;
  double max_area = 0.0;
  for (double r : s.area_residuals) max_area = std::max(max_area, r);
  json e3mode = c.e3.mode == E3Mode::all ? "all" : c.e3.mode == E3Mode::adaptive ? "adaptive" : "cap";
  return {
      {"mode", s.mode},
      {"seed", c.seed},
      {"ma", c.m_a},
      {"mb", c.m_b},
      {"frames", c.n},
      {"noise", c.x_sigma},
      {"noise_model", c.noise == NoiseModel::uniform ? "uniform" : "gaussian"},
      {"chi_e", c.chi_e},
      {"depth_min", c.depth_min},
      {"depth_max", c.depth_max},
      {"max_tilt_deg", c.max_tilt_deg},
      {"max_curvature", c.max_curvature},
      {"bend_segments", c.bend_segments},
      {"flat", c.flat},
      {"hidden_fraction", c.hidden_fraction},
      {"knn", c.knn},
      {"e3_mode", e3mode},
      {"e3_cap", c.e3.cap},
      {"bending_deviation", s.bending_deviation},
      {"isometry_residual", s.isometry_residual},
      {"max_area_residual", max_area},
      {"mean_template_area", s.mean_template_area},
  };
}

}  // namespace

void SceneFile::validate() const {
  if (version != kSceneVersion) throw InvalidArgument("unsupported scene version");
  if (n < 1 || m < 1) throw InvalidArgument("scene needs n >= 1 and m >= 1");
  const std::size_t N = static_cast<std::size_t>(n) * m;
  if (image.size() != N || visibility.size() != N) {
    throw InvalidArgument("correspondence arrays do not match n * m");
  }
  if (!gt.empty()) {
    if (static_cast<int>(gt.size()) != n) throw InvalidArgument("ground truth frame count mismatch");
    for (const auto& c : gt) {
      if (static_cast<int>(c.size()) != m) throw InvalidArgument("ground truth point count mismatch");
    }
  }
  if (graph) {
    if (graph->m != m) throw InvalidArgument("graph size mismatch");
    if (!gt_geodesics.empty() && gt_geodesics.size() != graph->e2.size()) {
      throw InvalidArgument("geodesic count mismatch");
    }
    if (!gt_areas.empty() && gt_areas.size() != graph->e3.size()) {
      throw InvalidArgument("area count mismatch");
    }
  }
}

ObservationSet SceneFile::observations() const {
  validate();
  if (intrinsics) return normalize(image, n, m, *intrinsics, visibility);
  std::vector<Vec3> pts(image.size(), Vec3::Zero());
  for (std::size_t k = 0; k < image.size(); ++k) {
    if (visibility[k]) pts[k] = Vec3(image[k].x(), image[k].y(), 1.0);
  }
  return ObservationSet::from_normalized(n, m, std::move(pts), visibility);
}

bool SceneFile::operator==(const SceneFile& o) const {
  auto same_k = [](const std::optional<CameraIntrinsics>& a, const std::optional<CameraIntrinsics>& b) {
    if (a.has_value() != b.has_value()) return false;
    return !a || (a->fx == b->fx && a->fy == b->fy && a->cx == b->cx && a->cy == b->cy);
  };
  return version == o.version && n == o.n && m == o.m && same_k(intrinsics, o.intrinsics) &&
         image == o.image && visibility == o.visibility && gt == o.gt &&
         same_graph(graph, o.graph) && graph_knn == o.graph_knn &&
         gt_geodesics == o.gt_geodesics && gt_areas == o.gt_areas && generator == o.generator;
}

SceneFile scene_from_synthetic(const SyntheticScene& s) {
  SceneFile f;
  f.n = s.config.n;
  f.m = s.config.m();
  f.intrinsics = s.camera;
  f.image = s.pixels;
  f.visibility = s.visibility;
  for (std::size_t k = 0; k < f.image.size(); ++k) {
    if (!f.visibility[k]) f.image[k] = Vec2::Zero();
  }
  f.gt = s.gt_clouds;
  f.graph = s.graph;
  f.graph_knn = s.config.knn;
  f.gt_geodesics = s.gt_geodesics;
  f.gt_areas = s.gt_areas;
  f.generator = generator_json(s);
  return f;
}

json to_json(const SceneFile& s) {
  s.validate();
  json j;
  j["version"] = s.version;
  j["n"] = s.n;
  j["m"] = s.m;
  if (s.intrinsics) {
    j["intrinsics"] = {{"fx", s.intrinsics->fx},
                       {"fy", s.intrinsics->fy},
                       {"cx", s.intrinsics->cx},
                       {"cy", s.intrinsics->cy}};
  }
  j["coordinates"] = s.intrinsics ? "pixel" : "normalized";
  json image = json::array(), vis = json::array();
  for (int i = 0; i < s.n; ++i) {
    json row = json::array(), vrow = json::array();
    for (int q = 0; q < s.m; ++q) {
      const std::size_t k = static_cast<std::size_t>(i) * s.m + q;
      row.push_back(vec_json(s.image[k]));
      vrow.push_back(static_cast<int>(s.visibility[k]));
    }
    image.push_back(std::move(row));
    vis.push_back(std::move(vrow));
  }
  j["image"] = std::move(image);
  j["visibility"] = std::move(vis);
  if (!s.gt.empty()) j["gt"] = clouds_json(s.gt);
  if (s.graph) j["graph"] = graph_json(*s.graph, s.graph_knn);
  if (!s.gt_geodesics.empty()) j["gt_geodesics"] = s.gt_geodesics;
  if (!s.gt_areas.empty()) j["gt_areas"] = s.gt_areas;
  j["generator"] = s.generator;
  return j;
}

SceneFile scene_from_json(const json& j) {
  try {
    SceneFile s;
    if (!j.contains("version")) throw InvalidArgument("scene file lacks a version field");
    s.version = j.at("version").get<int>();
    s.n = j.at("n").get<int>();
    s.m = j.at("m").get<int>();
    if (j.contains("intrinsics")) {
      const auto& k = j["intrinsics"];
      s.intrinsics = CameraIntrinsics{k.at("fx").get<double>(), k.at("fy").get<double>(),
                                      k.at("cx").get<double>(), k.at("cy").get<double>()};
      s.intrinsics->validate();
    }
    for (const auto& row : j.at("image")) {
      for (const auto& p : row) s.image.push_back(vec2_from(p));
    }
    if (j.contains("visibility")) {
      for (const auto& row : j["visibility"]) {
        for (const auto& v : row) s.visibility.push_back(v.get<int>() != 0 ? 1 : 0);
      }
    } else {
      s.visibility.assign(s.image.size(), 1);
    }
    if (j.contains("gt")) s.gt = clouds_from(j["gt"]);
    if (j.contains("graph")) {
      s.graph = graph_from(s.m, j["graph"]);
      s.graph_knn = j["graph"].value("knn", 0);
    }
    if (j.contains("gt_geodesics")) s.gt_geodesics = j["gt_geodesics"].get<std::vector<double>>();
    if (j.contains("gt_areas")) s.gt_areas = j["gt_areas"].get<std::vector<double>>();
    if (j.contains("generator")) s.generator = j["generator"];
    s.validate();
    return s;
  } catch (const json::exception& e) {
    throw InvalidArgument(std::string("malformed scene file: ") + e.what());
  }
}

void write_scene(const SceneFile& s, const std::filesystem::path& path) {
  std::ofstream os(path);
  if (!os) throw InvalidArgument("cannot write " + path.string());
  os << to_json(s).dump(1) << '\n';
}

SceneFile read_scene(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw InvalidArgument("cannot read " + path.string());
  json j;
  try {
    is >> j;
  } catch (const json::exception& e) {
    throw InvalidArgument("malformed scene file: " + std::string(e.what()));
  }
  return scene_from_json(j);
}

void write_ply(std::ostream& os, const PointCloud& cloud) {
  os << "ply\nformat ascii 1.0\nelement vertex " << cloud.size()
     << "\nproperty double x\nproperty double y\nproperty double z\nend_header\n";
  os << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (const auto& p : cloud) os << p.x() << ' ' << p.y() << ' ' << p.z() << '\n';
}

PointCloud read_ply(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != "ply") throw InvalidArgument("not a PLY file");
  long count = -1;
  while (std::getline(is, line) && line != "end_header") {
    std::istringstream ls(line);
    std::string a, b;
    ls >> a;
    if (a == "format") {
      ls >> b;
      if (b != "ascii") throw InvalidArgument("only ascii PLY is supported");
    } else if (a == "element") {
      ls >> b;
      if (b == "vertex") ls >> count;
    }
  }
  if (count < 0) throw InvalidArgument("PLY file has no vertex element");
  PointCloud out(count);
  for (auto& p : out) {
    if (!(is >> p.x() >> p.y() >> p.z())) throw InvalidArgument("truncated PLY file");
    std::getline(is, line);
  }
  return out;
}

void write_csv(std::ostream& os, const PointCloud& cloud) {
  os << "x,y,z\n" << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (const auto& p : cloud) os << p.x() << ',' << p.y() << ',' << p.z() << '\n';
}

PointCloud read_csv(std::istream& is) {
  std::string line;
  std::getline(is, line);
  PointCloud out;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ls(line);
    Vec3 p;
    if (!(ls >> p.x() >> p.y() >> p.z())) throw InvalidArgument("malformed CSV row");
    out.push_back(p);
  }
  return out;
}

json to_json(const EvalReport& r) {
  json j = {{"scale", r.scale},
            {"rms", r.rms},
            {"med", r.med},
            {"diameter", r.diameter},
            {"rms_pct_diameter", r.diameter > 0.0 ? 100.0 * r.rms / r.diameter : 0.0},
            {"per_frame_rms", r.per_frame}};
  if (r.gE) j["gE"] = *r.gE;
  if (r.aE) j["aE"] = *r.aE;
  return j;
}

json to_json(const Reconstruction& r) {
  const auto& d = r.diagnostics;
  json spectra = json::array();
  for (const auto& s : d.spectra) spectra.push_back({{"top", s.top}, {"ratio", s.ratio}});
  json parts = json::object();
  for (const auto& [name, v] : d.objective_parts) parts[name] = v;
  json j = {{"version", kResultVersion},
            {"method", to_string(r.method)},
            {"clouds", clouds_json(r.clouds)},
            {"geodesics", r.geodesics},
            {"diagnostics",
             {{"status", d.status},
              {"iterations", d.iterations},
              {"objective", d.objective},
              {"residuals",
               {{"primal", d.residuals.primal}, {"dual", d.residuals.dual}, {"gap", d.residuals.gap}}},
              {"spectra", spectra},
              {"objective_parts", parts},
              {"negative_depths", d.negative_depths}}}};
  if (!r.areas.empty()) j["areas"] = r.areas;
  return j;
}

Reconstruction reconstruction_from_json(const json& j) {
  try {
    Reconstruction r;
    if (j.contains("method")) r.method = method_from_string(j["method"].get<std::string>());
    r.clouds = clouds_from(j.at("clouds"));
    if (j.contains("geodesics")) r.geodesics = j["geodesics"].get<std::vector<double>>();
    if (j.contains("areas")) r.areas = j["areas"].get<std::vector<double>>();
    return r;
  } catch (const json::exception& e) {
    throw InvalidArgument(std::string("malformed result file: ") + e.what());
  }
}

std::vector<std::filesystem::path> write_result(const std::filesystem::path& json_path,
                                                const json& doc,
                                                const std::vector<PointCloud>& clouds,
                                                CloudFormat format) {
  std::vector<std::filesystem::path> written;
  const auto dir = json_path.parent_path();
  const std::string stem = json_path.stem().string();
  json files = json::array();
  for (std::size_t i = 0; i < clouds.size(); ++i) {
    const auto p = dir / (stem + "_frame" + std::to_string(i) +
                          (format == CloudFormat::ply ? ".ply" : ".csv"));
    std::ofstream os(p);
    if (!os) throw InvalidArgument("cannot write " + p.string());
    if (format == CloudFormat::ply) {
      write_ply(os, clouds[i]);
    } else {
      write_csv(os, clouds[i]);
    }
    files.push_back(p.filename().string());
    written.push_back(p);
  }
  json out = doc;
  out["cloud_files"] = files;
  std::ofstream os(json_path);
  if (!os) throw InvalidArgument("cannot write " + json_path.string());
  os << out.dump(1) << '\n';
  return written;
}

void write_per_frame_csv(std::ostream& os, const std::vector<double>& per_frame) {
  os << "frame,rms\n" << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (std::size_t i = 0; i < per_frame.size(); ++i) os << i << ',' << per_frame[i] << '\n';
}

}  // namespace nrsfm
