#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "nrsfm/eval.hpp"
#include "nrsfm/geometry.hpp"
#include "nrsfm/graph.hpp"
#include "nrsfm/reconstruct.hpp"
#include "nrsfm/synth.hpp"

namespace nrsfm {

inline constexpr int kSceneVersion = 1;
inline constexpr int kResultVersion = 1;

/// On-disk scene: correspondences plus optional ground truth and graph.
///
/// With intrinsics present `image` holds pixel coordinates, otherwise
/// normalised image coordinates (x / z, y / z).
struct SceneFile {
  int version = kSceneVersion;
  int n = 0;
  int m = 0;
  std::optional<CameraIntrinsics> intrinsics;
  std::vector<Vec2> image;  // image-major, n * m
  std::vector<std::uint8_t> visibility;
  std::vector<PointCloud> gt;  // empty when unknown
  std::optional<SimplicialGraph> graph;
  int graph_knn = 0;
  std::vector<double> gt_geodesics;
  std::vector<double> gt_areas;
  nlohmann::json generator = nlohmann::json::object();

  /// Throws InvalidArgument when arrays disagree with n and m.
  void validate() const;
  ObservationSet observations() const;

  bool operator==(const SceneFile& o) const;
};

SceneFile scene_from_synthetic(const SyntheticScene& s);

nlohmann::json to_json(const SceneFile& s);
SceneFile scene_from_json(const nlohmann::json& j);

void write_scene(const SceneFile& s, const std::filesystem::path& path);
SceneFile read_scene(const std::filesystem::path& path);

enum class CloudFormat { ply, csv };

void write_ply(std::ostream& os, const PointCloud& cloud);
PointCloud read_ply(std::istream& is);
void write_csv(std::ostream& os, const PointCloud& cloud);
PointCloud read_csv(std::istream& is);

nlohmann::json to_json(const EvalReport& r);
nlohmann::json to_json(const Reconstruction& r);
/// Clouds, geodesics and areas of a result document.
Reconstruction reconstruction_from_json(const nlohmann::json& j);

/// Writes the JSON result and one cloud file per image next to it
/// (<stem>_frame<i>.ply or .csv). Returns the written cloud paths.
std::vector<std::filesystem::path> write_result(const std::filesystem::path& json_path,
                                                const nlohmann::json& doc,
                                                const std::vector<PointCloud>& clouds,
                                                CloudFormat format);

/// Per-frame RMS table with a header row.
void write_per_frame_csv(std::ostream& os, const std::vector<double>& per_frame);

}  // namespace nrsfm
