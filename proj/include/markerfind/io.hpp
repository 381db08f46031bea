#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "markerfind/chessboard.hpp"
#include "markerfind/geometry.hpp"
#include "markerfind/pipeline.hpp"
#include "markerfind/synthetic.hpp"

namespace mf {

using Json = nlohmann::ordered_json;

Json to_json(Point2 p);
Json to_json(const Mat3& m);
Json to_json(const Pose& pose);
Json to_json(const CameraIntrinsics& cam);
Json to_json(const MarkerDetection& d);

/// {"frame": ..., "detections": [...]} with keys in a fixed order.
Json detections_json(const std::string& frame, const std::vector<MarkerDetection>& detections);

/// {"board": [W, H], "corners": [...], "response": [...], "outer_corner_indices": [...], "outer_corners": [...]}
Json chessboard_json(const std::string& frame, const BoardSpec& spec, const CornerGrid& grid);

Point2 point_from_json(const Json& j);
Pose pose_from_json(const Json& j);

/**
 * Intrinsics as {"fx", "fy", "cx", "cy", "skew"?} or as the 3x4 block
 * {"C": [[...4] x 3]}.
 */
CameraIntrinsics intrinsics_from_json(const Json& j);
CameraIntrinsics load_intrinsics(const std::filesystem::path& path);

Json parse_json_file(const std::filesystem::path& path);

/**
 * Scene description:
 * {"width", "height", "background": {"level", "gradient": [gx, gy]}, "camera",
 *  "noise_sigma", "seed", "markers": [{"id", "contrast",
 *  "corners": [[x, y] x 4] | "pose": {"centre", "side_px", "tilt_deg", "tilt_axis_deg", "spin_deg"}}]}
 * Corners are the image positions of the model square corners (0,0), (0,1), (1,1), (1,0).
 */
SyntheticScene scene_from_json(const Json& j);

/// Ground truth of one frame: {"frame", "noise_sigma", "markers": [{"id", "rotation_deg", "corners", "pose"}]}.
Json scene_truth_json(const std::string& frame, const SyntheticScene& scene);

} // namespace mf
