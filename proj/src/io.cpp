#include "markerfind/io.hpp"

#include "markerfind/pnm.hpp"

namespace mf {
namespace {

double number(const Json& j, const char* key)
{
    if (!j.contains(key) || !j[key].is_number()) {
        throw ParameterError(std::string("missing numeric field \"") + key + "\"");
    }
    return j[key].get<double>();
}

double number_or(const Json& j, const char* key, double fallback)
{
    return j.contains(key) ? number(j, key) : fallback;
}

} // namespace

Json to_json(Point2 p)
{
    return Json::array({p.x, p.y});
}

Json to_json(const Mat3& m)
{
    Json out = Json::array();
    for (const auto& row : m) {
        out.push_back(Json::array({row[0], row[1], row[2]}));
    }
    return out;
}

Json to_json(const Pose& pose)
{
    Json out;
    out["R"] = to_json(pose.R);
    out["T"] = Json::array({pose.T[0], pose.T[1], pose.T[2]});
    return out;
}

Json to_json(const CameraIntrinsics& cam)
{
    Json out;
    out["fx"] = cam.fx();
    out["fy"] = cam.fy();
    out["cx"] = cam.cx();
    out["cy"] = cam.cy();
    out["skew"] = cam.skew();
    return out;
}

Json to_json(const MarkerDetection& d)
{
    Json out;
    out["id"] = d.id;
    out["score"] = d.score;
    out["rotation_deg"] = d.rotation_deg;
    Json corners = Json::array();
    for (const auto& p : d.corners) {
        corners.push_back(to_json(p));
    }
    out["corners"] = corners;
    out["homography"] = to_json(d.homography.matrix());
    out["pose"] = d.pose ? to_json(*d.pose) : Json(nullptr);
    return out;
}

Json detections_json(const std::string& frame, const std::vector<MarkerDetection>& detections)
{
    Json out;
    out["frame"] = frame;
    out["detections"] = Json::array();
    for (const auto& d : detections) {
        out["detections"].push_back(to_json(d));
    }
    return out;
}

Json chessboard_json(const std::string& frame, const BoardSpec& spec, const CornerGrid& grid)
{
    Json out;
    out["frame"] = frame;
    out["board"] = Json::array({spec.board_width, spec.board_height});
    Json corners = Json::array();
    for (const auto& p : grid.corners) {
        corners.push_back(to_json(p));
    }
    out["corners"] = corners;
    out["response"] = grid.response;
    const auto idx = outer_corner_indices(spec);
    out["outer_corner_indices"] = Json::array({idx[0], idx[1], idx[2], idx[3]});
    Json outer = Json::array();
    for (const auto& p : outer_corners(grid, spec)) {
        outer.push_back(to_json(p));
    }
    out["outer_corners"] = outer;
    return out;
}

Point2 point_from_json(const Json& j)
{
    if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
        throw ParameterError("points must be [x, y] arrays");
    }
    return {j[0].get<double>(), j[1].get<double>()};
}

Pose pose_from_json(const Json& j)
{
    if (!j.is_object() || !j.contains("R") || !j.contains("T")) {
        throw ParameterError("pose needs \"R\" and \"T\"");
    }
    Pose p;
    for (std::size_t r = 0; r < 3; ++r) {
        p.T[r] = j["T"].at(r).get<double>();
        for (std::size_t c = 0; c < 3; ++c) {
            p.R[r][c] = j["R"].at(r).at(c).get<double>();
        }
    }
    return p;
}

CameraIntrinsics intrinsics_from_json(const Json& j)
{
    if (!j.is_object()) {
        throw ParameterError("intrinsics must be a JSON object");
    }
    try {
        if (j.contains("C")) {
            CameraIntrinsics::Block b{};
            for (std::size_t r = 0; r < 3; ++r) {
                for (std::size_t c = 0; c < 4; ++c) {
                    b[r][c] = j["C"].at(r).at(c).get<double>();
                }
            }
            return CameraIntrinsics(b);
        }
    } catch (const nlohmann::json::exception& e) {
        throw ParameterError(std::string("intrinsics \"C\" must be a 3x4 number array: ") + e.what());
    }
    return CameraIntrinsics::pinhole(number(j, "fx"), number(j, "fy"), number(j, "cx"), number(j, "cy"),
                                     number_or(j, "skew", 0.0));
}

Json parse_json_file(const std::filesystem::path& path)
{
    const auto bytes = read_file(path);
    try {
        return Json::parse(bytes.begin(), bytes.end());
    } catch (const nlohmann::json::exception& e) {
        throw ParameterError(path.string() + ": " + e.what());
    }
}

CameraIntrinsics load_intrinsics(const std::filesystem::path& path)
{
    return intrinsics_from_json(parse_json_file(path));
}

SyntheticScene scene_from_json(const Json& j)
{
    if (!j.is_object()) {
        throw ParameterError("scene must be a JSON object");
    }
    try {
        const int width = static_cast<int>(number_or(j, "width", 640));
        const int height = static_cast<int>(number_or(j, "height", 480));
        double level = 128.0;
        double gx = 0.0;
        double gy = 0.0;
        if (j.contains("background")) {
            const auto& bg = j["background"];
            level = number_or(bg, "level", level);
            if (bg.contains("gradient")) {
                gx = bg["gradient"].at(0).get<double>();
                gy = bg["gradient"].at(1).get<double>();
            }
        }
        SyntheticScene scene;
        scene.background = GrayImage(width, height);
        for (int y = 0; y < height; ++y) {
            for (int x = 0; x < width; ++x) {
                const double v = level + gx * (x + 0.5 - 0.5 * width) + gy * (y + 0.5 - 0.5 * height);
                scene.background.at(x, y) = static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
            }
        }
        const CameraIntrinsics cam = j.contains("camera") ? intrinsics_from_json(j["camera"]) : default_camera(width, height);
        scene.camera = cam;
        scene.noise_sigma = number_or(j, "noise_sigma", 0.0);
        if (scene.noise_sigma < 0.0) {
            throw ParameterError("noise_sigma must be non-negative");
        }
        scene.noise_seed = j.contains("seed") ? j["seed"].get<std::uint64_t>() : 0;
        if (j.contains("markers")) {
            for (const auto& m : j["markers"]) {
                Placement pl;
                pl.id = m.at("id").get<std::string>();
                pl.contrast = number_or(m, "contrast", 1.0);
                std::optional<Pose> pose;
                if (m.contains("corners")) {
                    std::array<Point2, 4> c{};
                    for (std::size_t k = 0; k < 4; ++k) {
                        c[k] = point_from_json(m["corners"].at(k));
                    }
                    pl.h = estimate_homography(unit_square(), c);
                } else if (m.contains("pose")) {
                    const auto& p = m["pose"];
                    pose = marker_pose(cam, point_from_json(p.at("centre")), number(p, "side_px"),
                                       number_or(p, "tilt_deg", 0.0), number_or(p, "tilt_axis_deg", 0.0),
                                       number_or(p, "spin_deg", 0.0));
                    pl.h = homography_from_pose(cam, *pose);
                } else {
                    throw ParameterError("marker '" + pl.id + "' needs \"corners\" or \"pose\"");
                }
                scene.placements.push_back(pl);
                scene.poses.push_back(pose);
            }
        }
        update_ground_truth(scene);
        return scene;
    } catch (const nlohmann::json::exception& e) {
        throw ParameterError(std::string("invalid scene description: ") + e.what());
    }
}

Json scene_truth_json(const std::string& frame, const SyntheticScene& scene)
{
    Json out;
    out["frame"] = frame;
    out["noise_sigma"] = scene.noise_sigma;
    out["markers"] = Json::array();
    for (const auto& t : scene.ground_truth) {
        Json m;
        m["id"] = t.id;
        m["rotation_deg"] = t.rotation_deg;
        Json corners = Json::array();
        for (const auto& p : t.corners) {
            corners.push_back(to_json(p));
        }
        m["corners"] = corners;
        m["pose"] = t.pose ? to_json(*t.pose) : Json(nullptr);
        out["markers"].push_back(m);
    }
    return out;
}

} // namespace mf
