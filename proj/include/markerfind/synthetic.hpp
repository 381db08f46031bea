#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "markerfind/chessboard.hpp"
#include "markerfind/geometry.hpp"
#include "markerfind/image.hpp"
#include "markerfind/matching.hpp"

namespace mf {

/**
 * Seeded generator with platform-independent draws: mt19937_64 output is
 * converted by explicit arithmetic rather than the standard distributions,
 * whose results vary between library implementations.
 */
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }
    /// Uniform in [0, 1) with 53 random bits.
    double uniform();
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    /// Uniform integer in [lo, hi].
    int uniform_int(int lo, int hi);
    /// Standard normal via Box-Muller.
    double normal();

private:
    std::mt19937_64 engine_;
    std::optional<double> spare_;
};

/// Marker geometry in model units: the black square is [0, 1]^2, the
/// pattern fills [0.25, 0.75]^2 and the white quiet zone extends to
/// [-0.25, 1.25]^2.
inline constexpr double kPatternInset = 0.25;
inline constexpr double kQuietZone = 0.25;

/// One marker drawn under `h`, which maps the model plane into the image.
struct Placement {
    std::string id;
    Homography h;
    /// Black = 128 - 127 c, white = 128 + 127 c.
    double contrast = 1.0;
};

struct PlacementTruth {
    std::string id;
    /// Black-square corners in canonical order.
    std::array<Point2, 4> corners{};
    int rotation_deg = 0;
    std::optional<Pose> pose;
};

struct SyntheticScene {
    GrayImage background;
    std::vector<Placement> placements;
    /// Camera and per-placement poses when the scene was built from 3D poses.
    std::optional<CameraIntrinsics> camera;
    std::vector<std::optional<Pose>> poses;
    std::uint64_t noise_seed = 0;
    double noise_sigma = 0.0;
    std::vector<PlacementTruth> ground_truth;
};

/// Recomputes `scene.ground_truth` from the placements.
void update_ground_truth(SyntheticScene& scene);

/// Ground truth for one placement: projected corners, their canonical order and rotation label.
PlacementTruth placement_truth(const Placement& p, const std::optional<Pose>& pose);

/**
 * Draws every placement over the background with 4x4 supersampling and
 * bilinear pattern sampling, then adds Gaussian noise drawn from
 * Rng(scene.noise_seed) in raster order. Throws ParameterError when a
 * quiet zone leaves the frame or an id is missing from the registry.
 */
GrayImage render_synthetic(const SyntheticScene& scene, const PatternRegistry& reg, double noise_sigma);

/// Random pattern on a 6x6 cell grid: white outer ring, random inner 4x4.
GrayImage random_pattern(Rng& rng, int side);

/**
 * Registry of `count` patterns with ids m00, m01, ... Patterns are redrawn
 * until no two rotations of any pair (or of one pattern) correlate above 0.5
 * and the pattern, framed by the black border, has no enclosed white region.
 */
PatternRegistry make_pattern_registry(int count, std::uint64_t seed, int side = 32);

struct RandomSceneOptions {
    int width = 640;
    int height = 480;
    int min_markers = 1;
    int max_markers = 3;
    double max_tilt_deg = 45.0;
    double min_side_px = 40.0;
    double max_side_px = 120.0;
    double max_noise_sigma = 8.0;
    double min_contrast = 0.6;
    int min_distractors = 2;
    int max_distractors = 6;
};

/// The camera used for generated scenes of the given frame size.
CameraIntrinsics default_camera(int width, int height);

/// Smooth gradient background with random distractor shapes kept clear of `avoid` boxes.
GrayImage random_background(Rng& rng, int width, int height, const std::vector<std::array<double, 4>>& avoid,
                            int distractors);

/**
 * Random scene: markers drawn from `reg` under random poses (tilt up to the
 * limit, any in-plane rotation), non-overlapping quiet zones, plus
 * distractors. With max_markers = 0 the frame holds distractors only.
 */
SyntheticScene random_scene(const PatternRegistry& reg, Rng& rng, const RandomSceneOptions& opts = {});

/// Pose placing the marker centre at image point `centre` with apparent side `side_px`.
Pose marker_pose(const CameraIntrinsics& cam, Point2 centre, double side_px, double tilt_deg, double tilt_axis_deg,
                 double spin_deg);

struct ChessboardScene {
    BoardSpec spec;
    /// Maps board square units into the image; inner corner (c, r) sits at (c + 1, r + 1).
    Homography h;
    int width = 640;
    int height = 480;
};

/// Board of `square_px` squares centred in the frame and tilted about the vertical axis.
ChessboardScene make_board_scene(const BoardSpec& spec, double square_px, double tilt_deg, int width = 640,
                                 int height = 480);

/// Black/white board on white, 4x4 supersampled. Square (0, 0) is black.
GrayImage render_chessboard(const ChessboardScene& scene);

/// Inner corners ordered the way find_chessboard_corners reports them.
std::vector<Point2> chessboard_truth(const ChessboardScene& scene);

} // namespace mf
