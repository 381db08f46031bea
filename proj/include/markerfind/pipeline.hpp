#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "markerfind/geometry.hpp"
#include "markerfind/image.hpp"
#include "markerfind/matching.hpp"
#include "markerfind/pnm.hpp"
#include "markerfind/threshold.hpp"

namespace mf {

enum class ThresholdMode { Global, Adaptive };

struct ThresholdConfig {
    ThresholdMode mode = ThresholdMode::Adaptive;
    int level = 128;
    int window = 31;
    int offset = 7;
};

/// Parses "global:P" or "adaptive:W,C".
ThresholdConfig parse_threshold(const std::string& text);

struct DetectConfig {
    GrayMethod gray = GrayMethod::Luminance;
    ThresholdConfig threshold;
    double epsilon_frac = 0.05;
    double min_area = 100.0;
    int pattern_side = 32;
    /// Overrides the registry's threshold when set.
    std::optional<double> acceptance_threshold;
    std::optional<CameraIntrinsics> camera;

    /// Throws ParameterError for out-of-range values.
    void validate() const;
};

struct MarkerDetection {
    std::string id;
    /// Black-square corners in canonical order.
    std::array<Point2, 4> corners{};
    int rotation_deg = 0;
    double score = 0.0;
    /// Maps the pattern's model square (0,0), (0,1), (1,1), (1,0) onto the image.
    Homography homography;
    std::optional<Pose> pose;
};

/// Wall time per stage in milliseconds.
struct DetectTimings {
    double threshold_ms = 0.0;
    double contours_ms = 0.0;
    double rectify_ms = 0.0;
    double match_ms = 0.0;
};

/**
 * Full detection: grayscale, threshold, contour tracing, quad candidates,
 * rectification of the pattern area, identification, homography from the
 * model square to the rotation-compensated corners and, when the config
 * carries intrinsics, the pose. Results are sorted by descending score.
 */
std::vector<MarkerDetection> detect(const GrayImage& img, const DetectConfig& cfg, const PatternRegistry& reg,
                                    DetectTimings* timings = nullptr);
std::vector<MarkerDetection> detect(const AnyImage& img, const DetectConfig& cfg, const PatternRegistry& reg,
                                    DetectTimings* timings = nullptr);

/**
 * Moves each side of a dark quadrilateral on a light surround onto the
 * gray-level mid crossing found along profiles normal to the side, then
 * re-intersects the fitted sides. Returns `quad` unchanged when a side
 * lacks contrast or the result moves a corner implausibly far.
 */
std::array<Point2, 4> refine_quad_edges(const GrayImage& img, std::span<const Point2, 4> quad);

/// Pattern area of a marker whose black square has the given canonical corners.
std::array<Point2, 4> pattern_quad(std::span<const Point2, 4> outer);

/// Corner circles, quad edges and id labels drawn onto an RGB copy.
ColorImage annotate(const GrayImage& img, const std::vector<MarkerDetection>& detections);

inline constexpr int kCornerCircleRadius = 6;
inline constexpr Rgb kCornerColor{255, 0, 0};
inline constexpr Rgb kEdgeColor{0, 200, 0};
inline constexpr Rgb kLabelColor{255, 220, 0};

} // namespace mf
