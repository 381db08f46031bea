#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "markerfind/contour.hpp"
#include "markerfind/geometry.hpp"
#include "markerfind/image.hpp"

namespace mf {

/// Square gray patch compared against rectified candidates.
class PatternImage {
public:
    explicit PatternImage(GrayImage img);

    int side() const noexcept { return img_.width(); }
    const GrayImage& image() const noexcept { return img_; }

private:
    GrayImage img_;
};

struct PatternEntry {
    std::string id;
    PatternImage pattern;
};

/// Immutable set of known patterns; ids are unique and all sides equal.
class PatternRegistry {
public:
    static constexpr double kDefaultThreshold = 0.75;

    PatternRegistry(std::vector<PatternEntry> entries, double acceptance_threshold = kDefaultThreshold);

    const std::vector<PatternEntry>& entries() const noexcept { return entries_; }
    double acceptance_threshold() const noexcept { return threshold_; }
    std::size_t size() const noexcept { return entries_.size(); }
    int side() const noexcept { return entries_.front().pattern.side(); }
    const PatternEntry* find(const std::string& id) const;

    /// Registry restricted to the first n entries.
    PatternRegistry prefix(std::size_t n) const;

private:
    std::vector<PatternEntry> entries_;
    double threshold_;
};

/**
 * Loads a manifest: a JSON array of {"id": string, "file": path-to-P5-PGM}.
 * Relative paths resolve against the manifest's directory.
 */
PatternRegistry load_registry(const std::filesystem::path& manifest, double acceptance_threshold = PatternRegistry::kDefaultThreshold);

/// Writes each pattern as <dir>/<id>.pgm plus <dir>/registry.json; returns the manifest path.
std::filesystem::path save_registry(const PatternRegistry& reg, const std::filesystem::path& dir);

/// Sliding-window correlation scores, width = W - w + 1, height = H - h + 1.
using ResultMatrix = RealImage;

struct MinMax {
    double min = 0.0;
    Point2 min_loc;
    double max = 0.0;
    Point2 max_loc;
};

struct Identification {
    std::string id;
    int rotation_deg = 0;
    double score = 0.0;
};

/// Warps the quadrilateral `corners` (canonical order) onto an S x S patch.
PatternImage rectify_quad(const GrayImage& img, std::span<const Point2, 4> corners, int side);

/// Rectifies the candidate's outer quad.
PatternImage rectify_candidate(const GrayImage& img, const QuadCandidate& quad, int side);

/**
 * Zero-mean normalized cross-correlation in [-1, 1].
 *
 * The 8-bit overload accumulates exact integer moments, so the result does not
 * depend on pixel visiting order. Throws UndefinedCorrelationError if either
 * operand is constant and ParameterError on a size mismatch.
 */
double ncc_score(const GrayImage& a, const GrayImage& b);
double ncc_score(std::span<const double> a, std::span<const double> b);

/**
 * Slides `tmpl` over `img` and stores the NCC of every placement. Windows
 * with zero variance score 0. Throws ParameterError when the template is
 * larger than the image and UndefinedCorrelationError for a constant template.
 */
ResultMatrix match_template(const GrayImage& img, const GrayImage& tmpl);

/// Global extrema; ties resolve to the first occurrence in row-major order.
MinMax min_max_loc(const ResultMatrix& m);

/// Clockwise (on screen) rotation of a square image by a multiple of 90 degrees.
GrayImage rotate_square(const GrayImage& img, int degrees);

/**
 * Best match of `p` over every registry entry and the four right-angle
 * rotations. `rotation_deg` r means p equals the pattern rotated clockwise
 * by r. Ties keep the earlier registry entry, then the smaller rotation.
 * Returns nullopt when the best score is below the acceptance threshold.
 */
std::optional<Identification> identify_marker(const PatternImage& p, const PatternRegistry& reg);

/// As above with an explicit acceptance threshold in (0, 1].
std::optional<Identification> identify_marker(const PatternImage& p, const PatternRegistry& reg, double acceptance_threshold);

} // namespace mf
