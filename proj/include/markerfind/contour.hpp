#pragma once

#include <array>
#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "markerfind/geometry.hpp"
#include "markerfind/image.hpp"

namespace mf {

/// Integer lattice point. Contours run along pixel edges, so (x, y) is the
/// top-left corner of pixel (x, y) in continuous image coordinates.
struct GridPoint {
    int x = 0;
    int y = 0;

    friend bool operator==(const GridPoint&, const GridPoint&) = default;
};

/**
 * Closed boundary between a region and its surroundings.
 *
 * Consecutive points (and the last/first pair) differ by one unit step.
 * Outer contours enclose an 8-connected foreground component; inner
 * contours enclose a 4-connected background hole and name the component
 * around it as `parent`.
 */
struct Contour {
    std::vector<GridPoint> points;
    bool is_outer = true;
    std::optional<std::size_t> parent;
};

/// Two-level hierarchy: outer contours are roots, holes are their children.
struct ContourSet {
    std::vector<Contour> contours;
    std::map<std::size_t, std::vector<std::size_t>> children;
};

struct Polygon {
    std::vector<Point2> vertices;
    /// Index of each vertex in the source contour.
    std::vector<std::size_t> source_indices;

    std::size_t total() const noexcept { return vertices.size(); }
};

struct QuadCandidate {
    std::array<Point2, 4> outer{};
    std::array<Point2, 4> inner{};
    /// Enclosed area of the outer contour in square pixels.
    double area = 0.0;
    std::size_t outer_contour = 0;
    std::size_t inner_contour = 0;
};

/**
 * Traces all region boundaries of a mask.
 *
 * Foreground is value 1 (value 0 when `invert`), 8-connected; background is
 * 4-connected. Each foreground component yields one outer contour and each
 * enclosed background hole one inner contour parented to that component.
 * Contours are emitted in raster order of their first pixel.
 */
ContourSet trace_contours(const BinaryImage& mask, bool invert);

double contour_area(const Contour& c);
double contour_perimeter(const Contour& c);

/**
 * Ramer-Douglas-Peucker simplification of a closed contour. Every contour
 * point lies within `epsilon` of the returned polygon and vertices are a
 * subset of contour points. Throws DegenerateError when fewer than 3
 * vertices survive.
 */
Polygon approx_polygon(const Contour& c, double epsilon);

bool is_convex(std::span<const Point2> poly);

/**
 * Square-marker candidates: an outer contour of area >= min_area whose
 * polygon has 4 vertices and is convex, paired with each child hole whose
 * polygon also has 4 convex vertices lying inside the outer polygon.
 * Polygons use epsilon = epsilon_frac * contour perimeter. Corners are
 * refined by line fits to the contour sides and passed through order_corners.
 */
std::vector<QuadCandidate> find_quad_candidates(const ContourSet& set, double min_area, double epsilon_frac);

/**
 * Canonical corner order: counter-clockwise on screen (y down), i.e.
 * positive signed_area_image, starting at the corner with the smallest y
 * (then smallest x). Throws DegenerateError for repeated or collinear points.
 */
std::array<Point2, 4> order_corners(std::span<const Point2, 4> corners);

} // namespace mf
