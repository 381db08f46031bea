#include "markerfind/contour.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace mf {
namespace {

class DisjointSet {
public:
    int make()
    {
        parent_.push_back(static_cast<int>(parent_.size()));
        return parent_.back();
    }

    int find(int a)
    {
        while (parent_[static_cast<std::size_t>(a)] != a) {
            auto& p = parent_[static_cast<std::size_t>(a)];
            p = parent_[static_cast<std::size_t>(p)];
            a = p;
        }
        return a;
    }

    void unite(int a, int b)
    {
        a = find(a);
        b = find(b);
        if (a != b) {
            parent_[static_cast<std::size_t>(std::max(a, b))] = std::min(a, b);
        }
    }

private:
    std::vector<int> parent_;
};

/// Dense region labels: foreground components (8-connected) and background
/// regions (4-connected). All background touching the image border shares
/// the exterior label.
struct Regions {
    int width = 0;
    int height = 0;
    std::vector<int> label;
    std::vector<bool> foreground;
    int exterior = -1;

    int at(int x, int y) const
    {
        if (x < 0 || y < 0 || x >= width || y >= height) {
            return exterior;
        }
        return label[static_cast<std::size_t>(y) * static_cast<std::size_t>(width) + static_cast<std::size_t>(x)];
    }
};

Regions label_regions(const BinaryImage& mask, bool invert)
{
    const int w = mask.width();
    const int h = mask.height();
    const std::uint8_t fg_value = invert ? 0 : 1;
    auto is_fg = [&](int x, int y) { return mask.at(x, y) == fg_value; };

    DisjointSet ds;
    const int exterior_provisional = ds.make();
    std::vector<int> prov(static_cast<std::size_t>(w) * static_cast<std::size_t>(h), -1);
    auto prov_at = [&](int x, int y) -> int& {
        return prov[static_cast<std::size_t>(y) * static_cast<std::size_t>(w) + static_cast<std::size_t>(x)];
    };

    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const bool fg = is_fg(x, y);
            int assigned = -1;
            auto join = [&](int nx, int ny) {
                if (nx < 0 || ny < 0 || nx >= w || is_fg(nx, ny) != fg) {
                    return;
                }
                const int l = prov_at(nx, ny);
                if (assigned < 0) {
                    assigned = l;
                } else {
                    ds.unite(assigned, l);
                }
            };
            join(x - 1, y);
            join(x, y - 1);
            if (fg) {
                join(x - 1, y - 1);
                join(x + 1, y - 1);
            }
            if (assigned < 0) {
                assigned = ds.make();
            }
            if (!fg && (x == 0 || y == 0 || x == w - 1 || y == h - 1)) {
                ds.unite(assigned, exterior_provisional);
            }
            prov_at(x, y) = assigned;
        }
    }

    Regions r;
    r.width = w;
    r.height = h;
    r.label.resize(prov.size());
    std::vector<int> dense;
    auto dense_of = [&](int root) -> int {
        if (static_cast<std::size_t>(root) >= dense.size()) {
            dense.resize(static_cast<std::size_t>(root) + 1, -1);
        }
        auto& d = dense[static_cast<std::size_t>(root)];
        if (d < 0) {
            d = static_cast<int>(r.foreground.size());
            r.foreground.push_back(false);
        }
        return d;
    };
    r.exterior = dense_of(ds.find(exterior_provisional));
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const std::size_t i = static_cast<std::size_t>(y) * static_cast<std::size_t>(w) + static_cast<std::size_t>(x);
            const int d = dense_of(ds.find(prov[i]));
            r.label[i] = d;
            r.foreground[static_cast<std::size_t>(d)] = is_fg(x, y);
        }
    }
    return r;
}

enum Dir { East = 0, South = 1, West = 2, North = 3 };

constexpr std::array<GridPoint, 4> kStep = {GridPoint{1, 0}, GridPoint{0, 1}, GridPoint{-1, 0}, GridPoint{0, -1}};

/**
 * Follows the pixel-edge boundary of region `target` starting at the top-left
 * corner of its first raster pixel, keeping the region on the right-hand side.
 * At diagonal pinches an 8-connected region is followed through the pinch; a
 * 4-connected one is not.
 */
std::vector<GridPoint> follow_boundary(const Regions& regions, int target, GridPoint start, bool eight_connected)
{
    auto inside = [&](int x, int y) { return regions.at(x, y) == target; };
    std::vector<GridPoint> points{start};
    GridPoint pos = start;
    int dir = East;
    for (;;) {
        pos = GridPoint{pos.x + kStep[static_cast<std::size_t>(dir)].x, pos.y + kStep[static_cast<std::size_t>(dir)].y};
        if (pos == start) {
            break;
        }
        points.push_back(pos);

        // Pixels touching the vertex: NW (x-1,y-1), NE (x,y-1), SW (x-1,y), SE (x,y).
        bool left_front = false;
        bool right_front = false;
        switch (dir) {
        case East:
            left_front = inside(pos.x, pos.y - 1);
            right_front = inside(pos.x, pos.y);
            break;
        case South:
            left_front = inside(pos.x, pos.y);
            right_front = inside(pos.x - 1, pos.y);
            break;
        case West:
            left_front = inside(pos.x - 1, pos.y);
            right_front = inside(pos.x - 1, pos.y - 1);
            break;
        case North:
            left_front = inside(pos.x - 1, pos.y - 1);
            right_front = inside(pos.x, pos.y - 1);
            break;
        }
        if (left_front && (right_front || eight_connected)) {
            dir = (dir + 3) % 4;
        } else if (!right_front) {
            dir = (dir + 1) % 4;
        }
    }
    return points;
}

double point_segment_distance(Point2 p, Point2 a, Point2 b)
{
    const Point2 ab = b - a;
    const double len2 = dot(ab, ab);
    if (len2 == 0.0) {
        return distance(p, a);
    }
    const double t = std::clamp(dot(p - a, ab) / len2, 0.0, 1.0);
    return distance(p, a + t * ab);
}

Point2 to_point(GridPoint g)
{
    return {static_cast<double>(g.x), static_cast<double>(g.y)};
}

/// RDP over the open chain pts[first..last] (indices modulo n); appends kept
/// indices except `last`.
void simplify_chain(const std::vector<Point2>& pts, std::size_t first, std::size_t last, double epsilon,
                    std::vector<std::size_t>& kept)
{
    const std::size_t n = pts.size();
    const std::size_t span_len = (last + n - first) % n;
    std::vector<bool> keep(span_len + 1, false);
    keep.front() = true;
    keep.back() = true;
    std::vector<std::pair<std::size_t, std::size_t>> stack{{0, span_len}};
    while (!stack.empty()) {
        const auto [lo, hi] = stack.back();
        stack.pop_back();
        const Point2 a = pts[(first + lo) % n];
        const Point2 b = pts[(first + hi) % n];
        double best = -1.0;
        std::size_t best_k = lo;
        for (std::size_t k = lo + 1; k < hi; ++k) {
            const double d = point_segment_distance(pts[(first + k) % n], a, b);
            if (d > best) {
                best = d;
                best_k = k;
            }
        }
        if (best > epsilon) {
            keep[best_k] = true;
            stack.emplace_back(lo, best_k);
            stack.emplace_back(best_k, hi);
        }
    }
    for (std::size_t k = 0; k < span_len; ++k) {
        if (keep[k]) {
            kept.push_back((first + k) % n);
        }
    }
}

/// True when every contour point strictly between indices a and b lies within epsilon of segment a-b.
bool chain_within(const std::vector<Point2>& pts, std::size_t a, std::size_t b, double epsilon)
{
    const std::size_t n = pts.size();
    for (std::size_t k = (a + 1) % n; k != b; k = (k + 1) % n) {
        if (point_segment_distance(pts[k], pts[a], pts[b]) > epsilon) {
            return false;
        }
    }
    return true;
}

struct Line {
    Point2 point;
    Point2 direction;
};

/// Total-least-squares line through the contour points between two polygon vertices.
std::optional<Line> fit_side(const std::vector<Point2>& pts, std::size_t from, std::size_t to)
{
    const std::size_t n = pts.size();
    const Point2 a = pts[from];
    const Point2 b = pts[to];
    const double side = distance(a, b);
    // Points near the vertices are bent by the corner itself.
    const double trim = std::max(1.5, 0.12 * side);
    std::vector<Point2> sel;
    for (std::size_t k = from; k != to; k = (k + 1) % n) {
        const Point2 p = pts[k];
        if (distance(p, a) >= trim && distance(p, b) >= trim) {
            sel.push_back(p);
        }
    }
    if (sel.size() < 3) {
        return std::nullopt;
    }
    Point2 c{};
    for (const Point2& p : sel) {
        c = c + p;
    }
    c = (1.0 / static_cast<double>(sel.size())) * c;
    double sxx = 0.0;
    double sxy = 0.0;
    double syy = 0.0;
    for (const Point2& p : sel) {
        const Point2 d = p - c;
        sxx += d.x * d.x;
        sxy += d.x * d.y;
        syy += d.y * d.y;
    }
    const double angle = 0.5 * std::atan2(2.0 * sxy, sxx - syy);
    return Line{c, {std::cos(angle), std::sin(angle)}};
}

std::optional<Point2> intersect(const Line& l1, const Line& l2)
{
    const double denom = cross(l1.direction, l2.direction);
    if (std::abs(denom) < 1e-6) {
        return std::nullopt;
    }
    const double t = cross(l2.point - l1.point, l2.direction) / denom;
    return l1.point + t * l1.direction;
}

std::array<Point2, 4> refine_quad(const Contour& c, const Polygon& poly)
{
    std::vector<Point2> pts;
    pts.reserve(c.points.size());
    for (const GridPoint& g : c.points) {
        pts.push_back(to_point(g));
    }
    std::array<Point2, 4> corners{};
    std::array<std::optional<Line>, 4> sides;
    for (std::size_t k = 0; k < 4; ++k) {
        corners[k] = poly.vertices[k];
        sides[k] = fit_side(pts, poly.source_indices[k], poly.source_indices[(k + 1) % 4]);
    }
    std::array<Point2, 4> refined = corners;
    for (std::size_t k = 0; k < 4; ++k) {
        const auto& before = sides[(k + 3) % 4];
        const auto& after = sides[k];
        if (!before || !after) {
            continue;
        }
        const auto p = intersect(*before, *after);
        const double shortest = std::min(distance(corners[k], corners[(k + 1) % 4]), distance(corners[k], corners[(k + 3) % 4]));
        if (p && distance(*p, corners[k]) < std::max(2.0, 0.15 * shortest)) {
            refined[k] = *p;
        }
    }
    return refined;
}

} // namespace

ContourSet trace_contours(const BinaryImage& mask, bool invert)
{
    const Regions regions = label_regions(mask, invert);
    ContourSet set;
    std::vector<bool> seen(regions.foreground.size(), false);
    std::vector<std::size_t> outer_of(regions.foreground.size(), 0);

    for (int y = 0; y < regions.height; ++y) {
        for (int x = 0; x < regions.width; ++x) {
            const int l = regions.at(x, y);
            if (l == regions.exterior || seen[static_cast<std::size_t>(l)]) {
                continue;
            }
            seen[static_cast<std::size_t>(l)] = true;
            const bool fg = regions.foreground[static_cast<std::size_t>(l)];
            Contour c;
            c.points = follow_boundary(regions, l, GridPoint{x, y}, fg);
            c.is_outer = fg;
            const std::size_t index = set.contours.size();
            if (fg) {
                outer_of[static_cast<std::size_t>(l)] = index;
            } else {
                // The pixel above a hole's first pixel belongs to the surrounding component.
                const std::size_t parent = outer_of[static_cast<std::size_t>(regions.at(x, y - 1))];
                c.parent = parent;
                set.children[parent].push_back(index);
            }
            set.contours.push_back(std::move(c));
        }
    }
    return set;
}

double contour_area(const Contour& c)
{
    double acc = 0.0;
    const std::size_t n = c.points.size();
    for (std::size_t i = 0; i < n; ++i) {
        const GridPoint a = c.points[i];
        const GridPoint b = c.points[(i + 1) % n];
        acc += static_cast<double>(a.x) * b.y - static_cast<double>(b.x) * a.y;
    }
    return 0.5 * std::abs(acc);
}

double contour_perimeter(const Contour& c)
{
    double acc = 0.0;
    const std::size_t n = c.points.size();
    for (std::size_t i = 0; i < n; ++i) {
        acc += distance(to_point(c.points[i]), to_point(c.points[(i + 1) % n]));
    }
    return acc;
}

Polygon approx_polygon(const Contour& c, double epsilon)
{
    if (!(epsilon > 0.0)) {
        throw ParameterError("approx_polygon: epsilon must be positive");
    }
    const std::size_t n = c.points.size();
    if (n < 3) {
        throw DegenerateError("approx_polygon: contour has fewer than 3 points");
    }
    std::vector<Point2> pts;
    pts.reserve(n);
    for (const GridPoint& g : c.points) {
        pts.push_back(to_point(g));
    }

    auto farthest_from = [&](std::size_t from) {
        std::size_t best = from;
        double best_d = -1.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double d = distance(pts[i], pts[from]);
            if (d > best_d) {
                best_d = d;
                best = i;
            }
        }
        return best;
    };
    const std::size_t a = farthest_from(0);
    const std::size_t b = farthest_from(a);
    if (a == b) {
        throw DegenerateError("approx_polygon: contour collapses to a point");
    }

    std::vector<std::size_t> kept;
    simplify_chain(pts, a, b, epsilon, kept);
    simplify_chain(pts, b, a, epsilon, kept);

    // Drop vertices that the split points left on a straight run.
    bool changed = true;
    while (changed && kept.size() > 3) {
        changed = false;
        for (std::size_t i = 0; i < kept.size() && kept.size() > 3; ++i) {
            const std::size_t prev = kept[(i + kept.size() - 1) % kept.size()];
            const std::size_t next = kept[(i + 1) % kept.size()];
            if (chain_within(pts, prev, next, epsilon)) {
                kept.erase(kept.begin() + static_cast<std::ptrdiff_t>(i));
                changed = true;
                break;
            }
        }
    }
    if (kept.size() < 3) {
        throw DegenerateError("approx_polygon: contour is collinear within epsilon");
    }

    Polygon poly;
    for (std::size_t idx : kept) {
        poly.vertices.push_back(pts[idx]);
        poly.source_indices.push_back(idx);
    }
    return poly;
}

bool is_convex(std::span<const Point2> poly)
{
    const std::size_t n = poly.size();
    if (n < 3) {
        return false;
    }
    int sign = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const Point2 a = poly[i];
        const Point2 b = poly[(i + 1) % n];
        const Point2 c = poly[(i + 2) % n];
        const double z = cross(b - a, c - b);
        if (z == 0.0) {
            return false;
        }
        const int s = z > 0.0 ? 1 : -1;
        if (sign == 0) {
            sign = s;
        } else if (s != sign) {
            return false;
        }
    }
    return true;
}

std::vector<QuadCandidate> find_quad_candidates(const ContourSet& set, double min_area, double epsilon_frac)
{
    if (!(epsilon_frac > 0.0 && epsilon_frac < 0.5)) {
        throw ParameterError("epsilon_frac must be in (0, 0.5)");
    }
    if (!(min_area > 0.0)) {
        throw ParameterError("min_area must be positive");
    }

    auto quad_of = [&](const Contour& c) -> std::optional<Polygon> {
        try {
            Polygon p = approx_polygon(c, epsilon_frac * contour_perimeter(c));
            if (p.total() == 4 && is_convex(p.vertices)) {
                return p;
            }
        } catch (const DegenerateError&) {
        }
        return std::nullopt;
    };

    std::vector<QuadCandidate> out;
    for (const auto& [outer_index, kids] : set.children) {
        const Contour& outer = set.contours[outer_index];
        const double area = contour_area(outer);
        if (area < min_area) {
            continue;
        }
        const auto outer_poly = quad_of(outer);
        if (!outer_poly) {
            continue;
        }
        for (std::size_t child_index : kids) {
            const Contour& child = set.contours[child_index];
            const auto inner_poly = quad_of(child);
            if (!inner_poly) {
                continue;
            }
            const bool nested = std::all_of(inner_poly->vertices.begin(), inner_poly->vertices.end(),
                                            [&](Point2 v) { return point_in_polygon(v, outer_poly->vertices); });
            if (!nested) {
                continue;
            }
            try {
                const auto outer_corners = refine_quad(outer, *outer_poly);
                const auto inner_corners = refine_quad(child, *inner_poly);
                QuadCandidate q;
                q.outer = order_corners(outer_corners);
                q.inner = order_corners(inner_corners);
                q.area = area;
                q.outer_contour = outer_index;
                q.inner_contour = child_index;
                out.push_back(q);
            } catch (const DegenerateError&) {
            }
        }
    }
    return out;
}

std::array<Point2, 4> order_corners(std::span<const Point2, 4> corners)
{
    for (std::size_t i = 0; i < 4; ++i) {
        for (std::size_t j = i + 1; j < 4; ++j) {
            for (std::size_t k = j + 1; k < 4; ++k) {
                const double z = cross(corners[j] - corners[i], corners[k] - corners[i]);
                const double scale = std::max({dot(corners[j] - corners[i], corners[j] - corners[i]),
                                               dot(corners[k] - corners[i], corners[k] - corners[i]), 1e-300});
                if (std::abs(z) <= 1e-12 * scale) {
                    throw DegenerateError("order_corners: repeated or collinear corners");
                }
            }
        }
    }
    Point2 c{};
    for (const Point2& p : corners) {
        c = c + p;
    }
    c = 0.25 * c;
    std::array<Point2, 4> out{corners[0], corners[1], corners[2], corners[3]};
    std::sort(out.begin(), out.end(), [&](Point2 a, Point2 b) {
        return std::atan2(a.y - c.y, a.x - c.x) < std::atan2(b.y - c.y, b.x - c.x);
    });
    if (signed_area_image(out) < 0.0) {
        std::reverse(out.begin(), out.end());
    }
    const auto first = std::min_element(out.begin(), out.end(), [](Point2 a, Point2 b) {
        return a.y < b.y || (a.y == b.y && a.x < b.x);
    });
    std::rotate(out.begin(), first, out.end());
    return out;
}

} // namespace mf
