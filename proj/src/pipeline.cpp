#include "markerfind/pipeline.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <map>

#include "markerfind/contour.hpp"
#include "markerfind/parallel.hpp"

namespace mf {
namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0)
{
    return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

int parse_int(const std::string& s, const std::string& what)
{
    int v = 0;
    const auto* end = s.data() + s.size();
    const auto [ptr, ec] = std::from_chars(s.data(), end, v);
    if (s.empty() || ec != std::errc() || ptr != end) {
        throw ParameterError("invalid " + what + " '" + s + "'");
    }
    return v;
}

/// Detections on one black square, before sorting.
struct Slot {
    std::optional<MarkerDetection> det;
    double rectify_ms = 0.0;
    double match_ms = 0.0;
};

bool before(const MarkerDetection& a, const MarkerDetection& b)
{
    if (a.score != b.score) {
        return a.score > b.score;
    }
    if (a.corners[0].y != b.corners[0].y) {
        return a.corners[0].y < b.corners[0].y;
    }
    if (a.corners[0].x != b.corners[0].x) {
        return a.corners[0].x < b.corners[0].x;
    }
    return a.id < b.id;
}

struct Line {
    Point2 point;
    Point2 direction;
};

std::optional<Line> fit_line(const std::vector<Point2>& pts)
{
    if (pts.size() < 4) {
        return std::nullopt;
    }
    Point2 c{};
    for (const Point2& p : pts) {
        c = c + p;
    }
    c = (1.0 / static_cast<double>(pts.size())) * c;
    double sxx = 0.0;
    double sxy = 0.0;
    double syy = 0.0;
    for (const Point2& p : pts) {
        const Point2 d = p - c;
        sxx += d.x * d.x;
        sxy += d.x * d.y;
        syy += d.y * d.y;
    }
    const double angle = 0.5 * std::atan2(2.0 * sxy, sxx - syy);
    return Line{c, {std::cos(angle), std::sin(angle)}};
}

/// Line fit, then a refit without points more than one pixel off the first line.
std::optional<Line> robust_line(const std::vector<Point2>& pts)
{
    const auto first = fit_line(pts);
    if (!first) {
        return std::nullopt;
    }
    std::vector<Point2> inliers;
    for (const Point2& p : pts) {
        if (std::abs(cross(first->direction, p - first->point)) <= 1.0) {
            inliers.push_back(p);
        }
    }
    return fit_line(inliers);
}

std::optional<Point2> intersect(const Line& l1, const Line& l2)
{
    const double denom = cross(l1.direction, l2.direction);
    if (std::abs(denom) < 1e-6) {
        return std::nullopt;
    }
    return l1.point + (cross(l2.point - l1.point, l2.direction) / denom) * l1.direction;
}

/// Edge position along a dark-to-light profile, relative to its centre.
/// The mid-level crossing nearest the centre picks the edge; the centroid
/// of the intensity differences within 1.5 pixels of it locates the edge.
std::optional<double> edge_offset(const std::vector<double>& v, double step)
{
    const std::size_t n = v.size();
    const std::size_t quarter = n / 4;
    double lo = 0.0;
    double hi = 0.0;
    for (std::size_t i = 0; i < quarter; ++i) {
        lo += v[i];
        hi += v[n - 1 - i];
    }
    lo /= static_cast<double>(quarter);
    hi /= static_cast<double>(quarter);
    if (hi - lo < 20.0) {
        return std::nullopt;
    }
    const double mid = 0.5 * (lo + hi);
    const double centre = 0.5 * static_cast<double>(n - 1);
    std::optional<double> crossing;
    for (std::size_t i = 0; i + 1 < n; ++i) {
        if (v[i] <= mid && v[i + 1] > mid) {
            const double pos = static_cast<double>(i) + (mid - v[i]) / (v[i + 1] - v[i]);
            if (!crossing || std::abs(pos - centre) < std::abs(*crossing - centre)) {
                crossing = pos;
            }
        }
    }
    if (!crossing) {
        return std::nullopt;
    }
    const double window = 1.5 / step;
    const auto first = static_cast<std::size_t>(std::max(0.0, std::floor(*crossing - window)));
    const auto last = static_cast<std::size_t>(std::min(static_cast<double>(n - 1), std::ceil(*crossing + window)));
    double mass = 0.0;
    double moment = 0.0;
    for (std::size_t i = first; i < last; ++i) {
        const double d = v[i + 1] - v[i];
        mass += d;
        moment += d * (static_cast<double>(i) + 0.5);
    }
    if (mass < 10.0) {
        return std::nullopt;
    }
    return (moment / mass - centre) * step;
}

} // namespace

std::array<Point2, 4> refine_quad_edges(const GrayImage& img, std::span<const Point2, 4> quad)
{
    constexpr double kStep = 0.25;
    const std::array<Point2, 4> original{quad[0], quad[1], quad[2], quad[3]};
    std::array<Point2, 4> q = original;
    for (int iter = 0; iter < 2; ++iter) {
        const Point2 centre = 0.25 * (q[0] + q[1] + q[2] + q[3]);
        std::array<Line, 4> sides{};
        for (std::size_t k = 0; k < 4; ++k) {
            const Point2 a = q[k];
            const Point2 b = q[(k + 1) % 4];
            const double len = distance(a, b);
            if (len < 8.0) {
                return original;
            }
            const Point2 d = (1.0 / len) * (b - a);
            Point2 n{-d.y, d.x};
            if (dot(n, 0.5 * (a + b) - centre) < 0.0) {
                n = -1.0 * n;
            }
            const double reach = std::clamp(0.12 * len, 3.0, 5.0);
            const int half = static_cast<int>(std::round(reach / kStep));
            const int samples = std::max(6, static_cast<int>(0.7 * len));
            std::vector<Point2> edge;
            std::vector<double> profile(static_cast<std::size_t>(2 * half + 1));
            for (int i = 0; i < samples; ++i) {
                const double t = 0.15 + 0.7 * (i + 0.5) / samples;
                const Point2 p = a + t * (b - a);
                for (int s = -half; s <= half; ++s) {
                    const Point2 x = p + (s * kStep) * n;
                    profile[static_cast<std::size_t>(s + half)] = sample_bilinear(img, x.x, x.y);
                }
                if (const auto off = edge_offset(profile, kStep)) {
                    edge.push_back(p + *off * n);
                }
            }
            const auto line = robust_line(edge);
            if (!line || edge.size() < static_cast<std::size_t>(samples / 2)) {
                return original;
            }
            sides[k] = *line;
        }
        std::array<Point2, 4> next{};
        for (std::size_t k = 0; k < 4; ++k) {
            const auto p = intersect(sides[(k + 3) % 4], sides[k]);
            const double shortest =
                std::min(distance(original[k], original[(k + 1) % 4]), distance(original[k], original[(k + 3) % 4]));
            if (!p || distance(*p, original[k]) > std::max(3.0, 0.1 * shortest)) {
                return original;
            }
            next[k] = *p;
        }
        q = next;
    }
    return q;
}

ThresholdConfig parse_threshold(const std::string& text)
{
    ThresholdConfig t;
    const auto colon = text.find(':');
    if (colon == std::string::npos) {
        throw ParameterError("threshold must be global:P or adaptive:W,C");
    }
    const std::string mode = text.substr(0, colon);
    const std::string args = text.substr(colon + 1);
    if (mode == "global") {
        t.mode = ThresholdMode::Global;
        t.level = parse_int(args, "threshold level");
    } else if (mode == "adaptive") {
        const auto comma = args.find(',');
        if (comma == std::string::npos) {
            throw ParameterError("adaptive threshold needs W,C");
        }
        t.mode = ThresholdMode::Adaptive;
        t.window = parse_int(args.substr(0, comma), "threshold window");
        t.offset = parse_int(args.substr(comma + 1), "threshold offset");
    } else {
        throw ParameterError("unknown threshold mode '" + mode + "'");
    }
    if (t.mode == ThresholdMode::Global && (t.level < 0 || t.level > 255)) {
        throw ParameterError("global threshold must be in 0..255");
    }
    if (t.mode == ThresholdMode::Adaptive && (t.window < 3 || t.window % 2 == 0)) {
        throw ParameterError("adaptive window must be odd and at least 3");
    }
    return t;
}

void DetectConfig::validate() const
{
    if (threshold.mode == ThresholdMode::Global && (threshold.level < 0 || threshold.level > 255)) {
        throw ParameterError("global threshold must be in 0..255");
    }
    if (threshold.mode == ThresholdMode::Adaptive && (threshold.window < 3 || threshold.window % 2 == 0)) {
        throw ParameterError("adaptive window must be odd and at least 3");
    }
    if (!(epsilon_frac > 0.0 && epsilon_frac < 0.5)) {
        throw ParameterError("epsilon_frac must be in (0, 0.5)");
    }
    if (!(min_area > 0.0)) {
        throw ParameterError("min_area must be positive");
    }
    if (pattern_side < 1) {
        throw ParameterError("pattern side must be positive");
    }
    if (acceptance_threshold && !(*acceptance_threshold > 0.0 && *acceptance_threshold <= 1.0)) {
        throw ParameterError("acceptance threshold must be in (0, 1]");
    }
}

std::array<Point2, 4> pattern_quad(std::span<const Point2, 4> outer)
{
    const Homography h = estimate_homography(unit_square(), outer);
    const double lo = 0.25;
    const double hi = 0.75;
    return {apply_homography(h, {lo, lo}), apply_homography(h, {lo, hi}), apply_homography(h, {hi, hi}),
            apply_homography(h, {hi, lo})};
}

std::vector<MarkerDetection> detect(const GrayImage& img, const DetectConfig& cfg, const PatternRegistry& reg,
                                    DetectTimings* timings)
{
    cfg.validate();
    if (cfg.pattern_side != reg.side()) {
        throw ParameterError("pattern side " + std::to_string(cfg.pattern_side) + " does not match registry side " +
                             std::to_string(reg.side()));
    }
    const double accept = cfg.acceptance_threshold.value_or(reg.acceptance_threshold());

    auto t0 = Clock::now();
    const BinaryImage mask = cfg.threshold.mode == ThresholdMode::Global
                                 ? threshold_global(img, cfg.threshold.level)
                                 : threshold_adaptive_mean(img, cfg.threshold.window, cfg.threshold.offset);
    const double threshold_ms = ms_since(t0);

    t0 = Clock::now();
    const ContourSet contours = trace_contours(mask, true);
    std::vector<QuadCandidate> quads = find_quad_candidates(contours, cfg.min_area, cfg.epsilon_frac);
    // One black square can pair with several holes; its first pairing stands for it.
    std::vector<QuadCandidate> unique;
    for (const auto& q : quads) {
        if (unique.empty() || unique.back().outer_contour != q.outer_contour) {
            unique.push_back(q);
        }
    }
    const double contours_ms = ms_since(t0);

    std::vector<Slot> slots(unique.size());
    parallel_for(static_cast<int>(unique.size()), [&](int b, int e) {
        for (int i = b; i < e; ++i) {
            Slot& slot = slots[static_cast<std::size_t>(i)];
            const QuadCandidate& q = unique[static_cast<std::size_t>(i)];
            auto s0 = Clock::now();
            std::optional<PatternImage> patch;
            std::array<Point2, 4> corners{};
            try {
                corners = order_corners(refine_quad_edges(img, q.outer));
                patch = rectify_quad(img, pattern_quad(corners), cfg.pattern_side);
            } catch (const Error&) {
            }
            slot.rectify_ms = ms_since(s0);
            if (!patch) {
                continue;
            }
            s0 = Clock::now();
            const auto ident = identify_marker(*patch, reg, accept);
            if (ident) {
                try {
                    MarkerDetection d;
                    d.id = ident->id;
                    d.score = ident->score;
                    d.rotation_deg = ident->rotation_deg;
                    d.corners = corners;
                    // The rotation label says which image corner carries the pattern's origin.
                    const int j = ident->rotation_deg / 90;
                    std::array<Point2, 4> dst{};
                    for (int k = 0; k < 4; ++k) {
                        dst[static_cast<std::size_t>(k)] = corners[static_cast<std::size_t>(((k - j) % 4 + 4) % 4)];
                    }
                    d.homography = estimate_homography(unit_square(), dst);
                    if (cfg.camera) {
                        d.pose = pose_from_homography(d.homography, *cfg.camera);
                    }
                    slot.det = std::move(d);
                } catch (const Error&) {
                }
            }
            slot.match_ms = ms_since(s0);
        }
    });

    std::vector<MarkerDetection> out;
    DetectTimings t{threshold_ms, contours_ms, 0.0, 0.0};
    for (auto& slot : slots) {
        t.rectify_ms += slot.rectify_ms;
        t.match_ms += slot.match_ms;
        if (slot.det) {
            out.push_back(std::move(*slot.det));
        }
    }
    std::sort(out.begin(), out.end(), before);
    if (timings != nullptr) {
        *timings = t;
    }
    return out;
}

std::vector<MarkerDetection> detect(const AnyImage& img, const DetectConfig& cfg, const PatternRegistry& reg,
                                    DetectTimings* timings)
{
    return detect(to_grayscale(img, cfg.gray), cfg, reg, timings);
}

} // namespace mf
