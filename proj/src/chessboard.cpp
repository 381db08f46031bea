#include "markerfind/chessboard.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <utility>

#include "markerfind/parallel.hpp"

namespace mf {
namespace {

constexpr int kNmsRadius = 3;
constexpr int kRingSamples = 24;
constexpr double kRingRadius = 4.0;
constexpr double kMinRingContrast = 20.0;
constexpr int kMaxSeeds = 5;
constexpr double kMatchRadiusFrac = 0.35;

int clampi(int v, int lo, int hi) { return std::min(std::max(v, lo), hi); }

/// Sobel derivatives scaled to intensity units per pixel, replicated borders.
void sobel(const GrayImage& img, RealImage& gx, RealImage& gy)
{
    const int w = img.width();
    const int h = img.height();
    gx = RealImage(w, h, 0.0);
    gy = RealImage(w, h, 0.0);
    parallel_for(h, [&](int y0, int y1) {
        for (int y = y0; y < y1; ++y) {
            const int ym = clampi(y - 1, 0, h - 1);
            const int yp = clampi(y + 1, 0, h - 1);
            for (int x = 0; x < w; ++x) {
                const int xm = clampi(x - 1, 0, w - 1);
                const int xp = clampi(x + 1, 0, w - 1);
                const auto v = [&](int xx, int yy) { return static_cast<double>(img.at(xx, yy)); };
                gx.at(x, y) = ((v(xp, ym) - v(xm, ym)) + 2.0 * (v(xp, y) - v(xm, y)) + (v(xp, yp) - v(xm, yp))) / 8.0;
                gy.at(x, y) = ((v(xm, yp) - v(xm, ym)) + 2.0 * (v(x, yp) - v(x, ym)) + (v(xp, yp) - v(xp, ym))) / 8.0;
            }
        }
    });
}

std::vector<double> gaussian_kernel(double sigma)
{
    const int r = static_cast<int>(std::ceil(3.0 * sigma));
    std::vector<double> k(static_cast<std::size_t>(2 * r + 1));
    double total = 0.0;
    for (int i = -r; i <= r; ++i) {
        const double v = std::exp(-(i * i) / (2.0 * sigma * sigma));
        k[static_cast<std::size_t>(i + r)] = v;
        total += v;
    }
    for (double& v : k) {
        v /= total;
    }
    return k;
}

RealImage blur(const RealImage& src, const std::vector<double>& k)
{
    const int w = src.width();
    const int h = src.height();
    const int r = static_cast<int>(k.size() / 2);
    RealImage tmp(w, h, 0.0);
    RealImage out(w, h, 0.0);
    parallel_for(h, [&](int y0, int y1) {
        for (int y = y0; y < y1; ++y) {
            for (int x = 0; x < w; ++x) {
                double acc = 0.0;
                for (int i = -r; i <= r; ++i) {
                    acc += k[static_cast<std::size_t>(i + r)] * src.at(clampi(x + i, 0, w - 1), y);
                }
                tmp.at(x, y) = acc;
            }
        }
    });
    parallel_for(h, [&](int y0, int y1) {
        for (int y = y0; y < y1; ++y) {
            for (int x = 0; x < w; ++x) {
                double acc = 0.0;
                for (int i = -r; i <= r; ++i) {
                    acc += k[static_cast<std::size_t>(i + r)] * tmp.at(x, clampi(y + i, 0, h - 1));
                }
                out.at(x, y) = acc;
            }
        }
    });
    return out;
}

struct Candidate {
    Point2 p;
    double response = 0.0;
};

/// Bright/dark runs around a circle: an X-junction shows exactly four.
bool alternating_quadrants(const GrayImage& img, Point2 c)
{
    constexpr double kPi = 3.14159265358979323846;
    std::array<double, kRingSamples> s{};
    double lo = 255.0;
    double hi = 0.0;
    for (int i = 0; i < kRingSamples; ++i) {
        const double a = 2.0 * kPi * i / kRingSamples;
        const double u = c.x + kRingRadius * std::cos(a);
        const double v = c.y + kRingRadius * std::sin(a);
        if (u < 0.5 || v < 0.5 || u > img.width() - 0.5 || v > img.height() - 0.5) {
            return false;
        }
        s[static_cast<std::size_t>(i)] = sample_bilinear(img, u, v);
        lo = std::min(lo, s[static_cast<std::size_t>(i)]);
        hi = std::max(hi, s[static_cast<std::size_t>(i)]);
    }
    if (hi - lo < kMinRingContrast) {
        return false;
    }
    const double mid = 0.5 * (lo + hi);
    int transitions = 0;
    int first = -1;
    int shortest = kRingSamples;
    int last = -1;
    for (int i = 0; i < kRingSamples; ++i) {
        const bool a = s[static_cast<std::size_t>(i)] > mid;
        const bool b = s[static_cast<std::size_t>((i + 1) % kRingSamples)] > mid;
        if (a != b) {
            ++transitions;
            if (first < 0) {
                first = i;
            } else {
                shortest = std::min(shortest, i - last);
            }
            last = i;
        }
    }
    if (transitions != 4) {
        return false;
    }
    shortest = std::min(shortest, first + kRingSamples - last);
    return shortest >= 2;
}

std::vector<Candidate> collect_candidates(const GrayImage& img, const RealImage& resp, const ChessboardOptions& opts)
{
    double peak = 0.0;
    for (double v : resp.pixels()) {
        peak = std::max(peak, v);
    }
    if (!(peak > 0.0)) {
        return {};
    }
    const double floor_v = opts.relative_threshold * peak;
    std::vector<Candidate> raw;
    for (int y = 0; y < resp.height(); ++y) {
        for (int x = 0; x < resp.width(); ++x) {
            const double v = resp.at(x, y);
            if (v <= floor_v) {
                continue;
            }
            bool is_max = true;
            for (int dy = -kNmsRadius; dy <= kNmsRadius && is_max; ++dy) {
                for (int dx = -kNmsRadius; dx <= kNmsRadius; ++dx) {
                    if ((dx == 0 && dy == 0) || !resp.contains(x + dx, y + dy)) {
                        continue;
                    }
                    const double n = resp.at(x + dx, y + dy);
                    // Plateaus keep their first pixel in raster order.
                    const bool earlier = dy < 0 || (dy == 0 && dx < 0);
                    if (n > v || (earlier && n == v)) {
                        is_max = false;
                        break;
                    }
                }
            }
            if (is_max) {
                raw.push_back({{x + 0.5, y + 0.5}, v});
            }
        }
    }
    std::stable_sort(raw.begin(), raw.end(), [](const Candidate& a, const Candidate& b) { return a.response > b.response; });

    std::vector<Candidate> out;
    for (const auto& c : raw) {
        if (!alternating_quadrants(img, c.p)) {
            continue;
        }
        Candidate r = c;
        try {
            r.p = refine_subpixel(img, c.p, opts.half_window);
        } catch (const Error&) {
            continue;
        }
        const bool duplicate = std::any_of(out.begin(), out.end(), [&](const Candidate& o) { return distance(o.p, r.p) < 2.0; });
        if (!duplicate) {
            out.push_back(r);
        }
    }
    return out;
}

using Cell = std::pair<int, int>;

/// Lattice model: affine from three seed points, projective once enough cells are filled.
class LatticeModel {
public:
    LatticeModel(Point2 origin, Point2 a, Point2 b) : origin_(origin), a_(a), b_(b) {}

    void refit(const std::map<Cell, std::size_t>& grid, const std::vector<Candidate>& cands)
    {
        std::set<int> is;
        std::set<int> js;
        for (const auto& [cell, idx] : grid) {
            is.insert(cell.first);
            js.insert(cell.second);
        }
        if (grid.size() < 6 || is.size() < 2 || js.size() < 2) {
            return;
        }
        std::vector<Point2> src;
        std::vector<Point2> dst;
        for (const auto& [cell, idx] : grid) {
            src.push_back({static_cast<double>(cell.first), static_cast<double>(cell.second)});
            dst.push_back(cands[idx].p);
        }
        try {
            h_ = fit_homography(src, dst);
        } catch (const Error&) {
        }
    }

    std::optional<Point2> predict(int i, int j) const
    {
        if (!h_) {
            return origin_ + static_cast<double>(i) * a_ + static_cast<double>(j) * b_;
        }
        try {
            return apply_homography(*h_, {static_cast<double>(i), static_cast<double>(j)});
        } catch (const Error&) {
            return std::nullopt;
        }
    }

private:
    Point2 origin_;
    Point2 a_;
    Point2 b_;
    std::optional<Homography> h_;
};

std::optional<std::map<Cell, std::size_t>> grow_lattice(const std::vector<Candidate>& cands, std::size_t seed,
                                                        const BoardSpec& spec)
{
    std::vector<std::size_t> order;
    for (std::size_t i = 0; i < cands.size(); ++i) {
        if (i != seed) {
            order.push_back(i);
        }
    }
    if (order.size() < 2) {
        return std::nullopt;
    }
    const Point2 s = cands[seed].p;
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return distance(cands[a].p, s) < distance(cands[b].p, s); });
    const std::size_t n1 = order[0];
    const Point2 a = cands[n1].p - s;
    std::optional<std::size_t> n2;
    for (std::size_t k = 1; k < std::min<std::size_t>(order.size(), 4); ++k) {
        const Point2 b = cands[order[k]].p - s;
        if (std::abs(dot(a, b)) < 0.5 * norm(a) * norm(b)) {
            n2 = order[k];
            break;
        }
    }
    if (!n2) {
        return std::nullopt;
    }

    std::map<Cell, std::size_t> grid{{{0, 0}, seed}, {{1, 0}, n1}, {{0, 1}, *n2}};
    std::vector<bool> used(cands.size(), false);
    used[seed] = used[n1] = used[*n2] = true;
    LatticeModel model(s, a, cands[*n2].p - s);
    const int limit = std::max(spec.board_width, spec.board_height);

    for (;;) {
        model.refit(grid, cands);
        std::set<Cell> frontier;
        for (const auto& [cell, idx] : grid) {
            for (const Cell& d : {Cell{1, 0}, Cell{-1, 0}, Cell{0, 1}, Cell{0, -1}}) {
                const Cell n{cell.first + d.first, cell.second + d.second};
                if (!grid.count(n)) {
                    frontier.insert(n);
                }
            }
        }
        int added = 0;
        for (const Cell& cell : frontier) {
            const auto p = model.predict(cell.first, cell.second);
            if (!p) {
                continue;
            }
            double pitch = 1e300;
            for (const Cell& d : {Cell{1, 0}, Cell{-1, 0}, Cell{0, 1}, Cell{0, -1}}) {
                if (const auto q = model.predict(cell.first + d.first, cell.second + d.second)) {
                    pitch = std::min(pitch, distance(*p, *q));
                }
            }
            const double radius = kMatchRadiusFrac * pitch;
            std::optional<std::size_t> best;
            double best_d = radius;
            for (std::size_t k = 0; k < cands.size(); ++k) {
                if (used[k]) {
                    continue;
                }
                const double d = distance(cands[k].p, *p);
                if (d < best_d) {
                    best_d = d;
                    best = k;
                }
            }
            if (best) {
                grid[cell] = *best;
                used[*best] = true;
                ++added;
            }
        }
        if (added == 0) {
            break;
        }
        int imin = 0, imax = 0, jmin = 0, jmax = 0;
        for (const auto& [cell, idx] : grid) {
            imin = std::min(imin, cell.first);
            imax = std::max(imax, cell.first);
            jmin = std::min(jmin, cell.second);
            jmax = std::max(jmax, cell.second);
        }
        if (imax - imin + 1 > limit + 2 || jmax - jmin + 1 > limit + 2) {
            break;
        }
    }
    return grid;
}

/// Fully filled ni x nj window with the largest total response.
std::optional<std::pair<int, int>> best_window(const std::map<Cell, std::size_t>& grid, const std::vector<Candidate>& cands,
                                               int ni, int nj)
{
    int imin = 0, imax = 0, jmin = 0, jmax = 0;
    for (const auto& [cell, idx] : grid) {
        imin = std::min(imin, cell.first);
        imax = std::max(imax, cell.first);
        jmin = std::min(jmin, cell.second);
        jmax = std::max(jmax, cell.second);
    }
    std::optional<std::pair<int, int>> best;
    double best_score = -1.0;
    for (int j0 = jmin; j0 + nj - 1 <= jmax; ++j0) {
        for (int i0 = imin; i0 + ni - 1 <= imax; ++i0) {
            double score = 0.0;
            bool full = true;
            for (int j = j0; j < j0 + nj && full; ++j) {
                for (int i = i0; i < i0 + ni; ++i) {
                    const auto it = grid.find({i, j});
                    if (it == grid.end()) {
                        full = false;
                        break;
                    }
                    score += cands[it->second].response;
                }
            }
            if (full && score > best_score) {
                best_score = score;
                best = std::make_pair(i0, j0);
            }
        }
    }
    return best;
}

/// Row-major corners, right-handed, starting at the extreme with the smallest x + y.
CornerGrid canonical_grid(const std::vector<std::vector<std::size_t>>& rows, const std::vector<Candidate>& cands,
                          const BoardSpec& spec)
{
    const int w = spec.board_width;
    const int h = spec.board_height;
    struct Layout {
        bool transpose;
        bool flip_c;
        bool flip_r;
    };
    std::vector<Layout> layouts;
    const int src_rows = static_cast<int>(rows.size());
    const int src_cols = static_cast<int>(rows.front().size());
    for (bool t : {false, true}) {
        const int r = t ? src_cols : src_rows;
        const int c = t ? src_rows : src_cols;
        if (r != h || c != w) {
            continue;
        }
        for (bool fr : {false, true}) {
            for (bool fc : {false, true}) {
                layouts.push_back({t, fc, fr});
            }
        }
    }
    const auto pick = [&](const Layout& l, int r, int c) {
        int rr = l.flip_r ? h - 1 - r : r;
        int cc = l.flip_c ? w - 1 - c : c;
        if (l.transpose) {
            std::swap(rr, cc);
        }
        return rows[static_cast<std::size_t>(rr)][static_cast<std::size_t>(cc)];
    };

    std::optional<Layout> chosen;
    double best = 1e300;
    for (const auto& l : layouts) {
        const Point2 p00 = cands[pick(l, 0, 0)].p;
        const Point2 u = cands[pick(l, 0, w - 1)].p - p00;
        const Point2 v = cands[pick(l, h - 1, 0)].p - p00;
        if (!(cross(u, v) > 0.0)) {
            continue;
        }
        const double key = p00.x + p00.y;
        if (key < best) {
            best = key;
            chosen = l;
        }
    }
    if (!chosen) {
        throw NotFoundError("chessboard lattice has no consistent orientation");
    }
    CornerGrid out;
    for (int r = 0; r < h; ++r) {
        for (int c = 0; c < w; ++c) {
            const auto& cand = cands[pick(*chosen, r, c)];
            out.corners.push_back(cand.p);
            out.response.push_back(cand.response);
        }
    }
    return out;
}

} // namespace

BoardSpec::BoardSpec(int width, int height) : board_width(width), board_height(height)
{
    if (width < 2 || height < 2) {
        throw ParameterError("board dimensions must be at least 2x2 inner corners");
    }
}

RealImage corner_response(const GrayImage& img, double sigma)
{
    if (!(sigma >= 0.5 && sigma <= 3.0)) {
        throw ParameterError("corner response sigma must be in [0.5, 3]");
    }
    if (img.width() < 7 || img.height() < 7) {
        throw ParameterError("corner response needs an image of at least 7x7");
    }
    const int w = img.width();
    const int h = img.height();
    RealImage gx;
    RealImage gy;
    sobel(img, gx, gy);
    RealImage xx(w, h, 0.0);
    RealImage xy(w, h, 0.0);
    RealImage yy(w, h, 0.0);
    for (std::size_t i = 0; i < img.size(); ++i) {
        const double a = gx.pixels()[i];
        const double b = gy.pixels()[i];
        xx.pixels()[i] = a * a;
        xy.pixels()[i] = a * b;
        yy.pixels()[i] = b * b;
    }
    const auto k = gaussian_kernel(sigma);
    xx = blur(xx, k);
    xy = blur(xy, k);
    yy = blur(yy, k);

    const int border = static_cast<int>(std::ceil(3.0 * sigma));
    RealImage out(w, h, 0.0);
    parallel_for(h, [&](int y0, int y1) {
        for (int y = y0; y < y1; ++y) {
            if (y < border || y >= h - border) {
                continue;
            }
            for (int x = border; x < w - border; ++x) {
                const double a = xx.at(x, y);
                const double b = xy.at(x, y);
                const double c = yy.at(x, y);
                const double tr = a + c;
                out.at(x, y) = (a * c - b * b) - kHarrisK * tr * tr;
            }
        }
    });
    return out;
}

Point2 refine_subpixel(const GrayImage& img, Point2 p, int half_window)
{
    if (half_window < 1) {
        throw ParameterError("half_window must be positive");
    }
    const double sigma = std::max(1.0, 0.5 * half_window);
    const Point2 start = p;
    Point2 c = p;
    for (int iter = 0; iter < 20; ++iter) {
        const int cx = static_cast<int>(std::floor(c.x));
        const int cy = static_cast<int>(std::floor(c.y));
        if (cx - half_window - 1 < 0 || cy - half_window - 1 < 0 || cx + half_window + 1 >= img.width() ||
            cy + half_window + 1 >= img.height()) {
            throw ParameterError("refinement window leaves the image");
        }
        double a11 = 0.0, a12 = 0.0, a22 = 0.0, b1 = 0.0, b2 = 0.0;
        for (int qy = cy - half_window; qy <= cy + half_window; ++qy) {
            for (int qx = cx - half_window; qx <= cx + half_window; ++qx) {
                const double gx = 0.5 * (static_cast<double>(img.at(qx + 1, qy)) - img.at(qx - 1, qy));
                const double gy = 0.5 * (static_cast<double>(img.at(qx, qy + 1)) - img.at(qx, qy - 1));
                const double ux = qx + 0.5;
                const double uy = qy + 0.5;
                const double d2 = (ux - c.x) * (ux - c.x) + (uy - c.y) * (uy - c.y);
                const double mag = std::hypot(gx, gy);
                if (mag == 0.0) {
                    continue;
                }
                const double wgt = std::exp(-d2 / (2.0 * sigma * sigma)) / mag;
                const double gxx = wgt * gx * gx;
                const double gxy = wgt * gx * gy;
                const double gyy = wgt * gy * gy;
                a11 += gxx;
                a12 += gxy;
                a22 += gyy;
                b1 += gxx * ux + gxy * uy;
                b2 += gxy * ux + gyy * uy;
            }
        }
        const double tr = a11 + a22;
        const double det = a11 * a22 - a12 * a12;
        if (!(tr > 0.0) || det <= 1e-4 * tr * tr) {
            throw NoStructureError("refinement window lacks two gradient directions");
        }
        Point2 next{(a22 * b1 - a12 * b2) / det, (a11 * b2 - a12 * b1) / det};
        const Point2 total = next - start;
        bool clamped = false;
        if (norm(total) > half_window) {
            next = start + (half_window / norm(total)) * total;
            clamped = true;
        }
        const double shift = distance(next, c);
        c = next;
        if (shift < 0.01 || clamped) {
            break;
        }
    }
    return c;
}

CornerGrid find_chessboard_corners(const GrayImage& img, const BoardSpec& spec, const ChessboardOptions& opts)
{
    if (spec.board_width < 2 || spec.board_height < 2) {
        throw ParameterError("board dimensions must be at least 2x2 inner corners");
    }
    const RealImage resp = corner_response(img, opts.sigma);
    const auto cands = collect_candidates(img, resp, opts);
    const auto needed = static_cast<std::size_t>(spec.corner_count());
    if (cands.size() < needed) {
        throw NotFoundError("found " + std::to_string(cands.size()) + " corner candidates, need " + std::to_string(needed));
    }
    for (std::size_t seed = 0; seed < std::min<std::size_t>(cands.size(), kMaxSeeds); ++seed) {
        const auto grid = grow_lattice(cands, seed, spec);
        if (!grid || grid->size() < needed) {
            continue;
        }
        for (bool t : {false, true}) {
            const int ni = t ? spec.board_height : spec.board_width;
            const int nj = t ? spec.board_width : spec.board_height;
            const auto win = best_window(*grid, cands, ni, nj);
            if (!win) {
                continue;
            }
            std::vector<std::vector<std::size_t>> rows;
            for (int j = 0; j < nj; ++j) {
                std::vector<std::size_t> row;
                for (int i = 0; i < ni; ++i) {
                    row.push_back(grid->at({win->first + i, win->second + j}));
                }
                rows.push_back(std::move(row));
            }
            try {
                return canonical_grid(rows, cands, spec);
            } catch (const NotFoundError&) {
            }
        }
    }
    throw NotFoundError("no complete " + std::to_string(spec.board_width) + "x" + std::to_string(spec.board_height) +
                        " corner lattice");
}

std::array<int, 4> outer_corner_indices(const BoardSpec& spec)
{
    const int w = spec.board_width;
    const int h = spec.board_height;
    return {0, w - 1, (h - 1) * w, (h - 1) * w + w - 1};
}

std::array<Point2, 4> outer_corners(const CornerGrid& grid, const BoardSpec& spec)
{
    if (grid.corners.size() != static_cast<std::size_t>(spec.corner_count())) {
        throw ParameterError("corner grid does not match the board size");
    }
    const auto idx = outer_corner_indices(spec);
    std::array<Point2, 4> out{};
    for (std::size_t k = 0; k < 4; ++k) {
        out[k] = grid.corners[static_cast<std::size_t>(idx[k])];
    }
    return out;
}

} // namespace mf
