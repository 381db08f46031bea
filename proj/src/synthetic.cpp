#include "markerfind/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>

#include "font.hpp"
#include "markerfind/contour.hpp"

namespace mf {
namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr int kSuper = 4;
// Marker and board edges carry the ground truth, so they get a finer grid.
constexpr int kFine = 8;
constexpr int kCells = 6;

using Box = std::array<double, 4>; // x0, y0, x1, y1

Box quad_box(const std::array<Point2, 4>& q)
{
    Box b{q[0].x, q[0].y, q[0].x, q[0].y};
    for (const auto& p : q) {
        b[0] = std::min(b[0], p.x);
        b[1] = std::min(b[1], p.y);
        b[2] = std::max(b[2], p.x);
        b[3] = std::max(b[3], p.y);
    }
    return b;
}

bool boxes_overlap(const Box& a, const Box& b, double margin)
{
    return a[0] - margin < b[2] && b[0] - margin < a[2] && a[1] - margin < b[3] && b[1] - margin < a[3];
}

std::array<Point2, 4> quiet_zone(const Homography& h)
{
    const double lo = -kQuietZone;
    const double hi = 1.0 + kQuietZone;
    return {apply_homography(h, {lo, lo}), apply_homography(h, {lo, hi}), apply_homography(h, {hi, hi}),
            apply_homography(h, {hi, lo})};
}

std::array<Point2, 4> model_corners(const Homography& h)
{
    std::array<Point2, 4> out{};
    const auto sq = unit_square();
    for (std::size_t k = 0; k < 4; ++k) {
        out[k] = apply_homography(h, sq[k]);
    }
    return out;
}

/// Blends `value` into the pixels of `img` covered by `inside`, with 4x4 supersampled coverage.
void paint(RealImage& img, const Box& box, const std::function<bool(double, double)>& inside, double value)
{
    const int x0 = std::max(0, static_cast<int>(std::floor(box[0])));
    const int y0 = std::max(0, static_cast<int>(std::floor(box[1])));
    const int x1 = std::min(img.width() - 1, static_cast<int>(std::ceil(box[2])));
    const int y1 = std::min(img.height() - 1, static_cast<int>(std::ceil(box[3])));
    for (int y = y0; y <= y1; ++y) {
        for (int x = x0; x <= x1; ++x) {
            int hits = 0;
            for (int sy = 0; sy < kSuper; ++sy) {
                for (int sx = 0; sx < kSuper; ++sx) {
                    if (inside(x + (sx + 0.5) / kSuper, y + (sy + 0.5) / kSuper)) {
                        ++hits;
                    }
                }
            }
            if (hits > 0) {
                const double cov = static_cast<double>(hits) / (kSuper * kSuper);
                img.at(x, y) = img.at(x, y) * (1.0 - cov) + value * cov;
            }
        }
    }
}

GrayImage quantize(const RealImage& img)
{
    GrayImage out(img.width(), img.height());
    for (std::size_t i = 0; i < img.size(); ++i) {
        out.pixels()[i] = static_cast<std::uint8_t>(std::clamp(std::lround(img.pixels()[i]), 0L, 255L));
    }
    return out;
}

bool in_triangle(Point2 p, const std::array<Point2, 3>& t)
{
    const double d1 = cross(t[1] - t[0], p - t[0]);
    const double d2 = cross(t[2] - t[1], p - t[1]);
    const double d3 = cross(t[0] - t[2], p - t[2]);
    const bool neg = d1 < 0 || d2 < 0 || d3 < 0;
    const bool pos = d1 > 0 || d2 > 0 || d3 > 0;
    return !(neg && pos);
}

/// One distractor shape of radius r around c.
void draw_distractor(RealImage& img, Rng& rng, Point2 c, double r, double ink, double field)
{
    const Box box{c.x - r, c.y - r, c.x + r, c.y + r};
    const int kind = rng.uniform_int(0, 5);
    const double rot = rng.uniform(0.0, 2.0 * kPi);
    const auto tri = [&](double radius) {
        std::array<Point2, 3> t{};
        for (int k = 0; k < 3; ++k) {
            const double a = rot + 2.0 * kPi * k / 3.0;
            t[static_cast<std::size_t>(k)] = {c.x + radius * std::cos(a), c.y + radius * std::sin(a)};
        }
        return t;
    };
    const auto in_disc = [c](double radius) {
        return [c, radius](double u, double v) { return (u - c.x) * (u - c.x) + (v - c.y) * (v - c.y) <= radius * radius; };
    };
    switch (kind) {
    case 0:
        paint(img, box, in_disc(r), ink);
        break;
    case 1: {
        // L-shape: two bars meeting at a right angle, rotated.
        const double ca = std::cos(rot);
        const double sa = std::sin(rot);
        const double t = 0.35 * r;
        paint(img, box,
              [=](double u, double v) {
                  const double lx = ca * (u - c.x) + sa * (v - c.y);
                  const double ly = -sa * (u - c.x) + ca * (v - c.y);
                  const bool bar1 = lx >= -r * 0.7 && lx <= r * 0.7 && ly >= r * 0.7 - t && ly <= r * 0.7;
                  const bool bar2 = lx >= -r * 0.7 && lx <= -r * 0.7 + t && ly >= -r * 0.7 && ly <= r * 0.7;
                  return bar1 || bar2;
              },
              ink);
        break;
    }
    case 2: {
        const auto t = tri(r);
        paint(img, box, [t](double u, double v) { return in_triangle({u, v}, t); }, ink);
        break;
    }
    case 3:
        // Ring.
        paint(img, box, in_disc(r), ink);
        paint(img, box, in_disc(0.55 * r), field);
        break;
    case 4: {
        // Triangle inside a disc.
        paint(img, box, in_disc(r), ink);
        const auto t = tri(0.6 * r);
        paint(img, box, [t](double u, double v) { return in_triangle({u, v}, t); }, field);
        break;
    }
    default: {
        // Short text line.
        static const char* const kWords[] = {"MARK", "AR", "TAG 7", "XYZ", "HELLO", "B2"};
        const std::string word = kWords[rng.uniform_int(0, 5)];
        const double scale = std::max(1.0, std::floor(2.0 * r / (word.size() * (detail::kGlyphWidth + 1))));
        const double w = word.size() * (detail::kGlyphWidth + 1) * scale;
        const double x0 = c.x - 0.5 * w;
        const double y0 = c.y - 0.5 * detail::kGlyphHeight * scale;
        const Box tb{std::max(x0, box[0]), std::max(y0, box[1]), std::min(x0 + w, box[2]),
                     std::min(y0 + detail::kGlyphHeight * scale, box[3])};
        paint(img, tb,
              [=](double u, double v) {
                  const int col = static_cast<int>(std::floor((u - x0) / scale));
                  const int row = static_cast<int>(std::floor((v - y0) / scale));
                  if (col < 0 || row < 0 || row >= detail::kGlyphHeight) {
                      return false;
                  }
                  const std::size_t ch = static_cast<std::size_t>(col / (detail::kGlyphWidth + 1));
                  const int gc = col % (detail::kGlyphWidth + 1);
                  return ch < word.size() && gc < detail::kGlyphWidth && detail::glyph_bit(word[ch], gc, row);
              },
              ink);
        break;
    }
    }
}

/// False when a light cell is enclosed or either colour has fewer than 4 cells.
bool acceptable_cells(const std::array<std::array<bool, 4>, 4>& dark)
{
    int n_dark = 0;
    for (const auto& row : dark) {
        n_dark += static_cast<int>(std::count(row.begin(), row.end(), true));
    }
    if (n_dark < 4 || n_dark > 12) {
        return false;
    }
    // Light cells must reach the white ring through 4-connected light cells.
    std::array<std::array<bool, 4>, 4> reach{};
    std::vector<std::pair<int, int>> stack;
    for (int y = 0; y < 4; ++y) {
        for (int x = 0; x < 4; ++x) {
            if ((x == 0 || y == 0 || x == 3 || y == 3) && !dark[y][x]) {
                reach[y][x] = true;
                stack.emplace_back(x, y);
            }
        }
    }
    while (!stack.empty()) {
        const auto [x, y] = stack.back();
        stack.pop_back();
        const int dx[] = {1, -1, 0, 0};
        const int dy[] = {0, 0, 1, -1};
        for (int k = 0; k < 4; ++k) {
            const int nx = x + dx[k];
            const int ny = y + dy[k];
            if (nx >= 0 && ny >= 0 && nx < 4 && ny < 4 && !dark[ny][nx] && !reach[ny][nx]) {
                reach[ny][nx] = true;
                stack.emplace_back(nx, ny);
            }
        }
    }
    for (int y = 0; y < 4; ++y) {
        for (int x = 0; x < 4; ++x) {
            if (!dark[y][x] && !reach[y][x]) {
                return false;
            }
        }
    }
    return true;
}

GrayImage cells_to_image(const std::array<std::array<bool, 4>, 4>& dark, int side)
{
    GrayImage img(side, side, 255);
    for (int y = 0; y < side; ++y) {
        for (int x = 0; x < side; ++x) {
            const int cx = x * kCells / side - 1;
            const int cy = y * kCells / side - 1;
            if (cx >= 0 && cy >= 0 && cx < 4 && cy < 4 && dark[cy][cx]) {
                img.at(x, y) = 0;
            }
        }
    }
    return img;
}

std::array<std::array<bool, 4>, 4> random_cells(Rng& rng)
{
    std::array<std::array<bool, 4>, 4> dark{};
    do {
        for (auto& row : dark) {
            for (auto& cell : row) {
                cell = rng.uniform() < 0.5;
            }
        }
    } while (!acceptable_cells(dark));
    return dark;
}

} // namespace

double Rng::uniform()
{
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

int Rng::uniform_int(int lo, int hi)
{
    if (hi < lo) {
        throw ParameterError("uniform_int: empty range");
    }
    const auto span = static_cast<double>(hi) - lo + 1.0;
    return lo + std::min(static_cast<int>(uniform() * span), hi - lo);
}

double Rng::normal()
{
    if (spare_) {
        const double v = *spare_;
        spare_.reset();
        return v;
    }
    const double u1 = 1.0 - uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    spare_ = r * std::sin(2.0 * kPi * u2);
    return r * std::cos(2.0 * kPi * u2);
}

PlacementTruth placement_truth(const Placement& p, const std::optional<Pose>& pose)
{
    const auto raw = model_corners(p.h);
    PlacementTruth t;
    t.id = p.id;
    t.corners = order_corners(raw);
    t.pose = pose;
    for (int j = 0; j < 4; ++j) {
        if (raw[static_cast<std::size_t>(j)] == t.corners[0]) {
            t.rotation_deg = 90 * j;
        }
    }
    return t;
}

void update_ground_truth(SyntheticScene& scene)
{
    scene.ground_truth.clear();
    for (std::size_t i = 0; i < scene.placements.size(); ++i) {
        const std::optional<Pose> pose = i < scene.poses.size() ? scene.poses[i] : std::nullopt;
        scene.ground_truth.push_back(placement_truth(scene.placements[i], pose));
    }
}

GrayImage render_synthetic(const SyntheticScene& scene, const PatternRegistry& reg, double noise_sigma)
{
    if (!(noise_sigma >= 0.0)) {
        throw ParameterError("noise sigma must be non-negative");
    }
    const GrayImage& bg = scene.background;
    RealImage out(bg.width(), bg.height(), 0.0);
    for (std::size_t i = 0; i < bg.size(); ++i) {
        out.pixels()[i] = bg.pixels()[i];
    }
    const int s = reg.side();

    for (const auto& pl : scene.placements) {
        const auto* entry = reg.find(pl.id);
        if (entry == nullptr) {
            throw ParameterError("placement id '" + pl.id + "' is not in the registry");
        }
        if (!(pl.contrast > 0.0 && pl.contrast <= 1.0)) {
            throw ParameterError("placement contrast must be in (0, 1]");
        }
        const auto qz = quiet_zone(pl.h);
        for (const auto& p : qz) {
            if (!(p.x >= 0.0 && p.y >= 0.0 && p.x <= bg.width() && p.y <= bg.height())) {
                throw ParameterError("placement '" + pl.id + "' leaves the frame");
            }
        }
        const GrayImage& pattern = entry->pattern.image();
        const double black = 128.0 - 127.0 * pl.contrast;
        const double white = 128.0 + 127.0 * pl.contrast;
        const Mat3 inv = pl.h.inverse().matrix();
        const Box box = quad_box(qz);
        const int x0 = std::max(0, static_cast<int>(std::floor(box[0])));
        const int y0 = std::max(0, static_cast<int>(std::floor(box[1])));
        const int x1 = std::min(bg.width() - 1, static_cast<int>(std::ceil(box[2])));
        const int y1 = std::min(bg.height() - 1, static_cast<int>(std::ceil(box[3])));
        for (int y = y0; y <= y1; ++y) {
            for (int x = x0; x <= x1; ++x) {
                double acc = 0.0;
                for (int sy = 0; sy < kFine; ++sy) {
                    for (int sx = 0; sx < kFine; ++sx) {
                        const double px = x + (sx + 0.5) / kFine;
                        const double py = y + (sy + 0.5) / kFine;
                        const double w = inv[2][0] * px + inv[2][1] * py + inv[2][2];
                        const double u = (inv[0][0] * px + inv[0][1] * py + inv[0][2]) / w;
                        const double v = (inv[1][0] * px + inv[1][1] * py + inv[1][2]) / w;
                        const double lo = -kQuietZone;
                        const double hi = 1.0 + kQuietZone;
                        if (!(u >= lo && u < hi && v >= lo && v < hi)) {
                            acc += out.at(x, y);
                        } else if (u >= kPatternInset && u < 1.0 - kPatternInset && v >= kPatternInset &&
                                   v < 1.0 - kPatternInset) {
                            const double scale = s / (1.0 - 2.0 * kPatternInset);
                            const double t = sample_bilinear(pattern, (u - kPatternInset) * scale, (v - kPatternInset) * scale);
                            acc += black + (white - black) * t / 255.0;
                        } else if (u >= 0.0 && u < 1.0 && v >= 0.0 && v < 1.0) {
                            acc += black;
                        } else {
                            acc += white;
                        }
                    }
                }
                out.at(x, y) = acc / (kFine * kFine);
            }
        }
    }

    if (noise_sigma > 0.0) {
        Rng rng(scene.noise_seed);
        for (double& v : out.pixels()) {
            v += noise_sigma * rng.normal();
        }
    }
    return quantize(out);
}

GrayImage random_pattern(Rng& rng, int side)
{
    if (side < kCells) {
        throw ParameterError("pattern side must be at least 6");
    }
    return cells_to_image(random_cells(rng), side);
}

PatternRegistry make_pattern_registry(int count, std::uint64_t seed, int side)
{
    if (count < 1) {
        throw ParameterError("registry size must be positive");
    }
    Rng rng(seed);
    std::vector<PatternEntry> entries;
    std::vector<std::array<GrayImage, 4>> rotations;
    int attempts = 0;
    while (static_cast<int>(entries.size()) < count) {
        if (++attempts > 100000) {
            throw ParameterError("could not find enough distinct patterns");
        }
        const GrayImage img = random_pattern(rng, side);
        std::array<GrayImage, 4> rot;
        for (int k = 0; k < 4; ++k) {
            rot[static_cast<std::size_t>(k)] = rotate_square(img, 90 * k);
        }
        bool distinct = true;
        for (int k = 1; k < 4 && distinct; ++k) {
            distinct = ncc_score(rot[static_cast<std::size_t>(k)], img) < 0.5;
        }
        for (const auto& other : rotations) {
            for (int k = 0; k < 4 && distinct; ++k) {
                distinct = ncc_score(rot[static_cast<std::size_t>(k)], other[0]) < 0.5;
            }
        }
        if (!distinct) {
            continue;
        }
        char id[16];
        std::snprintf(id, sizeof id, "m%02zu", entries.size());
        entries.push_back(PatternEntry{id, PatternImage(img)});
        rotations.push_back(rot);
    }
    return PatternRegistry(std::move(entries));
}

CameraIntrinsics default_camera(int width, int height)
{
    return CameraIntrinsics::pinhole(600.0, 600.0, 0.5 * width, 0.5 * height);
}

Pose marker_pose(const CameraIntrinsics& cam, Point2 centre, double side_px, double tilt_deg, double tilt_axis_deg,
                 double spin_deg)
{
    const double z = cam.fx() / side_px;
    const double a = tilt_axis_deg * kPi / 180.0;
    const Mat3 tilt = axis_angle({std::cos(a), std::sin(a), 0.0}, tilt_deg * kPi / 180.0);
    const Mat3 spin = axis_angle({0.0, 0.0, 1.0}, spin_deg * kPi / 180.0);
    Pose pose;
    pose.R = tilt * spin;
    const Vec3 ray = inverse(cam.K()) * Vec3{centre.x, centre.y, 1.0};
    const Vec3 mid = pose.R * Vec3{0.5, 0.5, 0.0};
    pose.T = {z * ray[0] - mid[0], z * ray[1] - mid[1], z * ray[2] - mid[2]};
    return pose;
}

GrayImage random_background(Rng& rng, int width, int height, const std::vector<Box>& avoid, int distractors)
{
    const double base = rng.uniform(70.0, 180.0);
    const double gx = rng.uniform(-0.12, 0.12);
    const double gy = rng.uniform(-0.12, 0.12);
    RealImage img(width, height, 0.0);
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            img.at(x, y) = std::clamp(base + gx * (x + 0.5 - 0.5 * width) + gy * (y + 0.5 - 0.5 * height), 20.0, 235.0);
        }
    }
    std::vector<Box> taken = avoid;
    for (int d = 0; d < distractors; ++d) {
        for (int attempt = 0; attempt < 50; ++attempt) {
            const double r = rng.uniform(12.0, 45.0);
            const Point2 c{rng.uniform(r + 2.0, width - r - 2.0), rng.uniform(r + 2.0, height - r - 2.0)};
            const Box box{c.x - r, c.y - r, c.x + r, c.y + r};
            const bool clear =
                std::none_of(taken.begin(), taken.end(), [&](const Box& t) { return boxes_overlap(box, t, 6.0); });
            if (!clear) {
                continue;
            }
            const double local = img.at(static_cast<int>(c.x), static_cast<int>(c.y));
            const bool dark_ink = rng.uniform() < 0.6;
            const double ink = dark_ink ? std::max(0.0, local - rng.uniform(60.0, 110.0))
                                        : std::min(255.0, local + rng.uniform(60.0, 110.0));
            draw_distractor(img, rng, c, r, ink, local);
            taken.push_back(box);
            break;
        }
    }
    return quantize(img);
}

SyntheticScene random_scene(const PatternRegistry& reg, Rng& rng, const RandomSceneOptions& opts)
{
    SyntheticScene scene;
    const CameraIntrinsics cam = default_camera(opts.width, opts.height);
    scene.camera = cam;
    const int n = opts.max_markers > 0 ? rng.uniform_int(opts.min_markers, opts.max_markers) : 0;
    std::vector<Box> boxes;
    for (int m = 0; m < n; ++m) {
        for (int attempt = 0; attempt < 500; ++attempt) {
            const auto& entry = reg.entries()[static_cast<std::size_t>(rng.uniform_int(0, static_cast<int>(reg.size()) - 1))];
            const double side = rng.uniform(opts.min_side_px * 1.25, opts.max_side_px);
            const double tilt = rng.uniform(0.0, opts.max_tilt_deg);
            const double axis = rng.uniform(0.0, 360.0);
            const double spin = rng.uniform(0.0, 360.0);
            const double contrast = rng.uniform(opts.min_contrast, 1.0);
            const Point2 centre{rng.uniform(0.0, opts.width), rng.uniform(0.0, opts.height)};
            const Pose pose = marker_pose(cam, centre, side, tilt, axis, spin);
            Placement pl{entry.id, homography_from_pose(cam, pose), contrast};

            const auto qz = quiet_zone(pl.h);
            const bool in_frame = std::all_of(qz.begin(), qz.end(), [&](const Point2& p) {
                return p.x >= 3.0 && p.y >= 3.0 && p.x <= opts.width - 3.0 && p.y <= opts.height - 3.0;
            });
            if (!in_frame) {
                continue;
            }
            const auto corners = model_corners(pl.h);
            double min_edge = 1e300;
            for (std::size_t k = 0; k < 4; ++k) {
                min_edge = std::min(min_edge, distance(corners[k], corners[(k + 1) % 4]));
            }
            if (min_edge < opts.min_side_px) {
                continue;
            }
            // Two corners at nearly the same height make the canonical start corner ambiguous.
            std::array<double, 4> ys{};
            for (std::size_t k = 0; k < 4; ++k) {
                ys[k] = corners[k].y;
            }
            std::sort(ys.begin(), ys.end());
            if (ys[1] - ys[0] < 2.0) {
                continue;
            }
            const Box box = quad_box(qz);
            if (std::any_of(boxes.begin(), boxes.end(), [&](const Box& b) { return boxes_overlap(box, b, 4.0); })) {
                continue;
            }
            boxes.push_back(box);
            scene.placements.push_back(pl);
            scene.poses.emplace_back(pose);
            break;
        }
    }
    scene.background =
        random_background(rng, opts.width, opts.height, boxes, rng.uniform_int(opts.min_distractors, opts.max_distractors));
    scene.noise_sigma = rng.uniform(0.0, opts.max_noise_sigma);
    scene.noise_seed = rng.next();
    update_ground_truth(scene);
    return scene;
}

ChessboardScene make_board_scene(const BoardSpec& spec, double square_px, double tilt_deg, int width, int height)
{
    const CameraIntrinsics cam = CameraIntrinsics::pinhole(800.0, 800.0, 0.5 * width, 0.5 * height);
    Pose pose;
    pose.R = axis_angle({0.0, 1.0, 0.0}, tilt_deg * kPi / 180.0);
    const double z = cam.fx() / square_px;
    const Vec3 mid = pose.R * Vec3{0.5 * (spec.board_width + 1), 0.5 * (spec.board_height + 1), 0.0};
    pose.T = {-mid[0], -mid[1], z - mid[2]};
    return ChessboardScene{spec, homography_from_pose(cam, pose), width, height};
}

GrayImage render_chessboard(const ChessboardScene& scene)
{
    constexpr double kDark = 20.0;
    constexpr double kLight = 235.0;
    const Mat3 inv = scene.h.inverse().matrix();
    const double uw = scene.spec.board_width + 1;
    const double vh = scene.spec.board_height + 1;
    RealImage out(scene.width, scene.height, kLight);
    for (int y = 0; y < scene.height; ++y) {
        for (int x = 0; x < scene.width; ++x) {
            double acc = 0.0;
            for (int sy = 0; sy < kFine; ++sy) {
                for (int sx = 0; sx < kFine; ++sx) {
                    const double px = x + (sx + 0.5) / kFine;
                    const double py = y + (sy + 0.5) / kFine;
                    const double w = inv[2][0] * px + inv[2][1] * py + inv[2][2];
                    const double u = (inv[0][0] * px + inv[0][1] * py + inv[0][2]) / w;
                    const double v = (inv[1][0] * px + inv[1][1] * py + inv[1][2]) / w;
                    const bool on_board = w > 0.0 && u >= 0.0 && u < uw && v >= 0.0 && v < vh;
                    const bool dark = on_board && (static_cast<long>(std::floor(u)) + static_cast<long>(std::floor(v))) % 2 == 0;
                    acc += dark ? kDark : kLight;
                }
            }
            out.at(x, y) = acc / (kFine * kFine);
        }
    }
    return quantize(out);
}

std::vector<Point2> chessboard_truth(const ChessboardScene& scene)
{
    const int w = scene.spec.board_width;
    const int h = scene.spec.board_height;
    // Lattice point (i, j) of the board, i along the board's u axis.
    const auto at = [&](int i, int j) {
        return apply_homography(scene.h, {static_cast<double>(i + 1), static_cast<double>(j + 1)});
    };
    // Each symmetry maps a row-major (r, c) to lattice (i, j).
    std::vector<std::function<std::pair<int, int>(int, int)>> maps;
    maps.emplace_back([=](int r, int c) { return std::make_pair(c, r); });
    maps.emplace_back([=](int r, int c) { return std::make_pair(w - 1 - c, r); });
    maps.emplace_back([=](int r, int c) { return std::make_pair(c, h - 1 - r); });
    maps.emplace_back([=](int r, int c) { return std::make_pair(w - 1 - c, h - 1 - r); });
    if (w == h) {
        maps.emplace_back([=](int r, int c) { return std::make_pair(r, c); });
        maps.emplace_back([=](int r, int c) { return std::make_pair(w - 1 - r, c); });
        maps.emplace_back([=](int r, int c) { return std::make_pair(r, h - 1 - c); });
        maps.emplace_back([=](int r, int c) { return std::make_pair(w - 1 - r, h - 1 - c); });
    }
    std::vector<Point2> best;
    double best_key = 1e300;
    for (const auto& m : maps) {
        const auto corner = [&](int r, int c) {
            const auto [i, j] = m(r, c);
            return at(i, j);
        };
        const Point2 p0 = corner(0, 0);
        if (!(cross(corner(0, w - 1) - p0, corner(h - 1, 0) - p0) > 0.0)) {
            continue;
        }
        if (p0.x + p0.y < best_key) {
            best_key = p0.x + p0.y;
            best.clear();
            for (int r = 0; r < h; ++r) {
                for (int c = 0; c < w; ++c) {
                    best.push_back(corner(r, c));
                }
            }
        }
    }
    return best;
}

} // namespace mf
