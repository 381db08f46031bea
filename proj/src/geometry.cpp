#include "markerfind/geometry.hpp"

#include <algorithm>
#include <limits>
#include <string>

namespace mf {
namespace {

template <std::size_t N>
using Matrix = std::array<std::array<double, N>, N>;

/// Gaussian elimination with partial pivoting; `a` and `b` are consumed.
template <std::size_t N>
std::array<double, N> solve(Matrix<N> a, std::array<double, N> b)
{
    double scale = 0.0;
    for (const auto& row : a) {
        for (double v : row) {
            scale = std::max(scale, std::abs(v));
        }
    }
    if (scale == 0.0) {
        throw NumericalError("linear system is all zeros");
    }
    for (std::size_t col = 0; col < N; ++col) {
        std::size_t pivot = col;
        for (std::size_t r = col + 1; r < N; ++r) {
            if (std::abs(a[r][col]) > std::abs(a[pivot][col])) {
                pivot = r;
            }
        }
        if (std::abs(a[pivot][col]) <= 1e-12 * scale) {
            throw NumericalError("singular linear system");
        }
        std::swap(a[col], a[pivot]);
        std::swap(b[col], b[pivot]);
        for (std::size_t r = col + 1; r < N; ++r) {
            const double f = a[r][col] / a[col][col];
            if (f == 0.0) {
                continue;
            }
            for (std::size_t c = col; c < N; ++c) {
                a[r][c] -= f * a[col][c];
            }
            b[r] -= f * b[col];
        }
    }
    std::array<double, N> x{};
    for (std::size_t i = N; i-- > 0;) {
        double acc = b[i];
        for (std::size_t c = i + 1; c < N; ++c) {
            acc -= a[i][c] * x[c];
        }
        x[i] = acc / a[i][i];
    }
    return x;
}

/// Similarity moving the centroid to the origin with mean distance sqrt(2).
Mat3 normalizing_transform(std::span<const Point2> pts)
{
    Point2 c{};
    for (const Point2& p : pts) {
        c = c + p;
    }
    c = (1.0 / static_cast<double>(pts.size())) * c;
    double mean_dist = 0.0;
    for (const Point2& p : pts) {
        mean_dist += distance(p, c);
    }
    mean_dist /= static_cast<double>(pts.size());
    if (!(mean_dist > 0.0)) {
        throw DegenerateError("all points coincide");
    }
    const double s = std::sqrt(2.0) / mean_dist;
    return Mat3{{{s, 0.0, -s * c.x}, {0.0, s, -s * c.y}, {0.0, 0.0, 1.0}}};
}

Point2 affine_apply(const Mat3& t, Point2 p)
{
    return {t[0][0] * p.x + t[0][1] * p.y + t[0][2], t[1][0] * p.x + t[1][1] * p.y + t[1][2]};
}

void check_quad_nondegenerate(std::span<const Point2, 4> pts, const char* which)
{
    // Tested in normalized coordinates, where a unit-scale triangle has area O(1).
    const Mat3 t = normalizing_transform(pts);
    std::array<Point2, 4> q{};
    for (std::size_t i = 0; i < 4; ++i) {
        q[i] = affine_apply(t, pts[i]);
    }
    for (std::size_t i = 0; i < 4; ++i) {
        for (std::size_t j = i + 1; j < 4; ++j) {
            for (std::size_t k = j + 1; k < 4; ++k) {
                if (std::abs(cross(q[j] - q[i], q[k] - q[i])) < 1e-9) {
                    throw DegenerateError(std::string(which) + " points contain a collinear or repeated triple");
                }
            }
        }
    }
}

void add_correspondence_rows(Point2 s, Point2 d, std::array<double, 8>& r0, double& b0, std::array<double, 8>& r1,
                             double& b1)
{
    r0 = {s.x, s.y, 1.0, 0.0, 0.0, 0.0, -d.x * s.x, -d.x * s.y};
    b0 = d.x;
    r1 = {0.0, 0.0, 0.0, s.x, s.y, 1.0, -d.y * s.x, -d.y * s.y};
    b1 = d.y;
}

Homography denormalize(const std::array<double, 8>& h, const Mat3& t_src, const Mat3& t_dst)
{
    const Mat3 hn{{{h[0], h[1], h[2]}, {h[3], h[4], h[5]}, {h[6], h[7], 1.0}}};
    return Homography(inverse(t_dst) * hn * t_src);
}

} // namespace

Mat3 identity3()
{
    return Mat3{{{1.0, 0.0, 0.0}, {0.0, 1.0, 0.0}, {0.0, 0.0, 1.0}}};
}

Mat3 operator*(const Mat3& a, const Mat3& b)
{
    Mat3 r{};
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) {
            r[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j] + a[i][2] * b[2][j];
        }
    }
    return r;
}

Vec3 operator*(const Mat3& a, const Vec3& v)
{
    return {a[0][0] * v[0] + a[0][1] * v[1] + a[0][2] * v[2], a[1][0] * v[0] + a[1][1] * v[1] + a[1][2] * v[2],
            a[2][0] * v[0] + a[2][1] * v[1] + a[2][2] * v[2]};
}

Mat3 transpose(const Mat3& m)
{
    Mat3 r{};
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) {
            r[i][j] = m[j][i];
        }
    }
    return r;
}

double determinant(const Mat3& m)
{
    return m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
           m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
}

Mat3 inverse(const Mat3& m)
{
    const double det = determinant(m);
    const double scale = frobenius(m);
    if (!(std::abs(det) > 1e-300) || !std::isfinite(det) || std::abs(det) <= 1e-14 * scale * scale * scale) {
        throw NumericalError("matrix is singular");
    }
    const double inv = 1.0 / det;
    Mat3 r{};
    r[0][0] = (m[1][1] * m[2][2] - m[1][2] * m[2][1]) * inv;
    r[0][1] = (m[0][2] * m[2][1] - m[0][1] * m[2][2]) * inv;
    r[0][2] = (m[0][1] * m[1][2] - m[0][2] * m[1][1]) * inv;
    r[1][0] = (m[1][2] * m[2][0] - m[1][0] * m[2][2]) * inv;
    r[1][1] = (m[0][0] * m[2][2] - m[0][2] * m[2][0]) * inv;
    r[1][2] = (m[0][2] * m[1][0] - m[0][0] * m[1][2]) * inv;
    r[2][0] = (m[1][0] * m[2][1] - m[1][1] * m[2][0]) * inv;
    r[2][1] = (m[0][1] * m[2][0] - m[0][0] * m[2][1]) * inv;
    r[2][2] = (m[0][0] * m[1][1] - m[0][1] * m[1][0]) * inv;
    return r;
}

double frobenius(const Mat3& m)
{
    double s = 0.0;
    for (const auto& row : m) {
        for (double v : row) {
            s += v * v;
        }
    }
    return std::sqrt(s);
}

Vec3 cross(const Vec3& a, const Vec3& b)
{
    return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}

double norm(const Vec3& v)
{
    return std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
}

Homography::Homography(const Mat3& m) : m_(m)
{
    const double f = frobenius(m_);
    if (!std::isfinite(f) || f == 0.0) {
        throw NumericalError("homography has zero or non-finite entries");
    }
    const double d = std::abs(m_[2][2]) > 1e-12 * f ? m_[2][2] : f;
    for (auto& row : m_) {
        for (double& v : row) {
            v /= d;
        }
    }
    if (!(std::abs(determinant(m_)) > 1e-12)) {
        throw NumericalError("homography is singular");
    }
}

Homography Homography::inverse() const
{
    return Homography(mf::inverse(m_));
}

CameraIntrinsics::CameraIntrinsics(const Block& c) : c_(c)
{
    if (!(c_[0][0] > 0.0) || !(c_[1][1] > 0.0)) {
        throw ParameterError("camera focal terms C11 and C22 must be positive");
    }
    if (c_[2][0] != 0.0 || c_[2][1] != 0.0) {
        throw ParameterError("only the pinhole form with C31 = C32 = 0 is supported");
    }
    if (c_[1][0] != 0.0 || c_[2][2] != 1.0 || c_[0][3] != 0.0 || c_[1][3] != 0.0 || c_[2][3] != 0.0) {
        throw ParameterError("camera block must have the form [K | 0] with K upper triangular and K33 = 1");
    }
}

CameraIntrinsics CameraIntrinsics::pinhole(double fx, double fy, double cx, double cy, double skew)
{
    return CameraIntrinsics(Block{{{fx, skew, cx, 0.0}, {0.0, fy, cy, 0.0}, {0.0, 0.0, 1.0, 0.0}}});
}

Mat3 CameraIntrinsics::K() const
{
    return Mat3{{{c_[0][0], c_[0][1], c_[0][2]}, {c_[1][0], c_[1][1], c_[1][2]}, {c_[2][0], c_[2][1], c_[2][2]}}};
}

std::array<Point2, 4> unit_square()
{
    return {Point2{0.0, 0.0}, Point2{0.0, 1.0}, Point2{1.0, 1.0}, Point2{1.0, 0.0}};
}

Homography estimate_homography(std::span<const Point2, 4> src, std::span<const Point2, 4> dst)
{
    check_quad_nondegenerate(src, "source");
    check_quad_nondegenerate(dst, "destination");
    const Mat3 ts = normalizing_transform(src);
    const Mat3 td = normalizing_transform(dst);

    Matrix<8> a{};
    std::array<double, 8> b{};
    for (std::size_t i = 0; i < 4; ++i) {
        add_correspondence_rows(affine_apply(ts, src[i]), affine_apply(td, dst[i]), a[2 * i], b[2 * i], a[2 * i + 1],
                                b[2 * i + 1]);
    }
    return denormalize(solve(a, b), ts, td);
}

Homography fit_homography(std::span<const Point2> src, std::span<const Point2> dst)
{
    if (src.size() != dst.size() || src.size() < 4) {
        throw ParameterError("fit_homography needs at least 4 matched point pairs");
    }
    const Mat3 ts = normalizing_transform(src);
    const Mat3 td = normalizing_transform(dst);

    Matrix<8> ata{};
    std::array<double, 8> atb{};
    for (std::size_t i = 0; i < src.size(); ++i) {
        std::array<double, 8> r0{};
        std::array<double, 8> r1{};
        double b0 = 0.0;
        double b1 = 0.0;
        add_correspondence_rows(affine_apply(ts, src[i]), affine_apply(td, dst[i]), r0, b0, r1, b1);
        for (std::size_t j = 0; j < 8; ++j) {
            for (std::size_t k = 0; k < 8; ++k) {
                ata[j][k] += r0[j] * r0[k] + r1[j] * r1[k];
            }
            atb[j] += r0[j] * b0 + r1[j] * b1;
        }
    }
    return denormalize(solve(ata, atb), ts, td);
}

Point2 apply_homography(const Homography& h, Point2 p)
{
    const Mat3& m = h.matrix();
    const double w = m[2][0] * p.x + m[2][1] * p.y + m[2][2];
    if (std::abs(w) < 1e-12) {
        throw InfinityError("point maps to the line at infinity");
    }
    return {(m[0][0] * p.x + m[0][1] * p.y + m[0][2]) / w, (m[1][0] * p.x + m[1][1] * p.y + m[1][2]) / w};
}

double sample_bilinear(const GrayImage& img, double u, double v)
{
    if (!(u >= 0.0 && v >= 0.0 && u < img.width() && v < img.height())) {
        return 0.0;
    }
    const double px = u - 0.5;
    const double py = v - 0.5;
    const double fx0 = std::floor(px);
    const double fy0 = std::floor(py);
    const double fx = px - fx0;
    const double fy = py - fy0;
    const int x0 = static_cast<int>(fx0);
    const int y0 = static_cast<int>(fy0);
    const int xa = std::clamp(x0, 0, img.width() - 1);
    const int xb = std::clamp(x0 + 1, 0, img.width() - 1);
    const int ya = std::clamp(y0, 0, img.height() - 1);
    const int yb = std::clamp(y0 + 1, 0, img.height() - 1);
    const double top = (1.0 - fx) * img.at(xa, ya) + fx * img.at(xb, ya);
    const double bottom = (1.0 - fx) * img.at(xa, yb) + fx * img.at(xb, yb);
    return (1.0 - fy) * top + fy * bottom;
}

GrayImage warp_inverse(const GrayImage& img, const Homography& h, int out_w, int out_h)
{
    // Validates invertibility up front even though sampling only needs the forward map.
    (void)h.inverse();
    GrayImage out(out_w, out_h);
    for (int y = 0; y < out_h; ++y) {
        for (int x = 0; x < out_w; ++x) {
            double value = 0.0;
            try {
                const Point2 p = apply_homography(h, {x + 0.5, y + 0.5});
                value = sample_bilinear(img, p.x, p.y);
            } catch (const InfinityError&) {
                value = 0.0;
            }
            out.at(x, y) = static_cast<std::uint8_t>(std::clamp(std::lround(value), 0L, 255L));
        }
    }
    return out;
}

Point2 project(const CameraIntrinsics& cam, const Pose& pose, Point3 p)
{
    const Vec3 xc = pose.R * Vec3{p.x, p.y, p.z};
    const Vec3 cam_pt{xc[0] + pose.T[0], xc[1] + pose.T[1], xc[2] + pose.T[2]};
    if (!(cam_pt[2] > 0.0)) {
        throw BehindCameraError("point has non-positive depth");
    }
    const auto& c = cam.block();
    Vec3 img{};
    for (int i = 0; i < 3; ++i) {
        img[i] = c[i][0] * cam_pt[0] + c[i][1] * cam_pt[1] + c[i][2] * cam_pt[2] + c[i][3];
    }
    if (!(img[2] > 0.0)) {
        throw BehindCameraError("projected point has non-positive homogeneous coordinate");
    }
    return {img[0] / img[2], img[1] / img[2]};
}

Homography homography_from_pose(const CameraIntrinsics& cam, const Pose& pose)
{
    const Mat3 rt{{{pose.R[0][0], pose.R[0][1], pose.T[0]},
                   {pose.R[1][0], pose.R[1][1], pose.T[1]},
                   {pose.R[2][0], pose.R[2][1], pose.T[2]}}};
    return Homography(cam.K() * rt);
}

Pose pose_from_homography(const Homography& h, const CameraIntrinsics& cam)
{
    const Mat3 b = inverse(cam.K()) * h.matrix();
    const Vec3 b1{b[0][0], b[1][0], b[2][0]};
    const Vec3 b2{b[0][1], b[1][1], b[2][1]};
    const Vec3 b3{b[0][2], b[1][2], b[2][2]};
    const double n1 = norm(b1);
    const double n2 = norm(b2);
    if (n1 < 1e-9 || n2 < 1e-9) {
        throw DegenerateError("homography columns too small to recover a pose");
    }
    double lambda = 2.0 / (n1 + n2);
    if (lambda * b3[2] < 0.0) {
        lambda = -lambda;
    }
    const Vec3 r1{lambda * b1[0], lambda * b1[1], lambda * b1[2]};
    const Vec3 r2{lambda * b2[0], lambda * b2[1], lambda * b2[2]};
    const Vec3 r3 = cross(r1, r2);
    const Mat3 approx{{{r1[0], r2[0], r3[0]}, {r1[1], r2[1], r3[1]}, {r1[2], r2[2], r3[2]}}};

    Pose pose;
    pose.R = nearest_rotation(approx);
    pose.T = {lambda * b3[0], lambda * b3[1], lambda * b3[2]};
    return pose;
}

Mat3 nearest_rotation(const Mat3& m)
{
    Mat3 x = m;
    for (int iter = 0; iter < 100; ++iter) {
        const Mat3 inv_t = transpose(inverse(x));
        Mat3 next{};
        double change = 0.0;
        for (int i = 0; i < 3; ++i) {
            for (int j = 0; j < 3; ++j) {
                next[i][j] = 0.5 * (x[i][j] + inv_t[i][j]);
                change = std::max(change, std::abs(next[i][j] - x[i][j]));
            }
        }
        x = next;
        if (change < 1e-15) {
            break;
        }
    }
    return x;
}

Mat3 axis_angle(const Vec3& axis, double angle)
{
    const double n = norm(axis);
    if (!(n > 0.0)) {
        return identity3();
    }
    const double x = axis[0] / n;
    const double y = axis[1] / n;
    const double z = axis[2] / n;
    const double c = std::cos(angle);
    const double s = std::sin(angle);
    const double t = 1.0 - c;
    return Mat3{{{t * x * x + c, t * x * y - s * z, t * x * z + s * y},
                 {t * x * y + s * z, t * y * y + c, t * y * z - s * x},
                 {t * x * z - s * y, t * y * z + s * x, t * z * z + c}}};
}

double rotation_angle_between(const Mat3& a, const Mat3& b)
{
    const Mat3 rel = transpose(a) * b;
    const double c = std::clamp((rel[0][0] + rel[1][1] + rel[2][2] - 1.0) / 2.0, -1.0, 1.0);
    return std::acos(c);
}

double signed_area_image(std::span<const Point2> poly)
{
    double acc = 0.0;
    for (std::size_t i = 0; i < poly.size(); ++i) {
        const Point2 a = poly[i];
        const Point2 b = poly[(i + 1) % poly.size()];
        acc += b.x * a.y - a.x * b.y;
    }
    return 0.5 * acc;
}

bool point_in_polygon(Point2 p, std::span<const Point2> poly)
{
    bool inside = false;
    for (std::size_t i = 0, j = poly.size() - 1; i < poly.size(); j = i++) {
        const Point2 a = poly[i];
        const Point2 b = poly[j];
        if ((a.y > p.y) != (b.y > p.y)) {
            const double x_cross = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
            if (p.x < x_cross) {
                inside = !inside;
            }
        }
    }
    return inside;
}

} // namespace mf
