#pragma once

#include <array>
#include <cmath>
#include <span>
#include <vector>

#include "markerfind/image.hpp"

namespace mf {

struct Point2 {
    double x = 0.0;
    double y = 0.0;

    friend bool operator==(const Point2&, const Point2&) = default;
    friend Point2 operator+(Point2 a, Point2 b) { return {a.x + b.x, a.y + b.y}; }
    friend Point2 operator-(Point2 a, Point2 b) { return {a.x - b.x, a.y - b.y}; }
    friend Point2 operator*(double s, Point2 p) { return {s * p.x, s * p.y}; }
    friend Point2 operator*(Point2 p, double s) { return {s * p.x, s * p.y}; }
};

inline double dot(Point2 a, Point2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Point2 a, Point2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Point2 p) { return std::hypot(p.x, p.y); }
inline double distance(Point2 a, Point2 b) { return norm(a - b); }

struct Point3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;
};

using Vec3 = std::array<double, 3>;
using Mat3 = std::array<std::array<double, 3>, 3>;

Mat3 identity3();
Mat3 operator*(const Mat3& a, const Mat3& b);
Vec3 operator*(const Mat3& a, const Vec3& v);
Mat3 transpose(const Mat3& m);
double determinant(const Mat3& m);
/// Throws NumericalError when |det| is not above 1e-300 relative to the entry scale.
Mat3 inverse(const Mat3& m);
double frobenius(const Mat3& m);
Vec3 cross(const Vec3& a, const Vec3& b);
double norm(const Vec3& v);

/**
 * Projective map between two planes.
 *
 * Stored normalized: m[2][2] = 1 when that entry is nonzero, otherwise the
 * Frobenius norm is 1. Construction rejects |det| <= 1e-12 after
 * normalization with NumericalError.
 */
class Homography {
public:
    Homography() : m_(identity3()) {}
    explicit Homography(const Mat3& m);

    const Mat3& matrix() const noexcept { return m_; }
    double operator()(int r, int c) const noexcept { return m_[r][c]; }

    Homography inverse() const;

    /// Composition: (a * b)(p) = a(b(p)).
    friend Homography operator*(const Homography& a, const Homography& b) { return Homography(a.m_ * b.m_); }

private:
    Mat3 m_;
};

/// Rigid transform from marker to camera coordinates: X_c = R X_m + T.
struct Pose {
    Mat3 R = identity3();
    Vec3 T = {0.0, 0.0, 1.0};
};

/**
 * Calibration matrix C as the upper 3x4 block of the 4x4 form (the trailing
 * [0 0 0 1] row is implicit). Only the pinhole subset is supported:
 * C31 = C32 = 0, C33 = 1 and a zero fourth column, so C = [K | 0] with
 * K = [[fx, skew, cx], [0, fy, cy], [0, 0, 1]].
 */
class CameraIntrinsics {
public:
    using Block = std::array<std::array<double, 4>, 3>;

    CameraIntrinsics() : CameraIntrinsics(pinhole(1.0, 1.0, 0.0, 0.0)) {}
    explicit CameraIntrinsics(const Block& c);

    static CameraIntrinsics pinhole(double fx, double fy, double cx, double cy, double skew = 0.0);

    const Block& block() const noexcept { return c_; }
    double fx() const noexcept { return c_[0][0]; }
    double fy() const noexcept { return c_[1][1]; }
    double cx() const noexcept { return c_[0][2]; }
    double cy() const noexcept { return c_[1][2]; }
    double skew() const noexcept { return c_[0][1]; }

    /// Left 3x3 part of C.
    Mat3 K() const;

private:
    Block c_;
};

/// Marker model corners (0,0), (0,1), (1,1), (1,0) in the marker plane.
std::array<Point2, 4> unit_square();

/**
 * Exact homography from four correspondences.
 *
 * Both point sets are Hartley-normalized (centroid at the origin, mean
 * distance sqrt(2)); the 8x8 system with h33 = 1 is solved by Gaussian
 * elimination with partial pivoting and the result denormalized.
 * Throws DegenerateError when any three points of either set are collinear
 * (or two coincide) and NumericalError for a singular system.
 */
Homography estimate_homography(std::span<const Point2, 4> src, std::span<const Point2, 4> dst);

/// Least-squares homography for n >= 4 correspondences (normal equations on normalized coordinates).
Homography fit_homography(std::span<const Point2> src, std::span<const Point2> dst);

/// Projective map with perspective division; InfinityError when |w| < 1e-12.
Point2 apply_homography(const Homography& h, Point2 p);

/// Bilinear sample at continuous coordinates (pixel centers at +0.5); 0 outside the image area.
double sample_bilinear(const GrayImage& img, double u, double v);

/**
 * Inverse perspective warp: out(x, y) samples img at h(x + 0.5, y + 0.5).
 * `h` maps the rectified (output) plane into the source image.
 */
GrayImage warp_inverse(const GrayImage& img, const Homography& h, int out_w, int out_h);

/// C [R|T] [p; 1] with perspective division; BehindCameraError for non-positive depth.
Point2 project(const CameraIntrinsics& cam, const Pose& pose, Point3 p);

/// H = K [r1 r2 T], mapping the marker plane (z = 0) into the image.
Homography homography_from_pose(const CameraIntrinsics& cam, const Pose& pose);

/**
 * Recovers R and T from a marker-plane homography.
 *
 * B = K^-1 H; lambda = 2 / (|b1| + |b2|) with its sign chosen so that T3 > 0;
 * r1 = lambda b1, r2 = lambda b2, r3 = r1 x r2, and R is the nearest rotation
 * to [r1 r2 r3]. Throws DegenerateError when |b1| or |b2| < 1e-9.
 */
Pose pose_from_homography(const Homography& h, const CameraIntrinsics& cam);

/// Orthogonal polar factor via Newton iteration X <- (X + X^-T) / 2.
Mat3 nearest_rotation(const Mat3& m);

/// Rotation from axis (need not be unit) and angle in radians.
Mat3 axis_angle(const Vec3& axis, double angle);

/// Angle in radians of the relative rotation a^T b.
double rotation_angle_between(const Mat3& a, const Mat3& b);

/// Signed area with the y axis pointing down; positive for the order
/// top-left, bottom-left, bottom-right, top-right.
double signed_area_image(std::span<const Point2> poly);

bool point_in_polygon(Point2 p, std::span<const Point2> poly);

} // namespace mf
