#include "markerfind/evaluate.hpp"

#include <cmath>
#include <cstdio>
#include <utility>

namespace mf {
namespace {

constexpr double kPi = 3.14159265358979323846;

double corner_rms(const std::array<Point2, 4>& a, const std::array<Point2, 4>& b, std::size_t shift = 0)
{
    double s = 0.0;
    for (std::size_t k = 0; k < 4; ++k) {
        const double d = distance(a[k], b[(k + shift) % 4]);
        s += d * d;
    }
    return std::sqrt(s / 4.0);
}

/// Corner RMS under the best cyclic relabelling and the shift that achieves it.
std::pair<double, std::size_t> best_shift_rms(const std::array<Point2, 4>& a, const std::array<Point2, 4>& b)
{
    std::pair<double, std::size_t> best{corner_rms(a, b), 0};
    for (std::size_t s = 1; s < 4; ++s) {
        const double r = corner_rms(a, b, s);
        if (r < best.first) {
            best = {r, s};
        }
    }
    return best;
}

/// Image positions of the model corners: label r puts model corner k at corners[(k - r / 90) mod 4].
std::array<Point2, 4> model_corners(const std::array<Point2, 4>& corners, int rotation_deg)
{
    const int j = ((rotation_deg / 90) % 4 + 4) % 4;
    std::array<Point2, 4> out{};
    for (int k = 0; k < 4; ++k) {
        out[static_cast<std::size_t>(k)] = corners[static_cast<std::size_t>((k - j + 4) % 4)];
    }
    return out;
}

} // namespace

bool FrameCheck::ok(double max_rms, double max_rot_deg, double max_trans_rel) const
{
    return matched == expected && wrong_id == 0 && wrong_rotation == 0 && false_positives == 0 &&
           max_corner_rms < max_rms && max_rotation_err_deg < max_rot_deg && max_translation_rel_err < max_trans_rel;
}

std::string FrameCheck::summary() const
{
    char buf[256];
    std::snprintf(buf, sizeof buf,
                  "expected=%d matched=%d wrong_id=%d wrong_rotation=%d false_positives=%d max_corner_rms=%.3f "
                  "max_rot_err_deg=%.3f max_trans_rel_err=%.4f",
                  expected, matched, wrong_id, wrong_rotation, false_positives, max_corner_rms, max_rotation_err_deg,
                  max_translation_rel_err);
    return buf;
}

FrameCheck check_frame(const std::vector<PlacementTruth>& truth, const std::vector<MarkerDetection>& detections)
{
    FrameCheck fc;
    fc.expected = static_cast<int>(truth.size());
    std::vector<bool> used(detections.size(), false);
    for (const auto& t : truth) {
        const double side = 0.25 * (distance(t.corners[0], t.corners[1]) + distance(t.corners[1], t.corners[2]) +
                                    distance(t.corners[2], t.corners[3]) + distance(t.corners[3], t.corners[0]));
        std::size_t best = detections.size();
        double best_rms = 0.5 * side;
        for (std::size_t i = 0; i < detections.size(); ++i) {
            const double rms = best_shift_rms(t.corners, detections[i].corners).first;
            if (!used[i] && rms < best_rms) {
                best_rms = rms;
                best = i;
            }
        }
        if (best == detections.size()) {
            continue;
        }
        used[best] = true;
        const auto& d = detections[best];
        if (d.id != t.id) {
            ++fc.wrong_id;
            continue;
        }
        const auto model_fit =
            best_shift_rms(model_corners(t.corners, t.rotation_deg), model_corners(d.corners, d.rotation_deg));
        if (model_fit.second != 0) {
            ++fc.wrong_rotation;
            continue;
        }
        ++fc.matched;
        fc.max_corner_rms = std::max(fc.max_corner_rms, best_rms);
        fc.corner_sq_sum += 4.0 * best_rms * best_rms;
        fc.corner_count += 4;
        if (t.pose && d.pose) {
            fc.max_rotation_err_deg =
                std::max(fc.max_rotation_err_deg, rotation_angle_between(t.pose->R, d.pose->R) * 180.0 / kPi);
            const double dt = std::hypot(d.pose->T[0] - t.pose->T[0], d.pose->T[1] - t.pose->T[1], d.pose->T[2] - t.pose->T[2]);
            fc.max_translation_rel_err = std::max(fc.max_translation_rel_err, dt / norm(t.pose->T));
        }
    }
    for (bool u : used) {
        fc.false_positives += u ? 0 : 1;
    }
    return fc;
}

} // namespace mf
