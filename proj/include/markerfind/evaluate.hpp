#pragma once

#include <string>
#include <vector>

#include "markerfind/pipeline.hpp"
#include "markerfind/synthetic.hpp"

namespace mf {

/// Comparison of one frame's detections against its ground truth.
struct FrameCheck {
    int expected = 0;
    int matched = 0;
    int wrong_id = 0;
    int wrong_rotation = 0;
    int false_positives = 0;
    /// Sum of squared corner errors over matched markers and their corner count.
    double corner_sq_sum = 0.0;
    int corner_count = 0;
    double max_corner_rms = 0.0;
    double max_rotation_err_deg = 0.0;
    double max_translation_rel_err = 0.0;

    bool ok(double max_rms = 1.0, double max_rot_deg = 2.0, double max_trans_rel = 0.02) const;
    std::string summary() const;
};

/**
 * Pairs every ground-truth marker with the unused detection whose corner
 * set lies closest (corner RMS under the best cyclic relabelling, below half
 * the marker side); unpaired detections count as false positives. Rotation
 * is judged by where each side places the model corners, so ties in the
 * canonical start corner do not matter.
 */
FrameCheck check_frame(const std::vector<PlacementTruth>& truth, const std::vector<MarkerDetection>& detections);

} // namespace mf
