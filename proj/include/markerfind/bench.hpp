#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "markerfind/pipeline.hpp"

namespace mf {

struct BenchRow {
    std::size_t registry_size = 0;
    double threshold_ms = 0.0;
    double contours_ms = 0.0;
    double rectify_ms = 0.0;
    double match_ms = 0.0;
    double total_ms = 0.0;
    std::size_t detections = 0;
};

/**
 * Times detect() over all frames for each registry prefix size. Sizes are
 * interleaved within each repetition. Every timing column is the minimum
 * over repetitions, taken per column.
 */
std::vector<BenchRow> run_bench(const std::vector<GrayImage>& frames, const PatternRegistry& reg,
                                const std::vector<std::size_t>& sizes, const DetectConfig& cfg, int repetitions = 5);

/// Header line plus one line per row.
std::string bench_csv(const std::vector<BenchRow>& rows);

/// Coefficient of determination of the least-squares line through (x, y).
double linear_fit_r2(const std::vector<double>& x, const std::vector<double>& y);

} // namespace mf
