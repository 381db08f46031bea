#include "markerfind/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>

namespace mf {

std::vector<BenchRow> run_bench(const std::vector<GrayImage>& frames, const PatternRegistry& reg,
                                const std::vector<std::size_t>& sizes, const DetectConfig& cfg, int repetitions)
{
    if (frames.empty()) {
        throw ParameterError("bench needs at least one frame");
    }
    if (sizes.empty() || repetitions < 1) {
        throw ParameterError("bench needs registry sizes and at least one repetition");
    }
    std::vector<PatternRegistry> registries;
    for (const std::size_t n : sizes) {
        if (n < 1 || n > reg.size()) {
            throw ParameterError("registry size " + std::to_string(n) + " outside 1.." + std::to_string(reg.size()));
        }
        registries.push_back(reg.prefix(n));
    }
    std::vector<BenchRow> best(sizes.size());
    for (int rep = 0; rep < repetitions; ++rep) {
        for (std::size_t s = 0; s < sizes.size(); ++s) {
            BenchRow row;
            row.registry_size = sizes[s];
            const auto t0 = std::chrono::steady_clock::now();
            for (const auto& frame : frames) {
                DetectTimings t;
                row.detections += detect(frame, cfg, registries[s], &t).size();
                row.threshold_ms += t.threshold_ms;
                row.contours_ms += t.contours_ms;
                row.rectify_ms += t.rectify_ms;
                row.match_ms += t.match_ms;
            }
            row.total_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
            if (rep == 0) {
                best[s] = row;
                continue;
            }
            BenchRow& b = best[s];
            b.threshold_ms = std::min(b.threshold_ms, row.threshold_ms);
            b.contours_ms = std::min(b.contours_ms, row.contours_ms);
            b.rectify_ms = std::min(b.rectify_ms, row.rectify_ms);
            b.match_ms = std::min(b.match_ms, row.match_ms);
            b.total_ms = std::min(b.total_ms, row.total_ms);
        }
    }
    return best;
}

std::string bench_csv(const std::vector<BenchRow>& rows)
{
    std::string out = "registry_size,threshold_ms,contours_ms,rectify_ms,match_ms,total_ms,detections\n";
    char buf[256];
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof buf, "%zu,%.4f,%.4f,%.4f,%.4f,%.4f,%zu\n", r.registry_size, r.threshold_ms,
                      r.contours_ms, r.rectify_ms, r.match_ms, r.total_ms, r.detections);
        out += buf;
    }
    return out;
}

double linear_fit_r2(const std::vector<double>& x, const std::vector<double>& y)
{
    if (x.size() != y.size() || x.size() < 2) {
        throw ParameterError("linear fit needs at least two paired samples");
    }
    const double n = static_cast<double>(x.size());
    double mx = 0.0;
    double my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0;
    double sxy = 0.0;
    double syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (!(sxx > 0.0)) {
        throw ParameterError("linear fit needs at least two distinct x values");
    }
    if (!(syy > 0.0)) {
        return 1.0;
    }
    return (sxy * sxy) / (sxx * syy);
}

} // namespace mf
