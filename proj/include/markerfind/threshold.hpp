#pragma once

#include <cstdint>

#include "markerfind/image.hpp"
#include "markerfind/pnm.hpp"

namespace mf {

enum class GrayMethod {
    Luminance, ///< 0.299 R + 0.587 G + 0.114 B, rounded half up
    Red,
    Green,
    Blue,
};

GrayImage to_grayscale(const ColorImage& img, GrayMethod method = GrayMethod::Luminance);

/// Passes gray images through unchanged; converts color ones.
GrayImage to_grayscale(const AnyImage& img, GrayMethod method = GrayMethod::Luminance);

/// out = 0 where img <= level, else 1.
BinaryImage threshold_global(const GrayImage& img, int level);

/**
 * Mean-minus-offset local threshold.
 *
 * out = 0 where img <= mean(window) - offset, else 1. The window is centred on
 * each pixel and reads replicated edge pixels outside the image. The
 * comparison is carried out in integers (img * n <= sum - offset * n), so it
 * is exact.
 *
 * Requires an odd window >= 3 and window <= 2 * min(width, height) + 1.
 */
BinaryImage threshold_adaptive_mean(const GrayImage& img, int window, int offset);

/**
 * Summed-area table with a zero first row and column.
 *
 * sum(x0, y0, x1, y1) returns the sum over the half-open rectangle
 * [x0, x1) x [y0, y1) of the source image in four lookups.
 */
class IntegralImage {
public:
    IntegralImage() = default;
    IntegralImage(int src_width, int src_height, std::vector<std::uint64_t> table);

    /// Table dimensions, i.e. source dimensions + 1.
    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }

    std::uint64_t at(int x, int y) const noexcept
    {
        return table_[static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(x)];
    }

    std::uint64_t sum(int x0, int y0, int x1, int y1) const noexcept
    {
        return at(x1, y1) + at(x0, y0) - at(x1, y0) - at(x0, y1);
    }

private:
    int width_ = 0;
    int height_ = 0;
    std::vector<std::uint64_t> table_;
};

IntegralImage integral_image(const GrayImage& img);

/// Summed-area table of squared intensities.
IntegralImage squared_integral_image(const GrayImage& img);

} // namespace mf
