#include "markerfind/threshold.hpp"

#include <algorithm>
#include <string>

#include "markerfind/parallel.hpp"

namespace mf {
namespace {

std::uint8_t luminance(const Rgb& p)
{
    // Integer weights keep the rounding exact: floor(x + 0.5) with x in thousandths.
    const unsigned weighted = 299u * p.r + 587u * p.g + 114u * p.b;
    return static_cast<std::uint8_t>((weighted + 500u) / 1000u);
}

template <typename Map>
IntegralImage summed_area(const GrayImage& img, Map map)
{
    const int w = img.width() + 1;
    const int h = img.height() + 1;
    std::vector<std::uint64_t> table(static_cast<std::size_t>(w) * static_cast<std::size_t>(h), 0);
    for (int y = 1; y < h; ++y) {
        std::uint64_t row_sum = 0;
        const auto src = img.row(y - 1);
        const std::size_t base = static_cast<std::size_t>(y) * static_cast<std::size_t>(w);
        const std::size_t above = base - static_cast<std::size_t>(w);
        for (int x = 1; x < w; ++x) {
            row_sum += map(src[static_cast<std::size_t>(x - 1)]);
            table[base + static_cast<std::size_t>(x)] = table[above + static_cast<std::size_t>(x)] + row_sum;
        }
    }
    return IntegralImage(img.width(), img.height(), std::move(table));
}

} // namespace

GrayImage to_grayscale(const ColorImage& img, GrayMethod method)
{
    GrayImage out(img.width(), img.height());
    auto src = img.pixels();
    auto dst = out.pixels();
    for (std::size_t i = 0; i < src.size(); ++i) {
        const Rgb& p = src[i];
        switch (method) {
        case GrayMethod::Luminance:
            dst[i] = luminance(p);
            break;
        case GrayMethod::Red:
            dst[i] = p.r;
            break;
        case GrayMethod::Green:
            dst[i] = p.g;
            break;
        case GrayMethod::Blue:
            dst[i] = p.b;
            break;
        }
    }
    return out;
}

GrayImage to_grayscale(const AnyImage& img, GrayMethod method)
{
    if (const auto* gray = std::get_if<GrayImage>(&img)) {
        return *gray;
    }
    return to_grayscale(std::get<ColorImage>(img), method);
}

BinaryImage threshold_global(const GrayImage& img, int level)
{
    if (level < 0 || level > 255) {
        throw ParameterError("global threshold must be in [0, 255], got " + std::to_string(level));
    }
    BinaryImage out(img.width(), img.height());
    auto src = img.pixels();
    auto dst = out.pixels();
    for (std::size_t i = 0; i < src.size(); ++i) {
        dst[i] = src[i] <= level ? 0 : 1;
    }
    return out;
}

BinaryImage threshold_adaptive_mean(const GrayImage& img, int window, int offset)
{
    if (window < 3 || window % 2 == 0) {
        throw ParameterError("adaptive window must be odd and >= 3, got " + std::to_string(window));
    }
    if (window > 2 * std::min(img.width(), img.height()) + 1) {
        throw ParameterError("adaptive window " + std::to_string(window) + " exceeds 2*min(width,height)+1");
    }
    const int r = window / 2;

    // Replicate the border into a padded copy; every window is then a plain rectangle.
    GrayImage padded(img.width() + 2 * r, img.height() + 2 * r);
    for (int y = 0; y < padded.height(); ++y) {
        const int sy = std::clamp(y - r, 0, img.height() - 1);
        for (int x = 0; x < padded.width(); ++x) {
            padded.at(x, y) = img.at(std::clamp(x - r, 0, img.width() - 1), sy);
        }
    }
    const IntegralImage ii = integral_image(padded);
    const std::int64_t n = static_cast<std::int64_t>(window) * window;

    BinaryImage out(img.width(), img.height());
    parallel_for(img.height(), [&](int y0, int y1) {
        for (int y = y0; y < y1; ++y) {
            for (int x = 0; x < img.width(); ++x) {
                // Window of (x, y) in padded coordinates is [x, x + window) x [y, y + window).
                const auto sum = static_cast<std::int64_t>(ii.sum(x, y, x + window, y + window));
                const std::int64_t v = img.at(x, y);
                out.at(x, y) = v * n <= sum - offset * n ? 0 : 1;
            }
        }
    });
    return out;
}

IntegralImage::IntegralImage(int src_width, int src_height, std::vector<std::uint64_t> table)
    : width_(src_width + 1), height_(src_height + 1), table_(std::move(table))
{
    if (table_.size() != static_cast<std::size_t>(width_) * static_cast<std::size_t>(height_)) {
        throw ParameterError("integral table size mismatch");
    }
}

IntegralImage integral_image(const GrayImage& img)
{
    return summed_area(img, [](std::uint8_t v) { return static_cast<std::uint64_t>(v); });
}

IntegralImage squared_integral_image(const GrayImage& img)
{
    return summed_area(img, [](std::uint8_t v) { return static_cast<std::uint64_t>(v) * v; });
}

} // namespace mf
