#include "markerfind/image.hpp"

#include <algorithm>

namespace mf {

BinaryImage::BinaryImage(int width, int height, std::vector<std::uint8_t> data)
    : Plane(width, height, std::move(data))
{
    const auto px = pixels();
    if (std::any_of(px.begin(), px.end(), [](std::uint8_t v) { return v > 1; })) {
        throw ParameterError("binary image values must be 0 or 1");
    }
}

std::size_t BinaryImage::count_ones() const noexcept
{
    const auto px = pixels();
    return static_cast<std::size_t>(std::count(px.begin(), px.end(), std::uint8_t{1}));
}

GrayImage BinaryImage::to_visual() const
{
    GrayImage out(width(), height());
    auto src = pixels();
    auto dst = out.pixels();
    std::transform(src.begin(), src.end(), dst.begin(),
                   [](std::uint8_t v) { return static_cast<std::uint8_t>(v ? 255 : 0); });
    return out;
}

} // namespace mf
