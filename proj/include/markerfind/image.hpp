#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "markerfind/errors.hpp"

namespace mf {

/**
 * Row-major raster of `T` with value semantics.
 *
 * Pixel (x, y) lives at index y * width + x. Coordinates used by geometric
 * code treat pixel (x, y) as the unit square [x, x+1) x [y, y+1), so its
 * center sits at (x + 0.5, y + 0.5).
 */
template <typename T>
class Plane {
public:
    using value_type = T;

    Plane() = default;

    Plane(int width, int height, T fill = T{}) : width_(width), height_(height)
    {
        check_dims(width, height);
        data_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), fill);
    }

    Plane(int width, int height, std::vector<T> data)
        : width_(width), height_(height), data_(std::move(data))
    {
        check_dims(width, height);
        if (data_.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
            throw ParameterError("pixel buffer length does not match width x height");
        }
    }

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    std::size_t size() const noexcept { return data_.size(); }
    bool empty() const noexcept { return data_.empty(); }

    T& at(int x, int y) noexcept { return data_[index(x, y)]; }
    const T& at(int x, int y) const noexcept { return data_[index(x, y)]; }

    bool contains(int x, int y) const noexcept
    {
        return x >= 0 && y >= 0 && x < width_ && y < height_;
    }

    std::span<T> row(int y) noexcept
    {
        return std::span<T>(data_).subspan(index(0, y), static_cast<std::size_t>(width_));
    }
    std::span<const T> row(int y) const noexcept
    {
        return std::span<const T>(data_).subspan(index(0, y), static_cast<std::size_t>(width_));
    }

    std::span<T> pixels() noexcept { return data_; }
    std::span<const T> pixels() const noexcept { return data_; }
    const std::vector<T>& data() const noexcept { return data_; }

    friend bool operator==(const Plane&, const Plane&) = default;

private:
    static void check_dims(int width, int height)
    {
        if (width < 1 || height < 1) {
            throw ParameterError("image dimensions must be at least 1x1");
        }
    }

    std::size_t index(int x, int y) const noexcept
    {
        return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(x);
    }

    int width_ = 0;
    int height_ = 0;
    std::vector<T> data_;
};

struct Rgb {
    std::uint8_t r = 0;
    std::uint8_t g = 0;
    std::uint8_t b = 0;

    friend bool operator==(const Rgb&, const Rgb&) = default;
};

/// 8-bit intensities.
class GrayImage : public Plane<std::uint8_t> {
public:
    using Plane::Plane;
    friend bool operator==(const GrayImage&, const GrayImage&) = default;
};

/// Packed RGB triples, 8 bits per channel.
class ColorImage : public Plane<Rgb> {
public:
    using Plane::Plane;
    friend bool operator==(const ColorImage&, const ColorImage&) = default;
};

/// Mask with values in {0, 1}. Construction from a buffer rejects other values.
class BinaryImage : public Plane<std::uint8_t> {
public:
    BinaryImage() = default;
    BinaryImage(int width, int height) : Plane(width, height, 0) {}
    BinaryImage(int width, int height, std::vector<std::uint8_t> data);

    std::size_t count_ones() const noexcept;

    /// Scales {0,1} to {0,255} for export.
    GrayImage to_visual() const;

    friend bool operator==(const BinaryImage&, const BinaryImage&) = default;
};

/// Real-valued grid (response maps, correlation results).
using RealImage = Plane<double>;

} // namespace mf
