#include <cmath>

#include "font.hpp"
#include "markerfind/pipeline.hpp"

namespace mf {
namespace {

void put(ColorImage& img, long x, long y, Rgb c)
{
    if (x >= 0 && y >= 0 && x < img.width() && y < img.height()) {
        img.at(static_cast<int>(x), static_cast<int>(y)) = c;
    }
}

/// DDA line between pixel positions of two continuous points.
void line(ColorImage& img, Point2 a, Point2 b, Rgb c)
{
    const double ax = a.x - 0.5;
    const double ay = a.y - 0.5;
    const double dx = b.x - a.x;
    const double dy = b.y - a.y;
    const long steps = std::max(1L, std::lround(std::max(std::abs(dx), std::abs(dy))));
    for (long i = 0; i <= steps; ++i) {
        const double t = static_cast<double>(i) / static_cast<double>(steps);
        put(img, std::lround(ax + t * dx), std::lround(ay + t * dy), c);
    }
}

/// Midpoint circle outline around the pixel containing `centre`.
void circle(ColorImage& img, Point2 centre, int r, Rgb c)
{
    const long cx = static_cast<long>(std::floor(centre.x));
    const long cy = static_cast<long>(std::floor(centre.y));
    int x = r;
    int y = 0;
    int err = 1 - r;
    while (x >= y) {
        const int pts[8][2] = {{x, y}, {y, x}, {-y, x}, {-x, y}, {-x, -y}, {-y, -x}, {y, -x}, {x, -y}};
        for (const auto& p : pts) {
            put(img, cx + p[0], cy + p[1], c);
        }
        ++y;
        if (err < 0) {
            err += 2 * y + 1;
        } else {
            --x;
            err += 2 * (y - x) + 1;
        }
    }
}

void text(ColorImage& img, long x0, long y0, const std::string& s, int scale, Rgb c)
{
    for (std::size_t i = 0; i < s.size(); ++i) {
        for (int row = 0; row < detail::kGlyphHeight; ++row) {
            for (int col = 0; col < detail::kGlyphWidth; ++col) {
                if (!detail::glyph_bit(s[i], col, row)) {
                    continue;
                }
                const long gx = x0 + static_cast<long>((static_cast<int>(i) * (detail::kGlyphWidth + 1) + col) * scale);
                const long gy = y0 + static_cast<long>(row * scale);
                for (int sy = 0; sy < scale; ++sy) {
                    for (int sx = 0; sx < scale; ++sx) {
                        put(img, gx + sx, gy + sy, c);
                    }
                }
            }
        }
    }
}

} // namespace

ColorImage annotate(const GrayImage& img, const std::vector<MarkerDetection>& detections)
{
    ColorImage out(img.width(), img.height());
    for (std::size_t i = 0; i < img.size(); ++i) {
        const std::uint8_t v = img.pixels()[i];
        out.pixels()[i] = Rgb{v, v, v};
    }
    for (const auto& d : detections) {
        for (std::size_t k = 0; k < 4; ++k) {
            line(out, d.corners[k], d.corners[(k + 1) % 4], kEdgeColor);
        }
    }
    for (const auto& d : detections) {
        for (const auto& p : d.corners) {
            circle(out, p, kCornerCircleRadius, kCornerColor);
        }
    }
    for (const auto& d : detections) {
        const Point2 c = 0.25 * (d.corners[0] + d.corners[1] + d.corners[2] + d.corners[3]);
        const long w = static_cast<long>(d.id.size()) * (detail::kGlyphWidth + 1) * 2;
        text(out, std::lround(c.x) - w / 2, std::lround(c.y) - detail::kGlyphHeight, d.id, 2, kLabelColor);
    }
    return out;
}

} // namespace mf
