#include "markerfind/pnm.hpp"

#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

namespace mf {
namespace {

bool is_space(std::uint8_t c)
{
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f';
}

class HeaderReader {
public:
    explicit HeaderReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

    void skip_space_and_comments()
    {
        while (pos_ < bytes_.size()) {
            if (is_space(bytes_[pos_])) {
                ++pos_;
            } else if (bytes_[pos_] == '#') {
                while (pos_ < bytes_.size() && bytes_[pos_] != '\n') {
                    ++pos_;
                }
            } else {
                break;
            }
        }
    }

    long read_uint(const char* what)
    {
        skip_space_and_comments();
        if (pos_ >= bytes_.size() || bytes_[pos_] < '0' || bytes_[pos_] > '9') {
            throw PnmParseError(PnmErrorKind::MalformedHeader, std::string("PNM header: expected ") + what);
        }
        long value = 0;
        while (pos_ < bytes_.size() && bytes_[pos_] >= '0' && bytes_[pos_] <= '9') {
            value = value * 10 + (bytes_[pos_] - '0');
            if (value > 1'000'000'000L) {
                throw PnmParseError(PnmErrorKind::MalformedHeader, std::string("PNM header: ") + what + " too large");
            }
            ++pos_;
        }
        return value;
    }

    // Exactly one whitespace byte separates maxval from the raster.
    void expect_single_space()
    {
        if (pos_ >= bytes_.size() || !is_space(bytes_[pos_])) {
            throw PnmParseError(PnmErrorKind::MalformedHeader, "PNM header: missing whitespace before payload");
        }
        ++pos_;
    }

    std::size_t pos() const noexcept { return pos_; }
    void advance(std::size_t n) noexcept { pos_ += n; }

private:
    std::span<const std::uint8_t> bytes_;
    std::size_t pos_ = 0;
};

std::vector<std::uint8_t> header(char kind, int w, int h)
{
    const std::string text = std::string("P") + kind + "\n" + std::to_string(w) + " " + std::to_string(h) + "\n255\n";
    return {text.begin(), text.end()};
}

} // namespace

AnyImage load_pnm(std::span<const std::uint8_t> bytes)
{
    if (bytes.size() < 2 || bytes[0] != 'P') {
        throw PnmParseError(PnmErrorKind::UnsupportedMagic, "PNM: missing 'P' magic");
    }
    const bool gray = bytes[1] == '5';
    const bool color = bytes[1] == '6';
    if (!gray && !color) {
        throw PnmParseError(PnmErrorKind::UnsupportedMagic,
                            std::string("PNM: unsupported magic P") + static_cast<char>(bytes[1]));
    }

    HeaderReader reader(bytes);
    reader.advance(2);
    if (bytes.size() > 2 && !is_space(bytes[2]) && bytes[2] != '#') {
        throw PnmParseError(PnmErrorKind::MalformedHeader, "PNM header: magic must be followed by whitespace");
    }
    const long w = reader.read_uint("width");
    const long h = reader.read_uint("height");
    const long maxval = reader.read_uint("maxval");
    if (w < 1 || h < 1) {
        throw PnmParseError(PnmErrorKind::MalformedHeader, "PNM header: zero dimension");
    }
    if (maxval != 255) {
        throw PnmParseError(PnmErrorKind::UnsupportedMaxval, "PNM: maxval must be 255, got " + std::to_string(maxval));
    }
    reader.expect_single_space();

    const std::size_t channels = gray ? 1 : 3;
    const std::size_t count = static_cast<std::size_t>(w) * static_cast<std::size_t>(h);
    if (bytes.size() - reader.pos() < count * channels) {
        throw PnmParseError(PnmErrorKind::TruncatedPayload,
                            "PNM: payload has " + std::to_string(bytes.size() - reader.pos()) + " bytes, expected " +
                                std::to_string(count * channels));
    }
    const auto payload = bytes.subspan(reader.pos(), count * channels);

    if (gray) {
        return GrayImage(static_cast<int>(w), static_cast<int>(h), std::vector<std::uint8_t>(payload.begin(), payload.end()));
    }
    std::vector<Rgb> px(count);
    for (std::size_t i = 0; i < count; ++i) {
        px[i] = Rgb{payload[3 * i], payload[3 * i + 1], payload[3 * i + 2]};
    }
    return ColorImage(static_cast<int>(w), static_cast<int>(h), std::move(px));
}

std::vector<std::uint8_t> save_pnm(const GrayImage& img)
{
    auto out = header('5', img.width(), img.height());
    const auto px = img.pixels();
    out.insert(out.end(), px.begin(), px.end());
    return out;
}

std::vector<std::uint8_t> save_pnm(const ColorImage& img)
{
    auto out = header('6', img.width(), img.height());
    out.reserve(out.size() + img.size() * 3);
    for (const Rgb& p : img.pixels()) {
        out.push_back(p.r);
        out.push_back(p.g);
        out.push_back(p.b);
    }
    return out;
}

std::vector<std::uint8_t> save_pnm(const AnyImage& img)
{
    return std::visit([](const auto& i) { return save_pnm(i); }, img);
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open " + path.string());
    }
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError("cannot write " + path.string());
    }
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) {
        throw IoError("short write to " + path.string());
    }
}

void write_text_file(const std::filesystem::path& path, const std::string& text)
{
    write_file(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

AnyImage read_pnm_file(const std::filesystem::path& path)
{
    const auto bytes = read_file(path);
    return load_pnm(bytes);
}

} // namespace mf
