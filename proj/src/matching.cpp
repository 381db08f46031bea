#include "markerfind/matching.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include <json.hpp>

#include "markerfind/parallel.hpp"
#include "markerfind/pnm.hpp"
#include "markerfind/threshold.hpp"

namespace mf {
namespace {

__extension__ typedef __int128 Wide;

struct Moments {
    std::uint64_t n = 0;
    std::uint64_t sum = 0;
    std::uint64_t sum_sq = 0;
};

Moments moments_of(const GrayImage& img)
{
    Moments m;
    m.n = img.size();
    for (std::uint8_t v : img.pixels()) {
        m.sum += v;
        m.sum_sq += static_cast<std::uint64_t>(v) * v;
    }
    return m;
}

Wide centered_energy(const Moments& m)
{
    return static_cast<Wide>(m.n) * m.sum_sq - static_cast<Wide>(m.sum) * m.sum;
}

/// NCC from exact integer moments; nullopt when either energy is zero.
std::optional<double> ncc_from_moments(const Moments& a, const Moments& b, std::uint64_t sum_ab)
{
    const Wide ea = centered_energy(a);
    const Wide eb = centered_energy(b);
    if (ea <= 0 || eb <= 0) {
        return std::nullopt;
    }
    const Wide num = static_cast<Wide>(a.n) * sum_ab - static_cast<Wide>(a.sum) * b.sum;
    const double r = static_cast<double>(num) / std::sqrt(static_cast<double>(ea) * static_cast<double>(eb));
    return std::clamp(r, -1.0, 1.0);
}

std::uint64_t cross_sum(const GrayImage& a, const GrayImage& b)
{
    std::uint64_t acc = 0;
    const auto pa = a.pixels();
    const auto pb = b.pixels();
    for (std::size_t i = 0; i < pa.size(); ++i) {
        acc += static_cast<std::uint64_t>(pa[i]) * pb[i];
    }
    return acc;
}

void require_same_size(int aw, int ah, int bw, int bh)
{
    if (aw != bw || ah != bh) {
        throw ParameterError("images must have identical dimensions");
    }
}

} // namespace

PatternImage::PatternImage(GrayImage img) : img_(std::move(img))
{
    if (img_.width() != img_.height()) {
        throw ParameterError("pattern images must be square");
    }
}

PatternRegistry::PatternRegistry(std::vector<PatternEntry> entries, double acceptance_threshold)
    : entries_(std::move(entries)), threshold_(acceptance_threshold)
{
    if (entries_.empty()) {
        throw ParameterError("pattern registry is empty");
    }
    if (!(threshold_ > 0.0 && threshold_ <= 1.0)) {
        throw ParameterError("acceptance threshold must be in (0, 1]");
    }
    std::set<std::string> ids;
    for (const auto& e : entries_) {
        if (!ids.insert(e.id).second) {
            throw ParameterError("duplicate pattern id '" + e.id + "'");
        }
        if (e.pattern.side() != entries_.front().pattern.side()) {
            throw ParameterError("pattern '" + e.id + "' has a different size from the rest of the registry");
        }
        if (centered_energy(moments_of(e.pattern.image())) <= 0) {
            throw ParameterError("pattern '" + e.id + "' is constant");
        }
    }
}

const PatternEntry* PatternRegistry::find(const std::string& id) const
{
    const auto it = std::find_if(entries_.begin(), entries_.end(), [&](const PatternEntry& e) { return e.id == id; });
    return it == entries_.end() ? nullptr : &*it;
}

PatternRegistry PatternRegistry::prefix(std::size_t n) const
{
    n = std::min(n, entries_.size());
    return PatternRegistry(std::vector<PatternEntry>(entries_.begin(), entries_.begin() + static_cast<std::ptrdiff_t>(n)),
                           threshold_);
}

PatternRegistry load_registry(const std::filesystem::path& manifest, double acceptance_threshold)
{
    const auto bytes = read_file(manifest);
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(bytes.begin(), bytes.end());
    } catch (const nlohmann::json::exception& e) {
        throw ParameterError("registry manifest " + manifest.string() + ": " + e.what());
    }
    if (!doc.is_array()) {
        throw ParameterError("registry manifest must be a JSON array");
    }
    const auto base = manifest.parent_path();
    std::vector<PatternEntry> entries;
    for (const auto& item : doc) {
        if (!item.is_object() || !item.contains("id") || !item.contains("file") || !item["id"].is_string() ||
            !item["file"].is_string()) {
            throw ParameterError("registry entries need string fields \"id\" and \"file\"");
        }
        std::filesystem::path file = item["file"].get<std::string>();
        if (file.is_relative()) {
            file = base / file;
        }
        auto img = read_pnm_file(file);
        const auto* gray = std::get_if<GrayImage>(&img);
        if (gray == nullptr) {
            throw ParameterError("pattern file " + file.string() + " must be a P5 PGM");
        }
        entries.push_back(PatternEntry{item["id"].get<std::string>(), PatternImage(*gray)});
    }
    return PatternRegistry(std::move(entries), acceptance_threshold);
}

std::filesystem::path save_registry(const PatternRegistry& reg, const std::filesystem::path& dir)
{
    std::filesystem::create_directories(dir);
    nlohmann::ordered_json doc = nlohmann::ordered_json::array();
    for (const auto& e : reg.entries()) {
        const std::string file = e.id + ".pgm";
        write_file(dir / file, save_pnm(e.pattern.image()));
        doc.push_back({{"id", e.id}, {"file", file}});
    }
    const auto manifest = dir / "registry.json";
    write_text_file(manifest, doc.dump(2) + "\n");
    return manifest;
}

PatternImage rectify_quad(const GrayImage& img, std::span<const Point2, 4> corners, int side)
{
    if (side < 1) {
        throw ParameterError("pattern side must be positive");
    }
    const double s = side;
    const std::array<Point2, 4> square{Point2{0.0, 0.0}, Point2{0.0, s}, Point2{s, s}, Point2{s, 0.0}};
    const Homography h = estimate_homography(square, corners);
    return PatternImage(warp_inverse(img, h, side, side));
}

PatternImage rectify_candidate(const GrayImage& img, const QuadCandidate& quad, int side)
{
    return rectify_quad(img, quad.outer, side);
}

double ncc_score(const GrayImage& a, const GrayImage& b)
{
    require_same_size(a.width(), a.height(), b.width(), b.height());
    const auto r = ncc_from_moments(moments_of(a), moments_of(b), cross_sum(a, b));
    if (!r) {
        throw UndefinedCorrelationError("correlation undefined: an operand has zero variance");
    }
    return *r;
}

double ncc_score(std::span<const double> a, std::span<const double> b)
{
    if (a.size() != b.size() || a.empty()) {
        throw ParameterError("ncc_score: operands must be non-empty and equally sized");
    }
    const double n = static_cast<double>(a.size());
    double mean_a = 0.0;
    double mean_b = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        mean_a += a[i];
        mean_b += b[i];
    }
    mean_a /= n;
    mean_b /= n;
    double sab = 0.0;
    double saa = 0.0;
    double sbb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double da = a[i] - mean_a;
        const double db = b[i] - mean_b;
        sab += da * db;
        saa += da * da;
        sbb += db * db;
    }
    if (!(saa > 0.0) || !(sbb > 0.0)) {
        throw UndefinedCorrelationError("correlation undefined: an operand has zero variance");
    }
    return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

ResultMatrix match_template(const GrayImage& img, const GrayImage& tmpl)
{
    if (tmpl.width() > img.width() || tmpl.height() > img.height()) {
        throw ParameterError("template larger than image");
    }
    const Moments tm = moments_of(tmpl);
    if (centered_energy(tm) <= 0) {
        throw UndefinedCorrelationError("template has zero variance");
    }
    const IntegralImage sum = integral_image(img);
    const IntegralImage sum_sq = squared_integral_image(img);
    const int tw = tmpl.width();
    const int th = tmpl.height();
    ResultMatrix out(img.width() - tw + 1, img.height() - th + 1, 0.0);

    parallel_for(out.height(), [&](int y0, int y1) {
        for (int y = y0; y < y1; ++y) {
            for (int x = 0; x < out.width(); ++x) {
                Moments wm;
                wm.n = tm.n;
                wm.sum = sum.sum(x, y, x + tw, y + th);
                wm.sum_sq = sum_sq.sum(x, y, x + tw, y + th);
                std::uint64_t cross = 0;
                for (int ty = 0; ty < th; ++ty) {
                    const auto irow = img.row(y + ty).subspan(static_cast<std::size_t>(x), static_cast<std::size_t>(tw));
                    const auto trow = tmpl.row(ty);
                    for (int tx = 0; tx < tw; ++tx) {
                        cross += static_cast<std::uint64_t>(irow[static_cast<std::size_t>(tx)]) *
                                 trow[static_cast<std::size_t>(tx)];
                    }
                }
                out.at(x, y) = ncc_from_moments(wm, tm, cross).value_or(0.0);
            }
        }
    });
    return out;
}

MinMax min_max_loc(const ResultMatrix& m)
{
    if (m.empty()) {
        throw ParameterError("min_max_loc: empty matrix");
    }
    MinMax r;
    r.min = r.max = m.at(0, 0);
    for (int y = 0; y < m.height(); ++y) {
        for (int x = 0; x < m.width(); ++x) {
            const double v = m.at(x, y);
            if (v < r.min) {
                r.min = v;
                r.min_loc = {static_cast<double>(x), static_cast<double>(y)};
            }
            if (v > r.max) {
                r.max = v;
                r.max_loc = {static_cast<double>(x), static_cast<double>(y)};
            }
        }
    }
    return r;
}

GrayImage rotate_square(const GrayImage& img, int degrees)
{
    if (img.width() != img.height()) {
        throw ParameterError("rotate_square needs a square image");
    }
    const int turns = ((degrees % 360) + 360) % 360;
    if (turns % 90 != 0) {
        throw ParameterError("rotation must be a multiple of 90 degrees");
    }
    const int s = img.width();
    GrayImage out(s, s);
    for (int y = 0; y < s; ++y) {
        for (int x = 0; x < s; ++x) {
            switch (turns) {
            case 0:
                out.at(x, y) = img.at(x, y);
                break;
            case 90:
                out.at(x, y) = img.at(y, s - 1 - x);
                break;
            case 180:
                out.at(x, y) = img.at(s - 1 - x, s - 1 - y);
                break;
            default:
                out.at(x, y) = img.at(s - 1 - y, x);
                break;
            }
        }
    }
    return out;
}

std::optional<Identification> identify_marker(const PatternImage& p, const PatternRegistry& reg)
{
    return identify_marker(p, reg, reg.acceptance_threshold());
}

std::optional<Identification> identify_marker(const PatternImage& p, const PatternRegistry& reg, double acceptance_threshold)
{
    if (!(acceptance_threshold > 0.0 && acceptance_threshold <= 1.0)) {
        throw ParameterError("acceptance threshold must be in (0, 1]");
    }
    if (p.side() != reg.side()) {
        throw ParameterError("candidate patch size " + std::to_string(p.side()) + " does not match registry size " +
                             std::to_string(reg.side()));
    }
    const Moments pm = moments_of(p.image());
    if (centered_energy(pm) <= 0) {
        return std::nullopt;
    }
    // Undoing a clockwise rotation r is a clockwise rotation by 360 - r.
    std::array<GrayImage, 4> undone;
    for (int k = 0; k < 4; ++k) {
        undone[static_cast<std::size_t>(k)] = rotate_square(p.image(), (360 - 90 * k) % 360);
    }

    std::optional<Identification> best;
    for (const auto& entry : reg.entries()) {
        const GrayImage& pattern = entry.pattern.image();
        const Moments em = moments_of(pattern);
        for (int k = 0; k < 4; ++k) {
            const auto score = ncc_from_moments(pm, em, cross_sum(undone[static_cast<std::size_t>(k)], pattern));
            if (score && (!best || *score > best->score)) {
                best = Identification{entry.id, 90 * k, *score};
            }
        }
    }
    if (!best || best->score < acceptance_threshold) {
        return std::nullopt;
    }
    return best;
}

} // namespace mf
