#include <doctest.h>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <random>

#include "markerfind/bench.hpp"
#include "markerfind/matching.hpp"
#include "markerfind/pnm.hpp"
#include "markerfind/synthetic.hpp"

using namespace mf;

namespace {

GrayImage random_gray(std::mt19937& gen, int w, int h)
{
    GrayImage img(w, h);
    for (auto& v : img.pixels()) {
        v = static_cast<std::uint8_t>(gen() % 256);
    }
    return img;
}

/// Direct evaluation of the correlation formula in long double.
double naive_ncc(const GrayImage& img, int ox, int oy, const GrayImage& t)
{
    const int n = t.width() * t.height();
    long double ma = 0;
    long double mb = 0;
    for (int y = 0; y < t.height(); ++y) {
        for (int x = 0; x < t.width(); ++x) {
            ma += img.at(ox + x, oy + y);
            mb += t.at(x, y);
        }
    }
    ma /= n;
    mb /= n;
    long double sab = 0;
    long double saa = 0;
    long double sbb = 0;
    for (int y = 0; y < t.height(); ++y) {
        for (int x = 0; x < t.width(); ++x) {
            const long double a = img.at(ox + x, oy + y) - ma;
            const long double b = t.at(x, y) - mb;
            sab += a * b;
            saa += a * a;
            sbb += b * b;
        }
    }
    if (saa == 0 || sbb == 0) {
        return 0.0;
    }
    return static_cast<double>(sab / std::sqrt(saa * sbb));
}

GrayImage crop(const GrayImage& img, int x0, int y0, int w, int h)
{
    GrayImage out(w, h);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            out.at(x, y) = img.at(x0 + x, y0 + y);
        }
    }
    return out;
}

GrayImage inverted(const GrayImage& img)
{
    GrayImage out = img;
    for (auto& v : out.pixels()) {
        v = static_cast<std::uint8_t>(255 - v);
    }
    return out;
}

GrayImage checkerboard(int side, int cell, int shift)
{
    GrayImage img(side, side);
    for (int y = 0; y < side; ++y) {
        for (int x = 0; x < side; ++x) {
            img.at(x, y) = (((x + shift) / cell + y / cell) % 2) ? 200 : 30;
        }
    }
    return img;
}

} // namespace

TEST_CASE("ncc_score examples")
{
    std::mt19937 gen(2);
    const GrayImage a = random_gray(gen, 8, 8);
    CHECK(ncc_score(a, a) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(ncc_score(a, inverted(a)) == doctest::Approx(-1.0).epsilon(1e-12));

    const GrayImage c0 = checkerboard(4, 1, 0);
    const GrayImage c1 = checkerboard(4, 1, 1);
    CHECK(std::abs(ncc_score(c0, c1) - naive_ncc(c0, 0, 0, c1)) < 1e-12);
    CHECK(ncc_score(c0, c1) == doctest::Approx(-1.0));

    const GrayImage b0 = checkerboard(8, 2, 0);
    const GrayImage b1 = checkerboard(8, 2, 1);
    CHECK(std::abs(ncc_score(b0, b1) - naive_ncc(b0, 0, 0, b1)) < 1e-12);

    CHECK_THROWS_AS(ncc_score(crop(a, 0, 0, 4, 4), a), ParameterError);
    CHECK_THROWS_AS(ncc_score(GrayImage(8, 8, 9), a), UndefinedCorrelationError);
    CHECK_THROWS_AS(ncc_score(a, GrayImage(8, 8, 0)), UndefinedCorrelationError);
}

TEST_CASE("ncc_score symmetry and affine invariance")
{
    std::mt19937 gen(4);
    for (int i = 0; i < 50; ++i) {
        const GrayImage a = random_gray(gen, 16, 16);
        const GrayImage b = random_gray(gen, 16, 16);
        CHECK(ncc_score(a, b) == ncc_score(b, a));

        std::vector<double> ra(a.pixels().begin(), a.pixels().end());
        std::vector<double> rb(b.pixels().begin(), b.pixels().end());
        const double base = ncc_score(ra, rb);
        CHECK(std::abs(base - ncc_score(a, b)) < 1e-12);
        const double gain = 0.1 + 3.0 * (gen() % 1000) / 1000.0;
        const double offset = -50.0 + (gen() % 1000) / 10.0;
        std::vector<double> scaled = ra;
        for (auto& v : scaled) {
            v = gain * v + offset;
        }
        CHECK(std::abs(ncc_score(scaled, rb) - base) < 1e-6);
        CHECK(std::abs(ncc_score(rb, scaled) - base) < 1e-6);
    }
}

TEST_CASE("match_template examples")
{
    std::mt19937 gen(6);
    GrayImage img(30, 20, 100);
    const GrayImage tmpl = random_gray(gen, 6, 5);
    for (int y = 0; y < 5; ++y) {
        for (int x = 0; x < 6; ++x) {
            img.at(7 + x, 3 + y) = tmpl.at(x, y);
        }
    }
    const ResultMatrix r = match_template(img, tmpl);
    CHECK(r.width() == 25);
    CHECK(r.height() == 16);
    const MinMax mm = min_max_loc(r);
    CHECK(mm.max == doctest::Approx(1.0));
    CHECK(mm.max_loc == Point2{7, 3});
    CHECK(r.at(0, 0) == 0.0);

    const ResultMatrix self = match_template(tmpl, tmpl);
    CHECK(self.width() == 1);
    CHECK(self.height() == 1);
    CHECK(self.at(0, 0) == doctest::Approx(1.0));

    CHECK_THROWS_AS(match_template(tmpl, img), ParameterError);
    CHECK_THROWS_AS(match_template(img, GrayImage(3, 3, 5)), UndefinedCorrelationError);
}

TEST_CASE("match_template equals the naive per-offset oracle")
{
    std::mt19937 gen(8);
    for (int i = 0; i < 10; ++i) {
        const GrayImage img = random_gray(gen, 24, 24);
        const GrayImage tmpl = random_gray(gen, 8, 8);
        const ResultMatrix r = match_template(img, tmpl);
        for (int y = 0; y < r.height(); ++y) {
            for (int x = 0; x < r.width(); ++x) {
                CHECK(std::abs(r.at(x, y) - naive_ncc(img, x, y, tmpl)) < 1e-9);
                CHECK(std::abs(r.at(x, y)) <= 1.0 + 1e-9);
            }
        }
    }
}

TEST_CASE("match_template maximum sits at the true occurrence")
{
    std::mt19937 gen(10);
    for (int i = 0; i < 20; ++i) {
        GrayImage img = random_gray(gen, 40, 40);
        const GrayImage tmpl = random_gray(gen, 9, 9);
        const int ox = static_cast<int>(gen() % 32);
        const int oy = static_cast<int>(gen() % 32);
        for (int y = 0; y < 9; ++y) {
            for (int x = 0; x < 9; ++x) {
                img.at(ox + x, oy + y) = tmpl.at(x, y);
            }
        }
        const ResultMatrix r = match_template(img, tmpl);
        const MinMax mm = min_max_loc(r);
        CHECK(mm.max_loc == Point2{static_cast<double>(ox), static_cast<double>(oy)});
        for (int y = 0; y < r.height(); ++y) {
            for (int x = 0; x < r.width(); ++x) {
                if (x != ox || y != oy) {
                    CHECK(r.at(x, y) < mm.max);
                }
            }
        }
    }
}

TEST_CASE("match_template is independent of the worker count")
{
    std::mt19937 gen(12);
    const GrayImage img = random_gray(gen, 64, 64);
    const GrayImage tmpl = random_gray(gen, 16, 16);
    ::setenv("MF_THREADS", "1", 1);
    const ResultMatrix one = match_template(img, tmpl);
    ::setenv("MF_THREADS", "4", 1);
    const ResultMatrix four = match_template(img, tmpl);
    ::unsetenv("MF_THREADS");
    CHECK(one == four);
}

TEST_CASE("min_max_loc examples")
{
    const ResultMatrix m(2, 2, std::vector<double>{0.1, 0.9, 0.9, 0.2});
    const MinMax mm = min_max_loc(m);
    CHECK(mm.max == 0.9);
    CHECK(mm.max_loc == Point2{1, 0});
    CHECK(mm.min == 0.1);
    CHECK(mm.min_loc == Point2{0, 0});

    const MinMax one = min_max_loc(ResultMatrix(1, 1, 0.5));
    CHECK(one.min == 0.5);
    CHECK(one.max == 0.5);
    CHECK(one.min_loc == Point2{0, 0});
    CHECK(one.max_loc == Point2{0, 0});

    CHECK_THROWS_AS(min_max_loc(ResultMatrix()), ParameterError);
}

TEST_CASE("min_max_loc agrees with a linear scan")
{
    std::mt19937 gen(14);
    for (int i = 0; i < 100; ++i) {
        const int w = 1 + static_cast<int>(gen() % 12);
        const int h = 1 + static_cast<int>(gen() % 12);
        ResultMatrix m(w, h);
        for (auto& v : m.pixels()) {
            v = static_cast<double>(gen() % 7) / 7.0;
        }
        std::size_t imin = 0;
        std::size_t imax = 0;
        for (std::size_t k = 1; k < m.size(); ++k) {
            if (m.data()[k] < m.data()[imin]) imin = k;
            if (m.data()[k] > m.data()[imax]) imax = k;
        }
        const MinMax mm = min_max_loc(m);
        CHECK(mm.min == m.data()[imin]);
        CHECK(mm.max == m.data()[imax]);
        CHECK(mm.min_loc == Point2{static_cast<double>(imin % w), static_cast<double>(imin / w)});
        CHECK(mm.max_loc == Point2{static_cast<double>(imax % w), static_cast<double>(imax / w)});
    }
}

TEST_CASE("rotate_square turns clockwise on screen")
{
    const GrayImage img(2, 2, {1, 2, 3, 4});
    CHECK(rotate_square(img, 0) == img);
    CHECK(rotate_square(img, 90) == GrayImage(2, 2, {3, 1, 4, 2}));
    CHECK(rotate_square(img, 180) == GrayImage(2, 2, {4, 3, 2, 1}));
    CHECK(rotate_square(img, 270) == GrayImage(2, 2, {2, 4, 1, 3}));
    CHECK(rotate_square(rotate_square(img, 90), 270) == img);
    CHECK_THROWS_AS(rotate_square(img, 45), ParameterError);
    CHECK_THROWS_AS(rotate_square(GrayImage(2, 3), 90), ParameterError);
}

TEST_CASE("identify_marker examples")
{
    const PatternRegistry reg = make_pattern_registry(5, 21);
    const auto& a = reg.entries()[0];
    const auto exact = identify_marker(a.pattern, reg);
    REQUIRE(exact.has_value());
    CHECK(exact->id == a.id);
    CHECK(exact->rotation_deg == 0);
    CHECK(exact->score == doctest::Approx(1.0));

    const auto turned = identify_marker(PatternImage(rotate_square(a.pattern.image(), 90)), reg);
    REQUIRE(turned.has_value());
    CHECK(turned->id == a.id);
    CHECK(turned->rotation_deg == 90);
    CHECK(turned->score == doctest::Approx(1.0));

    CHECK_THROWS_AS(identify_marker(PatternImage(GrayImage(16, 16, 3)), reg), ParameterError);
    CHECK_THROWS_AS(identify_marker(a.pattern, reg, 0.0), ParameterError);
    CHECK_THROWS_AS(identify_marker(a.pattern, reg, 1.5), ParameterError);
}

TEST_CASE("identify_marker rejects noise patches")
{
    const PatternRegistry reg = make_pattern_registry(5, 21);
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        std::mt19937 gen(static_cast<unsigned>(seed));
        const PatternImage noise(random_gray(gen, 32, 32));
        double best = -1.0;
        for (const auto& e : reg.entries()) {
            for (int r : {0, 90, 180, 270}) {
                best = std::max(best, ncc_score(rotate_square(noise.image(), r), e.pattern.image()));
            }
        }
        CHECK(best < 0.7);
        CHECK_FALSE(identify_marker(noise, reg, 0.7).has_value());
    }
}

TEST_CASE("identify_marker shifts its rotation label under pre-rotation")
{
    const PatternRegistry reg = make_pattern_registry(6, 33);
    std::mt19937 gen(35);
    for (const auto& e : reg.entries()) {
        GrayImage noisy = e.pattern.image();
        for (auto& v : noisy.pixels()) {
            v = static_cast<std::uint8_t>(std::clamp(static_cast<int>(v) + static_cast<int>(gen() % 41) - 20, 0, 255));
        }
        const auto base = identify_marker(PatternImage(noisy), reg);
        REQUIRE(base.has_value());
        CHECK(base->id == e.id);
        for (int r : {90, 180, 270}) {
            const auto turned = identify_marker(PatternImage(rotate_square(noisy, r)), reg);
            REQUIRE(turned.has_value());
            CHECK(turned->id == base->id);
            CHECK(turned->rotation_deg == (base->rotation_deg + r) % 360);
            CHECK(turned->score == base->score);
        }
    }
}

TEST_CASE("identify_marker breaks ties by registry order")
{
    const PatternRegistry base = make_pattern_registry(1, 9);
    const GrayImage& img = base.entries()[0].pattern.image();
    const PatternRegistry reg({{"first", PatternImage(img)}, {"second", PatternImage(img)}});
    const auto got = identify_marker(PatternImage(img), reg);
    REQUIRE(got.has_value());
    CHECK(got->id == "first");
}

TEST_CASE("PatternRegistry validation and prefix")
{
    const PatternRegistry reg = make_pattern_registry(4, 2);
    CHECK(reg.size() == 4);
    CHECK(reg.entries()[0].id == "m00");
    CHECK(reg.prefix(2).size() == 2);
    CHECK(reg.find("m03") != nullptr);
    CHECK(reg.find("nope") == nullptr);
    const GrayImage& img = reg.entries()[0].pattern.image();
    CHECK_THROWS_AS(PatternRegistry({{"x", PatternImage(img)}, {"x", PatternImage(img)}}), ParameterError);
    CHECK_THROWS_AS(PatternRegistry({{"x", PatternImage(img)}, {"y", PatternImage(GrayImage(8, 8, 1))}}), ParameterError);
    CHECK_THROWS_AS(PatternRegistry({}), ParameterError);
    CHECK_THROWS_AS(PatternImage(GrayImage(4, 5)), ParameterError);
}

TEST_CASE("registry manifest round trip")
{
    const auto dir = std::filesystem::temp_directory_path() / "mf_test_registry";
    std::filesystem::remove_all(dir);
    const PatternRegistry reg = make_pattern_registry(3, 4);
    const auto manifest = save_registry(reg, dir);
    const PatternRegistry back = load_registry(manifest);
    REQUIRE(back.size() == 3);
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(back.entries()[i].id == reg.entries()[i].id);
        CHECK(back.entries()[i].pattern.image() == reg.entries()[i].pattern.image());
    }
    CHECK_THROWS_AS(load_registry(dir / "missing.json"), IoError);
    write_text_file(dir / "bad.json", "{\"id\": 3}");
    CHECK_THROWS_AS(load_registry(dir / "bad.json"), ParameterError);
    std::filesystem::remove_all(dir);
}

TEST_CASE("rectify_candidate on an axis-aligned square")
{
    std::mt19937 gen(16);
    GrayImage img(64, 64, 50);
    const GrayImage patch = random_gray(gen, 32, 32);
    for (int y = 0; y < 32; ++y) {
        for (int x = 0; x < 32; ++x) {
            img.at(10 + x, 20 + y) = patch.at(x, y);
        }
    }
    QuadCandidate q;
    q.outer = {Point2{10, 20}, {10, 52}, {42, 52}, {42, 20}};
    const PatternImage out = rectify_candidate(img, q, 32);
    for (int y = 0; y < 32; ++y) {
        for (int x = 0; x < 32; ++x) {
            CHECK(std::abs(static_cast<int>(out.image().at(x, y)) - static_cast<int>(patch.at(x, y))) <= 1);
        }
    }
    q.outer[1] = q.outer[0];
    CHECK_THROWS_AS(rectify_candidate(img, q, 32), DegenerateError);
}

TEST_CASE("rectify_quad undoes a 30 degree tilt")
{
    const PatternRegistry reg = make_pattern_registry(1, 7);
    const CameraIntrinsics cam = default_camera(640, 480);
    const Pose pose = marker_pose(cam, {320, 240}, 200, 30, 0, 10);
    SyntheticScene scene;
    scene.background = GrayImage(640, 480, 128);
    scene.placements.push_back({reg.entries()[0].id, homography_from_pose(cam, pose), 1.0});
    update_ground_truth(scene);
    const GrayImage frame = render_synthetic(scene, reg, 0.0);

    const Homography& h = scene.placements[0].h;
    const double lo = kPatternInset;
    const double hi = 1.0 - kPatternInset;
    const std::array<Point2, 4> pattern_corners{apply_homography(h, {lo, lo}), apply_homography(h, {lo, hi}),
                                                apply_homography(h, {hi, hi}), apply_homography(h, {hi, lo})};
    const PatternImage rect = rectify_quad(frame, pattern_corners, 32);
    CHECK(ncc_score(rect.image(), reg.entries()[0].pattern.image()) > 0.9);
}

TEST_CASE("identify_marker time grows linearly with registry size")
{
    const PatternRegistry reg = make_pattern_registry(16, 3);
    std::mt19937 gen(18);
    const PatternImage probe(random_gray(gen, 32, 32));
    std::vector<double> sizes;
    std::vector<double> times;
    for (std::size_t n : {1u, 2u, 4u, 8u, 16u}) {
        const PatternRegistry sub = reg.prefix(n);
        double best = 1e300;
        for (int rep = 0; rep < 7; ++rep) {
            const auto t0 = std::chrono::steady_clock::now();
            for (int i = 0; i < 200; ++i) {
                (void)identify_marker(probe, sub, 0.99);
            }
            best = std::min(best, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
        }
        sizes.push_back(static_cast<double>(n));
        times.push_back(best);
    }
    CHECK(linear_fit_r2(sizes, times) > 0.95);
}
