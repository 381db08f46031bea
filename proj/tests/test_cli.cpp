#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "markerfind/bench.hpp"
#include "markerfind/cli.hpp"
#include "markerfind/io.hpp"
#include "markerfind/pnm.hpp"

using namespace mf;
namespace fs = std::filesystem;

namespace {

const fs::path kData = MF_TEST_DATA_DIR;

struct Run {
    int code = -1;
    std::string out;
    std::string err;
};

Run run(std::vector<std::string> args)
{
    args.insert(args.begin(), "mf");
    std::vector<const char*> argv;
    for (const auto& a : args) {
        argv.push_back(a.c_str());
    }
    std::ostringstream out;
    std::ostringstream err;
    Run r;
    r.code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
    r.out = out.str();
    r.err = err.str();
    return r;
}

std::string slurp(const fs::path& p)
{
    const auto b = read_file(p);
    return {b.begin(), b.end()};
}

/// Fresh scratch directory removed at scope exit.
struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / ("mf_cli_" + name))
    {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string str(const std::string& leaf = "") const { return (leaf.empty() ? path : path / leaf).string(); }
};

std::vector<std::vector<std::string>> csv_rows(const std::string& text)
{
    std::vector<std::vector<std::string>> rows;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        std::vector<std::string> cells;
        std::istringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) {
            cells.push_back(cell);
        }
        rows.push_back(cells);
    }
    return rows;
}

} // namespace

TEST_CASE("usage errors exit with 2")
{
    CHECK(run({}).code == kExitUsage);
    CHECK(run({"frobnicate"}).code == kExitUsage);
    CHECK(run({"detect", "--image", "x.pgm"}).code == kExitUsage);
    CHECK(run({"detect", "--image", "x.pgm", "--registry", "r.json", "--bogus"}).code == kExitUsage);
    CHECK(run({"--help"}).code == kExitOk);
}

TEST_CASE("detect on a blank frame")
{
    TempDir dir("detect_blank");
    REQUIRE(run({"synth", "--out", dir.str(), "--make-registry", "3"}).code == kExitOk);
    write_file(dir.path / "blank.pgm", save_pnm(GrayImage(320, 240, 200)));
    const std::string reg = dir.str("registry/registry.json");
    const Run r = run({"detect", "--image", dir.str("blank.pgm"), "--registry", reg});
    CHECK(r.code == kExitOk);
    const Json j = Json::parse(r.out);
    CHECK(j["detections"].is_array());
    CHECK(j["detections"].empty());
    CHECK(r.out.find("\"detections\": []") != std::string::npos);

    const Run a = run({"detect", "--image", dir.str("blank.pgm"), "--registry", reg, "--annotate", dir.str("a.ppm"), "--out",
                       dir.str("d.json")});
    CHECK(a.code == kExitOk);
    CHECK(a.out.empty());
    CHECK(std::holds_alternative<ColorImage>(read_pnm_file(dir.path / "a.ppm")));
    CHECK(Json::parse(slurp(dir.path / "d.json"))["detections"].empty());
}

TEST_CASE("detect reports input and config errors with exit 2")
{
    TempDir dir("detect_errors");
    REQUIRE(run({"synth", "--out", dir.str(), "--make-registry", "2"}).code == kExitOk);
    write_file(dir.path / "blank.pgm", save_pnm(GrayImage(64, 64, 200)));
    write_text_file(dir.path / "bad.pgm", "P5 4 4 255\n");
    const std::string reg = dir.str("registry/registry.json");

    Run r = run({"detect", "--image", dir.str("missing.pgm"), "--registry", reg});
    CHECK(r.code == kExitUsage);
    CHECK_FALSE(r.err.empty());
    CHECK(run({"detect", "--image", dir.str("blank.pgm"), "--registry", dir.str("nope.json")}).code == kExitUsage);
    CHECK(run({"detect", "--image", dir.str("bad.pgm"), "--registry", reg}).code == kExitUsage);
    CHECK(run({"detect", "--image", dir.str("blank.pgm"), "--registry", reg, "--threshold", "adaptive:4,1"}).code ==
          kExitUsage);
    CHECK(run({"detect", "--image", dir.str("blank.pgm"), "--registry", reg, "--acceptance", "0"}).code == kExitUsage);
    write_text_file(dir.path / "cam.json", "{\"fx\": -1, \"fy\": 1, \"cx\": 0, \"cy\": 0}");
    CHECK(run({"detect", "--image", dir.str("blank.pgm"), "--registry", reg, "--camera", dir.str("cam.json")}).code ==
          kExitUsage);
}

TEST_CASE("detect output equals the golden JSON")
{
    const fs::path previous = fs::current_path();
    fs::current_path(kData);
    const Run r = run({"detect", "--image", "golden_scene.pgm", "--registry", "golden_registry/registry.json", "--camera",
                       "golden_camera.json"});
    fs::current_path(previous);
    CHECK(r.code == kExitOk);
    CHECK(r.out == slurp(kData / "golden_detections.json"));
}

TEST_CASE("chessboard command")
{
    TempDir dir("chessboard");
    REQUIRE(run({"synth", "--out", dir.str("flat"), "--board", "7x5"}).code == kExitOk);
    const Run r = run({"chessboard", "--image", dir.str("flat/board.pgm"), "--board", "7x5"});
    REQUIRE(r.code == kExitOk);
    const Json j = Json::parse(r.out);
    CHECK(j["corners"].size() == 35);
    CHECK(j["outer_corner_indices"] == Json::array({0, 6, 28, 34}));
    CHECK(j["outer_corners"].size() == 4);
    CHECK(j["outer_corners"][1] == j["corners"][6]);

    REQUIRE(run({"synth", "--out", dir.str("tilted"), "--board", "9x6", "--tilt", "30", "--square", "36"}).code == kExitOk);
    const Run t = run({"chessboard", "--image", dir.str("tilted/board.pgm"), "--board", "9x6", "--out", dir.str("t.json")});
    REQUIRE(t.code == kExitOk);
    const Json got = Json::parse(slurp(dir.path / "t.json"));
    const Json truth = Json::parse(slurp(dir.path / "tilted/board_truth.json"));
    REQUIRE(got["corners"].size() == truth["corners"].size());
    CHECK(got["outer_corner_indices"] == Json::array({0, 8, 45, 53}));
    for (std::size_t i = 0; i < truth["corners"].size(); ++i) {
        CHECK(distance(point_from_json(got["corners"][i]), point_from_json(truth["corners"][i])) < 1.0);
    }

    write_file(dir.path / "blank.pgm", save_pnm(GrayImage(320, 240, 200)));
    CHECK(run({"chessboard", "--image", dir.str("blank.pgm"), "--board", "7x5"}).code == kExitNotFound);
    CHECK(run({"chessboard", "--image", dir.str("blank.pgm"), "--board", "7"}).code == kExitUsage);
    CHECK(run({"chessboard", "--image", dir.str("blank.pgm"), "--board", "1x5"}).code == kExitUsage);
    CHECK(run({"chessboard", "--image", dir.str("missing.pgm"), "--board", "7x5"}).code == kExitUsage);
}

TEST_CASE("synth is deterministic per seed")
{
    TempDir dir("synth_det");
    REQUIRE(run({"synth", "--out", dir.str("a"), "--make-registry", "4", "--random", "3", "--seed", "9"}).code == kExitOk);
    REQUIRE(run({"synth", "--out", dir.str("b"), "--make-registry", "4", "--random", "3", "--seed", "9"}).code == kExitOk);
    REQUIRE(run({"synth", "--out", dir.str("c"), "--make-registry", "4", "--random", "3", "--seed", "10"}).code == kExitOk);
    for (const auto& e : fs::recursive_directory_iterator(dir.path / "a")) {
        if (!e.is_regular_file()) {
            continue;
        }
        const fs::path rel = fs::relative(e.path(), dir.path / "a");
        CAPTURE(rel.string());
        CHECK(read_file(e.path()) == read_file(dir.path / "b" / rel));
    }
    CHECK(read_file(dir.path / "a/frame_000.pgm") != read_file(dir.path / "c/frame_000.pgm"));
}

TEST_CASE("synth --random 5 writes five frames and one ground-truth file")
{
    TempDir dir("synth_random");
    const Run r = run({"synth", "--out", dir.str(), "--make-registry", "5", "--random", "5", "--seed", "3", "--verify"});
    CHECK(r.code == kExitOk);
    CHECK(r.out.find("5/5") != std::string::npos);
    int frames = 0;
    int json = 0;
    for (const auto& e : fs::directory_iterator(dir.path)) {
        frames += e.path().extension() == ".pgm" ? 1 : 0;
        json += e.path().extension() == ".json" ? 1 : 0;
    }
    CHECK(frames == 5);
    CHECK(json == 1);
    const Json truth = Json::parse(slurp(dir.path / "ground_truth.json"));
    CHECK(truth["seed"] == 3);
    CHECK(truth["registry"] == "registry/registry.json");
    REQUIRE(truth["frames"].size() == 5);
    CHECK(truth["frames"][0]["frame"] == "frame_000.pgm");

    // Frames of an existing corpus can be rechecked against another registry copy.
    const Run again = run({"synth", "--out", dir.str("again"), "--registry", dir.str("registry/registry.json"), "--random",
                           "2", "--distractors-only", "--verify"});
    CHECK(again.code == kExitOk);
    const Json t2 = Json::parse(slurp(dir.path / "again/ground_truth.json"));
    CHECK(t2["frames"][0]["markers"].empty());
}

TEST_CASE("synth from a scene description")
{
    TempDir dir("synth_scene");
    REQUIRE(run({"synth", "--out", dir.str(), "--make-registry", "2"}).code == kExitOk);
    write_text_file(dir.path / "scene.json", R"({
  "width": 400, "height": 300,
  "background": {"level": 150, "gradient": [0.05, -0.02]},
  "noise_sigma": 2.0, "seed": 4,
  "markers": [
    {"id": "m00", "corners": [[60, 60], [60, 160], [160, 160], [160, 60]]},
    {"id": "m01", "contrast": 0.8, "pose": {"centre": [290, 170], "side_px": 90, "tilt_deg": 30, "tilt_axis_deg": 10, "spin_deg": 40}}
  ]
})");
    const Run r = run({"synth", "--out", dir.str(), "--registry", dir.str("registry/registry.json"), "--scene",
                       dir.str("scene.json"), "--verify"});
    CHECK(r.code == kExitOk);
    CHECK(r.out.find("1/1") != std::string::npos);
    const Json truth = Json::parse(slurp(dir.path / "ground_truth.json"));
    CHECK(truth["frames"][0]["markers"].size() == 2);

    write_text_file(dir.path / "bad.json", R"({"width": 400, "height": 300, "markers": [{"id": "m00"}]})");
    CHECK(run({"synth", "--out", dir.str("x"), "--registry", dir.str("registry/registry.json"), "--scene",
               dir.str("bad.json")})
              .code == kExitUsage);
    write_text_file(dir.path / "off.json",
                    R"({"width": 100, "height": 100, "markers": [{"id": "m00", "corners": [[60,60],[60,160],[160,160],[160,60]]}]})");
    CHECK(run({"synth", "--out", dir.str("x"), "--registry", dir.str("registry/registry.json"), "--scene",
               dir.str("off.json")})
              .code == kExitUsage);
    CHECK(run({"synth", "--out", dir.str("x"), "--registry", dir.str("registry/registry.json"), "--scene",
               dir.str("scene.json"), "--random", "2"})
              .code == kExitUsage);
    CHECK(run({"synth", "--out", dir.str("x"), "--random", "2"}).code == kExitUsage);
}

TEST_CASE("bench prints one CSV row per registry size")
{
    TempDir dir("bench");
    REQUIRE(run({"synth", "--out", dir.str(), "--make-registry", "16", "--random", "1", "--markers", "6", "--seed", "2"}).code ==
            kExitOk);
    const Run r = run({"bench", "--corpus", dir.str(), "--repeat", "2"});
    REQUIRE(r.code == kExitOk);
    const auto rows = csv_rows(r.out);
    REQUIRE(rows.size() == 17);
    CHECK(rows[0] == std::vector<std::string>{"registry_size", "threshold_ms", "contours_ms", "rectify_ms", "match_ms",
                                              "total_ms", "detections"});
    for (std::size_t i = 1; i < rows.size(); ++i) {
        REQUIRE(rows[i].size() == 7);
        CHECK(std::stoul(rows[i][0]) == i);
        double stages = 0.0;
        for (int c = 1; c <= 4; ++c) {
            stages += std::stod(rows[i][static_cast<std::size_t>(c)]);
        }
        const double total = std::stod(rows[i][5]);
        CHECK(std::abs(stages - total) <= 0.2 * total);
    }

    const Run s = run({"bench", "--corpus", dir.str(), "--sizes", "1,2-3", "--repeat", "1", "--out", dir.str("b.csv")});
    CHECK(s.code == kExitOk);
    CHECK(csv_rows(slurp(dir.path / "b.csv")).size() == 4);
    CHECK(run({"bench", "--corpus", dir.str(), "--sizes", "0"}).code == kExitUsage);
    CHECK(run({"bench", "--corpus", dir.str(), "--sizes", "40"}).code == kExitUsage);

    TempDir empty("bench_empty");
    CHECK(run({"bench", "--corpus", empty.str()}).code == kExitUsage);
    CHECK(run({"bench", "--corpus", empty.str("missing")}).code == kExitUsage);
}

TEST_CASE("linear_fit_r2")
{
    CHECK(linear_fit_r2({1, 2, 4, 8, 16}, {3, 5, 9, 17, 33}) == doctest::Approx(1.0));
    CHECK(linear_fit_r2({1, 2, 3, 4}, {1, -1, 1, -1}) < 0.5);
}
