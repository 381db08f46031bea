#include "markerfind/cli.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "markerfind/bench.hpp"
#include "markerfind/chessboard.hpp"
#include "markerfind/evaluate.hpp"
#include "markerfind/io.hpp"
#include "markerfind/pipeline.hpp"
#include "markerfind/pnm.hpp"
#include "markerfind/synthetic.hpp"

namespace mf {
namespace {

namespace fs = std::filesystem;

int parse_positive(const std::string& s, const std::string& what)
{
    int v = 0;
    const auto* end = s.data() + s.size();
    const auto [ptr, ec] = std::from_chars(s.data(), end, v);
    if (s.empty() || ec != std::errc() || ptr != end || v < 1) {
        throw ParameterError("invalid " + what + " '" + s + "'");
    }
    return v;
}

BoardSpec parse_board(const std::string& text)
{
    const auto x = text.find_first_of("xX");
    if (x == std::string::npos) {
        throw ParameterError("board must be given as WxH");
    }
    return BoardSpec(parse_positive(text.substr(0, x), "board width"), parse_positive(text.substr(x + 1), "board height"));
}

/// "1,2,4" or ranges such as "1-16".
std::vector<std::size_t> parse_sizes(const std::string& text)
{
    std::vector<std::size_t> out;
    std::size_t start = 0;
    while (start <= text.size()) {
        const auto comma = std::min(text.find(',', start), text.size());
        const std::string item = text.substr(start, comma - start);
        const auto dash = item.find('-');
        if (dash == std::string::npos) {
            out.push_back(static_cast<std::size_t>(parse_positive(item, "registry size")));
        } else {
            const int lo = parse_positive(item.substr(0, dash), "registry size");
            const int hi = parse_positive(item.substr(dash + 1), "registry size");
            if (hi < lo) {
                throw ParameterError("empty registry size range '" + item + "'");
            }
            for (int v = lo; v <= hi; ++v) {
                out.push_back(static_cast<std::size_t>(v));
            }
        }
        start = comma + 1;
    }
    return out;
}

void emit(const std::string& text, const std::string& path, std::ostream& out)
{
    if (path.empty()) {
        out << text;
    } else {
        write_text_file(path, text);
    }
}

std::string frame_name(int i)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "frame_%03d.pgm", i);
    return buf;
}

struct DetectArgs {
    std::string image;
    std::string registry;
    std::string out;
    std::string annotate;
    std::string threshold;
    std::string camera;
    std::optional<double> acceptance;
};

int cmd_detect(const DetectArgs& a, std::ostream& out)
{
    const PatternRegistry reg = load_registry(a.registry);
    DetectConfig cfg;
    cfg.pattern_side = reg.side();
    if (!a.threshold.empty()) {
        cfg.threshold = parse_threshold(a.threshold);
    }
    if (!a.camera.empty()) {
        cfg.camera = load_intrinsics(a.camera);
    }
    cfg.acceptance_threshold = a.acceptance;
    const GrayImage gray = to_grayscale(read_pnm_file(a.image), cfg.gray);
    const auto dets = detect(gray, cfg, reg);
    emit(detections_json(a.image, dets).dump(2) + "\n", a.out, out);
    if (!a.annotate.empty()) {
        write_file(a.annotate, save_pnm(annotate(gray, dets)));
    }
    return kExitOk;
}

struct BoardArgs {
    std::string image;
    std::string board;
    std::string out;
};

int cmd_chessboard(const BoardArgs& a, std::ostream& out)
{
    const BoardSpec spec = parse_board(a.board);
    const GrayImage gray = to_grayscale(read_pnm_file(a.image));
    const CornerGrid grid = find_chessboard_corners(gray, spec);
    emit(chessboard_json(a.image, spec, grid).dump(2) + "\n", a.out, out);
    return kExitOk;
}

struct SynthArgs {
    std::string registry;
    std::string out;
    std::string scene;
    int random = 0;
    std::uint64_t seed = 1;
    bool verify = false;
    bool distractors_only = false;
    std::optional<double> max_noise;
    int markers = 0;
    int make_registry = 0;
    std::string board;
    double tilt = 0.0;
    double square = 40.0;
};

int verify_frames(const std::vector<SyntheticScene>& scenes, const std::vector<GrayImage>& frames,
                  const PatternRegistry& reg, std::ostream& out, std::ostream& err)
{
    int passed = 0;
    for (std::size_t i = 0; i < scenes.size(); ++i) {
        DetectConfig cfg;
        cfg.pattern_side = reg.side();
        cfg.camera = scenes[i].camera;
        const FrameCheck fc = check_frame(scenes[i].ground_truth, detect(frames[i], cfg, reg));
        if (fc.ok()) {
            ++passed;
        } else {
            err << frame_name(static_cast<int>(i)) << ": " << fc.summary() << "\n";
        }
    }
    out << "verify: " << passed << "/" << scenes.size() << " frames passed\n";
    return passed == static_cast<int>(scenes.size()) ? kExitOk : kExitVerifyFailed;
}

int cmd_synth(const SynthArgs& a, std::ostream& out, std::ostream& err)
{
    const fs::path dir = a.out;
    fs::create_directories(dir);

    if (!a.board.empty()) {
        const BoardSpec spec = parse_board(a.board);
        const ChessboardScene scene = make_board_scene(spec, a.square, a.tilt);
        write_file(dir / "board.pgm", save_pnm(render_chessboard(scene)));
        Json truth;
        truth["frame"] = "board.pgm";
        truth["board"] = Json::array({spec.board_width, spec.board_height});
        truth["corners"] = Json::array();
        for (const auto& p : chessboard_truth(scene)) {
            truth["corners"].push_back(to_json(p));
        }
        write_text_file(dir / "board_truth.json", truth.dump(2) + "\n");
        return kExitOk;
    }

    std::optional<PatternRegistry> reg;
    fs::path manifest;
    if (a.make_registry > 0) {
        reg = make_pattern_registry(a.make_registry, a.seed);
        manifest = save_registry(*reg, dir / "registry");
    } else if (!a.registry.empty()) {
        manifest = a.registry;
        reg = load_registry(manifest);
    }
    if (a.scene.empty() && a.random == 0) {
        if (a.make_registry > 0) {
            return kExitOk;
        }
        throw ParameterError("synth needs --scene, --random N, --board or --make-registry");
    }
    if (!reg) {
        throw ParameterError("synth needs --registry or --make-registry");
    }

    std::vector<SyntheticScene> scenes;
    if (!a.scene.empty()) {
        scenes.push_back(scene_from_json(parse_json_file(a.scene)));
    } else {
        Rng rng(a.seed);
        RandomSceneOptions opts;
        if (a.distractors_only) {
            opts.min_markers = opts.max_markers = 0;
        }
        if (a.max_noise) {
            opts.max_noise_sigma = *a.max_noise;
        }
        if (a.markers > 0) {
            opts.min_markers = opts.max_markers = a.markers;
            opts.max_side_px = 70.0;
        }
        for (int i = 0; i < a.random; ++i) {
            scenes.push_back(random_scene(*reg, rng, opts));
        }
    }

    Json truth;
    truth["seed"] = a.seed;
    truth["registry"] = fs::relative(fs::absolute(manifest), fs::absolute(dir)).generic_string();
    truth["camera"] = scenes.front().camera ? to_json(*scenes.front().camera) : Json(nullptr);
    truth["frames"] = Json::array();
    std::vector<GrayImage> frames;
    for (std::size_t i = 0; i < scenes.size(); ++i) {
        const std::string name = frame_name(static_cast<int>(i));
        frames.push_back(render_synthetic(scenes[i], *reg, scenes[i].noise_sigma));
        write_file(dir / name, save_pnm(frames.back()));
        truth["frames"].push_back(scene_truth_json(name, scenes[i]));
    }
    write_text_file(dir / "ground_truth.json", truth.dump(2) + "\n");
    return a.verify ? verify_frames(scenes, frames, *reg, out, err) : kExitOk;
}

struct BenchArgs {
    std::string corpus;
    std::string registry;
    std::string sizes;
    std::string out;
    int repeat = 5;
};

int cmd_bench(const BenchArgs& a, std::ostream& out)
{
    const fs::path dir = a.corpus;
    if (!fs::is_directory(dir)) {
        throw IoError("corpus directory " + dir.string() + " does not exist");
    }
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(dir)) {
        const auto ext = e.path().extension();
        if (e.is_regular_file() && (ext == ".pgm" || ext == ".ppm")) {
            files.push_back(e.path());
        }
    }
    if (files.empty()) {
        throw ParameterError("corpus " + dir.string() + " holds no PGM/PPM frames");
    }
    std::sort(files.begin(), files.end());
    fs::path manifest = a.registry;
    if (manifest.empty()) {
        manifest = fs::exists(dir / "registry" / "registry.json") ? dir / "registry" / "registry.json" : dir / "registry.json";
    }
    const PatternRegistry reg = load_registry(manifest);
    std::vector<GrayImage> frames;
    for (const auto& f : files) {
        frames.push_back(to_grayscale(read_pnm_file(f)));
    }
    std::vector<std::size_t> sizes;
    if (a.sizes.empty()) {
        for (std::size_t n = 1; n <= std::min<std::size_t>(16, reg.size()); ++n) {
            sizes.push_back(n);
        }
    } else {
        sizes = parse_sizes(a.sizes);
    }
    DetectConfig cfg;
    cfg.pattern_side = reg.side();
    emit(bench_csv(run_bench(frames, reg, sizes, cfg, a.repeat)), a.out, out);
    return kExitOk;
}

} // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Square fiducial marker and chessboard detection", "mf"};
    app.require_subcommand(1);

    DetectArgs da;
    auto* det = app.add_subcommand("detect", "Detect registered markers in a PGM/PPM frame");
    det->add_option("--image", da.image, "Input frame")->required();
    det->add_option("--registry", da.registry, "Registry manifest (JSON)")->required();
    det->add_option("--out", da.out, "Write detection JSON here instead of stdout");
    det->add_option("--annotate", da.annotate, "Write an annotated PPM");
    det->add_option("--threshold", da.threshold, "global:P or adaptive:W,C (default adaptive:31,7)");
    det->add_option("--camera", da.camera, "Camera intrinsics JSON; enables pose output");
    det->add_option("--acceptance", da.acceptance, "Minimum match score in (0, 1]");

    BoardArgs ba;
    auto* cb = app.add_subcommand("chessboard", "Find all inner corners of a chessboard");
    cb->add_option("--image", ba.image, "Input frame")->required();
    cb->add_option("--board", ba.board, "Inner corners as WxH")->required();
    cb->add_option("--out", ba.out, "Write JSON here instead of stdout");

    SynthArgs sa;
    auto* syn = app.add_subcommand("synth", "Render synthetic frames with ground truth");
    syn->add_option("--out", sa.out, "Output directory")->required();
    syn->add_option("--registry", sa.registry, "Registry manifest (JSON)");
    syn->add_option("--make-registry", sa.make_registry, "Generate N patterns into <out>/registry");
    auto* scene_opt = syn->add_option("--scene", sa.scene, "Scene description JSON");
    auto* random_opt = syn->add_option("--random", sa.random, "Number of random frames");
    scene_opt->excludes(random_opt);
    syn->add_option("--seed", sa.seed, "Generator seed (default 1)");
    syn->add_flag("--verify", sa.verify, "Run detection on the frames and check them against ground truth");
    syn->add_flag("--distractors-only", sa.distractors_only, "Random frames without markers");
    syn->add_option("--max-noise", sa.max_noise, "Largest noise sigma for random frames (default 8)");
    syn->add_option("--markers", sa.markers, "Markers per random frame (default 1 to 3)");
    syn->add_option("--board", sa.board, "Render a WxH chessboard instead of markers");
    syn->add_option("--tilt", sa.tilt, "Chessboard tilt in degrees");
    syn->add_option("--square", sa.square, "Chessboard square size in pixels (default 40)");

    BenchArgs be;
    auto* ben = app.add_subcommand("bench", "Time detection against growing registry prefixes");
    ben->add_option("--corpus", be.corpus, "Directory of PGM/PPM frames")->required();
    ben->add_option("--registry", be.registry, "Registry manifest (default: inside the corpus)");
    ben->add_option("--sizes", be.sizes, "Registry sizes, e.g. 1,2,4,8,16 or 1-16 (default 1-16)");
    ben->add_option("--repeat", be.repeat, "Repetitions per size (default 5)");
    ben->add_option("--out", be.out, "Write CSV here instead of stdout");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return kExitUsage;
    }

    try {
        if (det->parsed()) {
            return cmd_detect(da, out);
        }
        if (cb->parsed()) {
            return cmd_chessboard(ba, out);
        }
        if (syn->parsed()) {
            return cmd_synth(sa, out, err);
        }
        return cmd_bench(be, out);
    } catch (const NotFoundError& e) {
        err << "mf: " << e.what() << "\n";
        return kExitNotFound;
    } catch (const std::exception& e) {
        err << "mf: " << e.what() << "\n";
        return kExitUsage;
    }
}

} // namespace mf
