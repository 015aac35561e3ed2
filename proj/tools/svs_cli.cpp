// svs: command-line driver for view synthesis, stereo matching and depth evaluation.
//
//   svs gen    --kind two-layer --seed 3 --out scene/
//   svs run    --left scene/left.ppm --right scene/right.ppm --gt-disparity scene/gt_disp.pfm --out run/
//   svs run    --scene constant-plane --seed 1 --out run/
//   svs run    --manifest run.cfg --threads 4
//   svs eval   --pred depth.pfm --gt gt_depth.pfm --cap-max 50 --cap-min 1
//   svs match  --left l.ppm --right r.ppm --out disp.pfm
//   svs synth  --left l.ppm --disparity d.pfm --out synth.ppm

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "svs/io.hpp"
#include "svs/parallel.hpp"
#include "svs/pipeline.hpp"

namespace fs = std::filesystem;
using namespace svs;

namespace {

struct BlockMatchFlags {
    std::string metric = "SAD";
    BlockMatchConfig cfg;

    void add(CLI::App* app) {
        app->add_option("--window-radius", cfg.window_radius, "Matching window radius")->capture_default_str();
        app->add_option("--max-disparity", cfg.max_disparity, "Largest disparity searched")->capture_default_str();
        app->add_option("--metric", metric, "SAD or SSD")->check(CLI::IsMember({"SAD", "SSD"}))->capture_default_str();
        app->add_flag("--subpixel", cfg.subpixel, "Parabola refinement of the winner");
        app->add_option("--uniqueness", cfg.uniqueness_ratio, "Uniqueness ratio (>= 1)")->capture_default_str();
    }

    BlockMatchConfig resolve() const {
        BlockMatchConfig c = cfg;
        c.metric = metric == "SSD" ? MatchMetric::SSD : MatchMetric::SAD;
        return c;
    }
};

struct EvalFlags {
    EvalConfig cfg;
    std::vector<double> crop{0.0, 1.0, 0.0, 1.0};

    void add(CLI::App* app) {
        app->add_option("--cap-min", cfg.cap_min_m, "Smallest ground-truth depth scored [m]")->capture_default_str();
        app->add_option("--cap-max", cfg.cap_max_m, "Largest ground-truth depth scored [m]")->capture_default_str();
        app->add_option("--crop", crop, "Crop fractions: top bottom left right")->expected(4)->delimiter(',');
        app->add_option("--thresholds", cfg.thresholds, "Accuracy thresholds")->delimiter(',');
    }

    EvalConfig resolve() const {
        EvalConfig c = cfg;
        c.crop = {crop[0], crop[1], crop[2], crop[3]};
        return c;
    }
};

struct RigFlags {
    CameraRig<double> rig;

    void add(CLI::App* app) {
        app->add_option("--focal", rig.focal_px, "Focal length [px]")->capture_default_str();
        app->add_option("--baseline", rig.baseline_m, "Stereo baseline [m]")->capture_default_str();
    }
};

struct SceneFlags {
    std::string kind = "constant-plane";
    Index width = 128;
    Index height = 64;
    SceneParams params;

    void add(CLI::App* app, bool with_kind) {
        if (with_kind)
            app->add_option("--kind", kind, "constant-plane, slanted-plane or two-layer")->capture_default_str();
        app->add_option("--width", width, "Scene width [px]")->capture_default_str();
        app->add_option("--height", height, "Scene height [px]")->capture_default_str();
        app->add_option("--channels", params.channels, "1 or 3")->capture_default_str();
        app->add_option("--disparity", params.constant_disparity, "constant-plane disparity")->capture_default_str();
        app->add_option("--slant-from", params.slant_from, "slanted-plane disparity at column 0")->capture_default_str();
        app->add_option("--slant-to", params.slant_to, "slanted-plane disparity at the last column")->capture_default_str();
        app->add_option("--bg", params.background_disparity, "two-layer background disparity")->capture_default_str();
        app->add_option("--fg", params.foreground_disparity, "two-layer foreground disparity")->capture_default_str();
    }
};

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

// Splices a `run --manifest FILE` key=value file into the argument list. Each entry
// becomes --key=value unless the same flag already appears on the command line.
std::vector<std::string> expand_manifest(std::vector<std::string> args) {
    const auto run_at = std::find(args.begin(), args.end(), "run");
    if (run_at == args.end()) return args;
    const auto flag = std::find(run_at, args.end(), "--manifest");
    if (flag == args.end() || flag + 1 == args.end()) return args;
    const std::string file = *(flag + 1);
    const auto run_pos = run_at - args.begin();
    args.erase(flag, flag + 2);

    std::ifstream in(file);
    if (!in) throw Error(ErrorCode::Io, "cannot open manifest " + file);
    std::vector<std::string> injected;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        line = trim(line);
        if (line.empty() || line[0] == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw Error(ErrorCode::MalformedHeader, file + ":" + std::to_string(lineno) + ": expected key=value");
        const std::string key = "--" + trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        const bool overridden = std::any_of(args.begin() + run_pos, args.end(), [&](const std::string& a) {
            return a == key || a.rfind(key + "=", 0) == 0;
        });
        if (!overridden) injected.push_back(key + "=" + value);
    }
    args.insert(args.begin() + run_pos + 1, injected.begin(), injected.end());
    return args;
}

void print_error(const Error& e) {
    if (const auto* s = dynamic_cast<const StageError*>(&e))
        std::cerr << "svs: stage " << s->stage() << " failed [" << to_string(e.code()) << "]: " << e.what() << '\n';
    else
        std::cerr << "svs: error [" << to_string(e.code()) << "]: " << e.what() << '\n';
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Single-view stereo toolkit: view synthesis, block matching, depth evaluation", "svs"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kVersion);
    int threads = 1;
    app.add_option("--threads", threads, "Worker threads for row-parallel kernels (0 = all cores)")
        ->capture_default_str();

    // gen
    auto* gen = app.add_subcommand("gen", "Write a synthetic stereo scene (left.ppm, right.ppm, gt_disp.pfm)");
    SceneFlags gen_scene_flags;
    gen_scene_flags.add(gen, true);
    std::uint64_t gen_seed = 0;
    std::string gen_out = ".";
    gen->add_option("--seed", gen_seed, "Texture seed")->capture_default_str();
    gen->add_option("--out", gen_out, "Output directory")->capture_default_str();

    // run
    auto* run = app.add_subcommand("run", "Full pipeline: synthesize, match, convert to depth, evaluate");
    std::string manifest_unused;
    run->add_option("--manifest", manifest_unused, "key=value manifest; command-line flags override it");
    std::string left, right, gt_disp, gt_depth, scene_kind, run_out = ".";
    SceneFlags run_scene_flags;
    RigFlags run_rig;
    BlockMatchFlags run_bm;
    EvalFlags run_eval;
    OptimizerConfig opt;
    std::string init = "zero-logit";
    Index levels = DisparityVolume<double>::kDefaultLevels;
    std::uint64_t run_seed = 0;
    run->add_option("--left", left, "Left image (PPM/PGM)");
    run->add_option("--right", right, "Right image (PPM/PGM)");
    run->add_option("--gt-disparity", gt_disp, "Ground-truth disparity (PFM)");
    run->add_option("--gt-depth", gt_depth, "Ground-truth depth (PFM)");
    run->add_option("--scene", scene_kind, "Generate a synthetic scene instead of reading images")
        ->check(CLI::IsMember({"constant-plane", "slanted-plane", "two-layer"}));
    run_scene_flags.add(run, false);
    run->add_option("--seed", run_seed, "Scene seed")->capture_default_str();
    run->add_option("--levels", levels, "Disparity levels in the synthesis volume")->capture_default_str();
    run->add_option("--iterations", opt.iterations, "Optimizer iterations")->capture_default_str();
    run->add_option("--step", opt.step_size, "Optimizer step size (per-pixel loss)")->capture_default_str();
    run->add_option("--max-halvings", opt.max_halvings, "Step halvings per iteration")->capture_default_str();
    run->add_option("--init", init, "uniform or zero-logit")
        ->check(CLI::IsMember({"uniform", "zero-logit"}))
        ->capture_default_str();
    run_rig.add(run);
    run_bm.add(run);
    run_eval.add(run);
    run->add_option("--out", run_out, "Output directory")->capture_default_str();

    // eval
    auto* eval = app.add_subcommand("eval", "Score a predicted map against ground truth; prints JSON");
    std::string pred_path, gt_path, maps = "depth";
    RigFlags eval_rig;
    EvalFlags eval_flags;
    eval->add_option("--pred", pred_path, "Predicted map (PFM)")->required();
    eval->add_option("--gt", gt_path, "Ground-truth map (PFM)")->required();
    eval->add_option("--maps", maps, "Map kind: depth or disparity")
        ->check(CLI::IsMember({"depth", "disparity"}))
        ->capture_default_str();
    eval_rig.add(eval);
    eval_flags.add(eval);

    // match
    auto* match = app.add_subcommand("match", "Block matching only");
    std::string match_left, match_right, match_out = "disp.pfm";
    BlockMatchFlags match_bm;
    match->add_option("--left", match_left, "Left image")->required();
    match->add_option("--right", match_right, "Right image")->required();
    match->add_option("--out", match_out, "Output disparity (PFM)")->capture_default_str();
    match_bm.add(match);

    // synth
    auto* synth = app.add_subcommand("synth", "Synthesize the right view from a volume or a disparity map");
    std::string synth_left, synth_volume, synth_disp, synth_out = "synth.ppm";
    Index synth_levels = DisparityVolume<double>::kDefaultLevels;
    synth->add_option("--left", synth_left, "Left image")->required();
    auto* vol_opt = synth->add_option("--volume", synth_volume, "Volume PFM (levels stacked vertically)");
    auto* disp_opt = synth->add_option("--disparity", synth_disp, "Disparity PFM, used as a one-hot volume");
    vol_opt->excludes(disp_opt);
    synth->add_option("--levels", synth_levels, "Number of disparity levels")->capture_default_str();
    synth->add_option("--out", synth_out, "Output image")->capture_default_str();

    std::vector<std::string> args;
    try {
        args = expand_manifest(std::vector<std::string>(argv + 1, argv + argc));
    } catch (const Error& e) {
        print_error(e);
        return 2;
    }
    std::reverse(args.begin(), args.end());  // CLI11 consumes a reversed vector
    try {
        app.parse(args);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }
    set_num_threads(threads);

    try {
        if (*gen) {
            const auto s = gen_scene(gen_scene_flags.width, gen_scene_flags.height,
                                     parse_scene_kind(gen_scene_flags.kind), gen_seed, gen_scene_flags.params);
            fs::create_directories(gen_out);
            save_image(s.left, fs::path(gen_out) / "left.ppm");
            save_image(s.right, fs::path(gen_out) / "right.ppm");
            save_float_map(s.gt_disparity, fs::path(gen_out) / "gt_disp.pfm");
        } else if (*run) {
            RunManifest m;
            if (!left.empty()) m.left_path = left;
            if (!right.empty()) m.right_path = right;
            if (!gt_disp.empty()) m.gt_disparity_path = gt_disp;
            if (!gt_depth.empty()) m.gt_depth_path = gt_depth;
            if (!scene_kind.empty()) m.scene = parse_scene_kind(scene_kind);
            m.scene_width = run_scene_flags.width;
            m.scene_height = run_scene_flags.height;
            m.scene_params = run_scene_flags.params;
            m.rig = run_rig.rig;
            m.num_levels = levels;
            m.optimizer = opt;
            m.optimizer.init = init == "uniform" ? OptimizerConfig::Init::uniform : OptimizerConfig::Init::zero_logit;
            m.matcher = run_bm.resolve();
            m.eval = run_eval.resolve();
            m.output_dir = run_out;
            m.seed = run_seed;
            const auto result = run_pipeline(m);
            std::cout << report_json(m, result) << '\n';
        } else if (*eval) {
            const EvalConfig cfg = eval_flags.resolve();
            EvalReport r;
            if (maps == "depth") {
                const auto pred = load_depth(pred_path);
                const auto gt = load_depth(gt_path);
                r = evaluate_depth(pred, gt, cfg);
            } else {
                const auto pred = load_disparity(pred_path);
                const auto gt = load_disparity(gt_path);
                r = evaluate_disparity(pred, gt, eval_rig.rig, cfg);
            }
            std::cout << to_json(r) << '\n';
        } else if (*match) {
            const auto l = load_image(match_left);
            const auto r = load_image(match_right);
            save_float_map(block_match(l, r, match_bm.resolve()), match_out);
        } else if (*synth) {
            const auto l = load_image(synth_left);
            DisparityVolume<double> vol;
            if (!synth_volume.empty()) {
                vol = load_volume(synth_volume, synth_levels);
            } else if (!synth_disp.empty()) {
                const auto d = load_disparity(synth_disp);
                std::vector<Plane<double>> lv(static_cast<std::size_t>(synth_levels), Plane<double>::Zero(d.height(), d.width()));
                for (Index i = 0; i < d.height(); ++i)
                    for (Index j = 0; j < d.width(); ++j) {
                        const Index k = d.valid(i, j) ? std::min<Index>(std::llround(d.values(i, j)), synth_levels - 1) : 0;
                        lv[static_cast<std::size_t>(k)](i, j) = 1.0;
                    }
                vol = DisparityVolume<double>(std::move(lv));
            } else {
                throw Error(ErrorCode::InvalidArgument, "synth needs --volume or --disparity");
            }
            save_image(selection_forward(l, vol), synth_out);
        }
    } catch (const Error& e) {
        print_error(e);
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "svs: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
