#include "svs/pipeline.hpp"

#include <fstream>
#include <utility>

#include "report_json.hpp"
#include "svs/io.hpp"

namespace svs {

namespace fs = std::filesystem;

namespace {

template <typename F>
auto stage(const char* name, F&& fn) -> decltype(fn()) {
    try {
        return fn();
    } catch (const StageError&) {
        throw;
    } catch (const Error& e) {
        throw StageError(name, e);
    }
}

const char* metric_name(MatchMetric m) { return m == MatchMetric::SAD ? "SAD" : "SSD"; }

detail::Json config_json(const RunManifest& m) {
    using detail::Json;
    Json inputs;
    const auto path_or_null = [](const std::optional<fs::path>& p) { return p ? Json(p->generic_string()) : Json(nullptr); };
    inputs["left"] = path_or_null(m.left_path);
    inputs["right"] = path_or_null(m.right_path);
    inputs["gt_disparity"] = path_or_null(m.gt_disparity_path);
    inputs["gt_depth"] = path_or_null(m.gt_depth_path);
    if (m.scene) {
        Json scene;
        scene["kind"] = std::string(to_string(*m.scene));
        scene["width"] = m.scene_width;
        scene["height"] = m.scene_height;
        scene["channels"] = m.scene_params.channels;
        scene["constant_disparity"] = m.scene_params.constant_disparity;
        scene["slant_from"] = m.scene_params.slant_from;
        scene["slant_to"] = m.scene_params.slant_to;
        scene["background_disparity"] = m.scene_params.background_disparity;
        scene["foreground_disparity"] = m.scene_params.foreground_disparity;
        inputs["scene"] = scene;
    }

    Json j;
    j["inputs"] = inputs;
    j["seed"] = m.seed;
    j["rig"] = {{"focal_px", m.rig.focal_px}, {"baseline_m", m.rig.baseline_m}};
    j["num_levels"] = m.num_levels;
    j["optimizer"] = {{"iterations", m.optimizer.iterations},
                      {"step_size", m.optimizer.step_size},
                      {"init", m.optimizer.init == OptimizerConfig::Init::uniform ? "uniform" : "zero-logit"},
                      {"max_halvings", m.optimizer.max_halvings}};
    j["matcher"] = {{"window_radius", m.matcher.window_radius},
                    {"max_disparity", m.matcher.max_disparity},
                    {"metric", metric_name(m.matcher.metric)},
                    {"subpixel", m.matcher.subpixel},
                    {"uniqueness_ratio", m.matcher.uniqueness_ratio}};
    j["eval"] = {{"cap_min_m", m.eval.cap_min_m},
                 {"cap_max_m", m.eval.cap_max_m},
                 {"crop", {m.eval.crop.top, m.eval.crop.bottom, m.eval.crop.left, m.eval.crop.right}},
                 {"thresholds", m.eval.thresholds}};
    return j;
}

}  // namespace

void RunManifest::validate() const {
    const bool from_files = left_path.has_value() || right_path.has_value();
    detail::require(from_files != scene.has_value(), ErrorCode::InvalidArgument,
                    "give either left/right image paths or a synthetic scene kind");
    if (from_files) {
        detail::require(left_path && right_path, ErrorCode::InvalidArgument, "both left and right paths are required");
        for (const auto* p : {&left_path, &right_path, &gt_disparity_path, &gt_depth_path})
            if (p->has_value() && !fs::exists(**p))
                detail::fail(ErrorCode::Io, "input does not exist: " + (*p)->string());
    }
    detail::require(!(gt_disparity_path && gt_depth_path), ErrorCode::InvalidArgument,
                    "give at most one ground truth (disparity or depth)");
    detail::require(rig.is_valid(), ErrorCode::InvalidArgument, "camera rig needs positive focal length and baseline");
    detail::require(num_levels >= 1, ErrorCode::InvalidArgument, "num_levels must be positive");
    detail::require(optimizer.is_valid(), ErrorCode::InvalidArgument, "invalid optimizer config");
    detail::require(matcher.is_valid(), ErrorCode::InvalidArgument, "invalid block matching config");
    detail::require(eval.is_valid(), ErrorCode::InvalidArgument, "invalid evaluation config");
}

EvalReport evaluate_depth(const DepthMap<double>& pred, const DepthMap<double>& gt, const EvalConfig& cfg) {
    return compute_metrics(apply_cap_and_crop(pred, gt, cfg), cfg);
}

EvalReport evaluate_disparity(const DisparityMap<double>& pred, const DisparityMap<double>& gt,
                              const CameraRig<double>& rig, const EvalConfig& cfg) {
    EvalReport r = evaluate_depth(disparity_to_depth(pred, rig), disparity_to_depth(gt, rig), cfg);
    r.d1 = compute_d1(pred, gt);
    return r;
}

PipelineResult run_pipeline(const RunManifest& m) {
    stage("manifest", [&] { m.validate(); });

    struct Inputs {
        ImageGrid<double> left, right;
        std::optional<DisparityMap<double>> gt;
    };
    Inputs in = stage("load", [&] {
        Inputs r;
        if (m.scene) {
            SyntheticScene s = gen_scene(m.scene_width, m.scene_height, *m.scene, m.seed, m.scene_params);
            r = {std::move(s.left), std::move(s.right), std::move(s.gt_disparity)};
        } else {
            r.left = load_image(*m.left_path);
            r.right = load_image(*m.right_path);
            detail::require_same_shape(r.left, r.right, "left and right images differ in shape");
            if (m.gt_disparity_path) r.gt = load_disparity(*m.gt_disparity_path);
            if (m.gt_depth_path) r.gt = depth_to_disparity(load_depth(*m.gt_depth_path), m.rig);
            if (r.gt)
                detail::require(r.gt->height() == r.left.height() && r.gt->width() == r.left.width(),
                                ErrorCode::ShapeMismatch, "ground truth and images differ in shape");
        }
        return r;
    });

    PipelineResult res;
    const auto opt = stage("optimize", [&] { return optimize_volume(in.left, in.right, m.num_levels, m.optimizer); });
    res.loss_trace = opt.loss_trace;
    stage("synthesize", [&] {
        res.synthesized_right = selection_forward(in.left, opt.volume);
        res.psnr_db = psnr(res.synthesized_right, in.right);
        res.primitive_disparity = expected_disparity(opt.volume);
    });
    res.final_disparity = stage("match", [&] { return block_match(in.left, res.synthesized_right, m.matcher); });
    const DepthMap<double> depth = stage("geometry", [&] { return disparity_to_depth(res.final_disparity, m.rig); });

    if (in.gt) {
        stage("evaluate", [&] {
            res.primitive = evaluate_disparity(res.primitive_disparity, *in.gt, m.rig, m.eval);
            res.primitive->psnr_db = res.psnr_db;
            res.final = evaluate_disparity(res.final_disparity, *in.gt, m.rig, m.eval);
        });
        res.gt_disparity = std::move(in.gt);
    }

    stage("write", [&] {
        std::error_code ec;
        fs::create_directories(m.output_dir, ec);
        if (ec) detail::fail(ErrorCode::Io, "cannot create " + m.output_dir.string() + ": " + ec.message());
        save_image(res.synthesized_right, m.output_dir / artifacts::kSynthRight);
        save_float_map(res.primitive_disparity, m.output_dir / artifacts::kPrimitiveDisp);
        save_float_map(res.final_disparity, m.output_dir / artifacts::kFinalDisp);
        save_float_map(depth, m.output_dir / artifacts::kDepth);
        if (res.gt_disparity)
            save_image(render_error_map(res.final_disparity, *res.gt_disparity), m.output_dir / artifacts::kErrorMap);
        std::ofstream out(m.output_dir / artifacts::kReport, std::ios::binary | std::ios::trunc);
        out << report_json(m, res) << '\n';
        if (!out) detail::fail(ErrorCode::Io, "cannot write report.json");
    });
    return res;
}

std::string report_json(const RunManifest& m, const PipelineResult& r) {
    using detail::Json;
    Json j;
    if (r.primitive) j["primitive"] = detail::eval_report_json(*r.primitive);
    if (r.final) j["final"] = detail::eval_report_json(*r.final);
    j["psnr_db"] = detail::json_number(r.psnr_db);
    j["config"] = config_json(m);
    j["versions"] = {{"svs", kVersion},
                     {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                                   std::to_string(EIGEN_MINOR_VERSION)},
                     {"report_schema", 1}};
    return j.dump(2);
}

}  // namespace svs
