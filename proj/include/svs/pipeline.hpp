#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "svs/geomeval.hpp"
#include "svs/scene.hpp"
#include "svs/stereomatch.hpp"
#include "svs/viewsynth.hpp"

namespace svs {

inline constexpr const char* kVersion = "0.1.0";

/// Everything one pipeline run needs. Inputs come either from files (left/right and an
/// optional ground truth) or, when `scene` is set, from gen_scene with `seed`.
struct RunManifest {
    std::optional<std::filesystem::path> left_path;
    std::optional<std::filesystem::path> right_path;
    std::optional<std::filesystem::path> gt_disparity_path;
    std::optional<std::filesystem::path> gt_depth_path;

    std::optional<SceneKind> scene;
    Index scene_width = 128;
    Index scene_height = 64;
    SceneParams scene_params;

    CameraRig<double> rig;
    Index num_levels = DisparityVolume<double>::kDefaultLevels;
    OptimizerConfig optimizer;
    BlockMatchConfig matcher;
    EvalConfig eval;
    std::filesystem::path output_dir = ".";
    std::uint64_t seed = 0;

    void validate() const;
};

/// What run_pipeline produced, alongside the files it wrote.
struct PipelineResult {
    std::optional<EvalReport> primitive;  // scored expected disparity of the synthesis volume
    std::optional<EvalReport> final;      // scored block-matching disparity
    double psnr_db = 0;                   // synthesized vs. true right view
    std::vector<double> loss_trace;
    DisparityMap<double> primitive_disparity;
    DisparityMap<double> final_disparity;
    std::optional<DisparityMap<double>> gt_disparity;
    ImageGrid<double> synthesized_right;
};

/// File names written into the output directory.
namespace artifacts {
inline constexpr const char* kReport = "report.json";
inline constexpr const char* kSynthRight = "synth_right.ppm";
inline constexpr const char* kPrimitiveDisp = "primitive_disp.pfm";
inline constexpr const char* kFinalDisp = "final_disp.pfm";
inline constexpr const char* kDepth = "depth.pfm";
inline constexpr const char* kErrorMap = "error_map.ppm";
}  // namespace artifacts

/// optimize volume -> synthesize right view -> expected (primitive) disparity ->
/// block matching on (left, synthesized right) -> depth -> metrics.
/// Failures are rethrown as StageError naming the stage.
PipelineResult run_pipeline(const RunManifest& manifest);

/// report.json contents: {"primitive", "final", "psnr_db", "config", "versions"}.
/// The metric blocks are omitted when no ground truth was supplied.
std::string report_json(const RunManifest& manifest, const PipelineResult& result);

/// Metrics for externally produced maps. With disparity inputs the maps are converted
/// to depth through `rig` and D1 is reported as well.
EvalReport evaluate_depth(const DepthMap<double>& pred, const DepthMap<double>& gt, const EvalConfig& cfg);
EvalReport evaluate_disparity(const DisparityMap<double>& pred, const DisparityMap<double>& gt,
                              const CameraRig<double>& rig, const EvalConfig& cfg);

}  // namespace svs
