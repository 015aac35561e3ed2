#pragma once

#include <array>
#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "svs/grid.hpp"

namespace svs {

/// Evaluation window as fractions of the image: rows [top*H, bottom*H), cols [left*W, right*W).
struct CropRect {
    double top = 0.0;
    double bottom = 1.0;
    double left = 0.0;
    double right = 1.0;
};

struct EvalConfig {
    double cap_min_m = 0.0;
    double cap_max_m = 80.0;
    CropRect crop;
    std::vector<double> thresholds{1.25, 1.25 * 1.25, 1.25 * 1.25 * 1.25};

    bool is_valid() const;
};

struct EvalReport {
    double ard = 0;
    double srd = 0;
    double rmse = 0;
    double rmse_log = 0;
    std::vector<double> accuracy;
    long pixel_count = 0;
    std::optional<double> d1;
    std::optional<double> psnr_db;
};

/// Predicted and ground-truth depths of the pixels that survive the cap and crop.
struct PairedSamples {
    Eigen::ArrayXd pred;
    Eigen::ArrayXd gt;
};

/// Z = f * B / d. Invalid or non-positive disparities give invalid depth.
template <typename Scalar>
DepthMap<Scalar> disparity_to_depth(const DisparityMap<Scalar>& disp, const CameraRig<Scalar>& rig) {
    detail::require(rig.is_valid(), ErrorCode::InvalidArgument, "camera rig needs positive focal length and baseline");
    const Scalar fb = rig.focal_px * rig.baseline_m;
    Mask valid = disp.valid && (disp.values > Scalar(0));
    Plane<Scalar> depth = valid.select(fb / disp.values, Scalar(0));
    return DepthMap<Scalar>(std::move(depth), std::move(valid));
}

/// d = f * B / Z. Invalid or non-positive depths give invalid disparity.
template <typename Scalar>
DisparityMap<Scalar> depth_to_disparity(const DepthMap<Scalar>& depth, const CameraRig<Scalar>& rig) {
    detail::require(rig.is_valid(), ErrorCode::InvalidArgument, "camera rig needs positive focal length and baseline");
    const Scalar fb = rig.focal_px * rig.baseline_m;
    Mask valid = depth.valid && (depth.values > Scalar(0));
    Plane<Scalar> disp = valid.select(fb / depth.values, Scalar(0));
    return DisparityMap<Scalar>(std::move(disp), std::move(valid));
}

/// Row and column bounds [begin, end) of the crop for an H x W image.
struct CropBounds {
    Index row_begin, row_end, col_begin, col_end;
};
CropBounds crop_bounds(const CropRect& crop, Index height, Index width);

/// Keeps pixels inside the crop where both maps are valid and the ground truth lies in
/// [cap_min, cap_max]. Surviving predictions are clamped into the cap range.
/// Throws EmptySelection when nothing survives.
PairedSamples apply_cap_and_crop(const DepthMap<double>& pred, const DepthMap<double>& gt, const EvalConfig& cfg);

/// ARD, SRD, RMSE, RMSE(log) (natural log) and threshold accuracies over paired samples.
EvalReport compute_metrics(const PairedSamples& samples, const EvalConfig& cfg);

/// Fraction of jointly valid pixels whose error exceeds both tol_px and tol_rel * gt.
double compute_d1(const DisparityMap<double>& pred, const DisparityMap<double>& gt, double tol_px = 3.0,
                  double tol_rel = 0.05);

struct ErrorColor {
    double upper;  // normalized error below which this color applies
    std::array<unsigned char, 3> rgb;
};

/// Logarithmic blue-to-red ramp. Each bin doubles the previous one; the error is
/// normalized as min(err / 3, err / (0.05 * gt)), so 1.0 marks the D1 boundary.
std::span<const ErrorColor> error_color_table();

/// Colors each jointly valid pixel by its disparity error; everything else is black.
ImageGrid<double> render_error_map(const DisparityMap<double>& pred, const DisparityMap<double>& gt);

/// JSON object with snake_case keys; absent optionals are written as null.
std::string to_json(const EvalReport& report, int indent = 2);

}  // namespace svs
