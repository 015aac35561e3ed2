#include "svs/geomeval.hpp"

#include <algorithm>
#include <limits>

#include "report_json.hpp"

namespace svs {

bool EvalConfig::is_valid() const {
    const auto in_unit = [](double v) { return v >= 0.0 && v <= 1.0; };
    return std::isfinite(cap_min_m) && std::isfinite(cap_max_m) && cap_min_m >= 0.0 && cap_min_m < cap_max_m &&
           in_unit(crop.top) && in_unit(crop.bottom) && in_unit(crop.left) && in_unit(crop.right) &&
           crop.top < crop.bottom && crop.left < crop.right && !thresholds.empty() &&
           std::all_of(thresholds.begin(), thresholds.end(), [](double t) { return t > 1.0; });
}

CropBounds crop_bounds(const CropRect& crop, Index height, Index width) {
    const auto at = [](double frac, Index n) {
        return std::clamp<Index>(static_cast<Index>(std::floor(frac * static_cast<double>(n))), 0, n);
    };
    return {at(crop.top, height), at(crop.bottom, height), at(crop.left, width), at(crop.right, width)};
}

PairedSamples apply_cap_and_crop(const DepthMap<double>& pred, const DepthMap<double>& gt, const EvalConfig& cfg) {
    detail::require(pred.same_shape(gt), ErrorCode::ShapeMismatch, "prediction and ground truth differ in shape");
    detail::require(cfg.is_valid(), ErrorCode::InvalidArgument, "invalid evaluation config");
    const CropBounds b = crop_bounds(cfg.crop, gt.height(), gt.width());

    std::vector<double> p, g;
    for (Index i = b.row_begin; i < b.row_end; ++i)
        for (Index j = b.col_begin; j < b.col_end; ++j) {
            if (!gt.valid(i, j) || !pred.valid(i, j)) continue;
            const double z = gt.values(i, j);
            if (z < cfg.cap_min_m || z > cfg.cap_max_m) continue;
            g.push_back(z);
            p.push_back(std::clamp(pred.values(i, j), cfg.cap_min_m, cfg.cap_max_m));
        }
    if (g.empty()) detail::fail(ErrorCode::EmptySelection, "no pixels survive the cap and crop");
    return {Eigen::Map<Eigen::ArrayXd>(p.data(), static_cast<Index>(p.size())),
            Eigen::Map<Eigen::ArrayXd>(g.data(), static_cast<Index>(g.size()))};
}

EvalReport compute_metrics(const PairedSamples& s, const EvalConfig& cfg) {
    detail::require(s.pred.size() == s.gt.size(), ErrorCode::ShapeMismatch, "sample lists differ in length");
    detail::require(s.gt.size() > 0, ErrorCode::EmptySelection, "no samples to evaluate");
    detail::require((s.pred > 0.0).all() && (s.gt > 0.0).all() && s.pred.allFinite() && s.gt.allFinite(),
                    ErrorCode::InvalidArgument, "depths must be finite and positive");

    const auto n = static_cast<double>(s.gt.size());
    const Eigen::ArrayXd diff = s.pred - s.gt;
    const Eigen::ArrayXd log_diff = s.pred.log() - s.gt.log();
    const Eigen::ArrayXd ratio = (s.pred / s.gt).max(s.gt / s.pred);

    EvalReport r;
    r.ard = (diff.abs() / s.gt).sum() / n;
    r.srd = (diff.square() / s.gt).sum() / n;
    r.rmse = std::sqrt(diff.square().sum() / n);
    r.rmse_log = std::sqrt(log_diff.square().sum() / n);
    for (double t : cfg.thresholds) r.accuracy.push_back(static_cast<double>((ratio < t).count()) / n);
    r.pixel_count = static_cast<long>(s.gt.size());
    return r;
}

double compute_d1(const DisparityMap<double>& pred, const DisparityMap<double>& gt, double tol_px, double tol_rel) {
    detail::require(pred.same_shape(gt), ErrorCode::ShapeMismatch, "prediction and ground truth differ in shape");
    const Mask both = pred.valid && gt.valid;
    const Index n = both.count();
    if (n == 0) detail::fail(ErrorCode::EmptySelection, "no jointly valid pixels for D1");
    const Plane<double> err = (pred.values - gt.values).abs();
    const Mask bad = both && (err > tol_px) && (err > tol_rel * gt.values);
    return static_cast<double>(bad.count()) / static_cast<double>(n);
}

std::span<const ErrorColor> error_color_table() {
    // Bins follow the KITTI log-color scheme; the red channel is held non-decreasing
    // so a larger error never looks less red.
    static constexpr double inf = std::numeric_limits<double>::infinity();
    static const std::array<ErrorColor, 10> table{{
        {0.0625, {49, 54, 149}},
        {0.125, {69, 117, 180}},
        {0.25, {116, 173, 209}},
        {0.5, {171, 217, 233}},
        {1.0, {224, 243, 248}},
        {2.0, {254, 224, 144}},
        {4.0, {254, 174, 97}},
        {8.0, {254, 109, 67}},
        {16.0, {254, 48, 39}},
        {inf, {254, 0, 38}},
    }};
    return table;
}

ImageGrid<double> render_error_map(const DisparityMap<double>& pred, const DisparityMap<double>& gt) {
    detail::require(pred.same_shape(gt), ErrorCode::ShapeMismatch, "prediction and ground truth differ in shape");
    const auto table = error_color_table();
    ImageGrid<double> out(gt.height(), gt.width(), 3);
    for (Index i = 0; i < gt.height(); ++i)
        for (Index j = 0; j < gt.width(); ++j) {
            if (!pred.valid(i, j) || !gt.valid(i, j)) continue;
            const double err = std::abs(pred.values(i, j) - gt.values(i, j));
            const double norm = err == 0.0 ? 0.0 : std::min(err / 3.0, err / (0.05 * gt.values(i, j)));
            const auto it = std::find_if(table.begin(), table.end(), [&](const ErrorColor& e) { return norm < e.upper; });
            const auto& rgb = (it == table.end() ? table.back() : *it).rgb;
            for (Index c = 0; c < 3; ++c) out(i, j, c) = static_cast<double>(rgb[static_cast<std::size_t>(c)]) / 255.0;
        }
    return out;
}

std::string to_json(const EvalReport& r, int indent) { return detail::eval_report_json(r).dump(indent); }

}  // namespace svs
