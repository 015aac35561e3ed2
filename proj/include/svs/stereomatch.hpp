#pragma once

#include <cmath>
#include <limits>
#include <vector>

#include "svs/grid.hpp"
#include "svs/parallel.hpp"

namespace svs {

/// Which direction of a cost volume is better.
enum class CostPolarity {
    similarity,  // higher is better (correlation)
    cost,        // lower is better (SAD, SSD)
};

template <typename Scalar = double>
struct CostVolume {
    LevelStack<Scalar> costs;  // one H x W plane per disparity 0..num_disp-1
    CostPolarity polarity = CostPolarity::cost;

    Index num_disp() const { return static_cast<Index>(costs.size()); }
    Index height() const { return costs.empty() ? 0 : costs[0].rows(); }
    Index width() const { return costs.empty() ? 0 : costs[0].cols(); }
};

enum class MatchMetric { SAD, SSD };

struct BlockMatchConfig {
    int window_radius = 5;
    int max_disparity = 64;
    MatchMetric metric = MatchMetric::SAD;
    bool subpixel = false;
    double uniqueness_ratio = 1.05;

    bool is_valid() const { return window_radius >= 1 && max_disparity >= 1 && uniqueness_ratio >= 1.0; }
};

/// Luma plane (0.299 R + 0.587 G + 0.114 B); single-channel images pass through.
template <typename Scalar>
Plane<Scalar> to_gray(const ImageGrid<Scalar>& image) {
    if (image.channels() == 1) return image.channel(0);
    return Scalar(0.299) * image.channel(0) + Scalar(0.587) * image.channel(1) + Scalar(0.114) * image.channel(2);
}

/// Horizontal correlation: costs(i, j, d) = mean_c left(i, j, c) * right(i, j - d, c)
/// for d in [0, max_disp]; positions with j - d < 0 score 0.
template <typename Scalar>
CostVolume<Scalar> correlation_1d(const ImageGrid<Scalar>& feat_left, const ImageGrid<Scalar>& feat_right,
                                  Index max_disp) {
    detail::require_same_shape(feat_left, feat_right, "feature maps differ in shape");
    detail::require(max_disp >= 1 && max_disp < feat_left.width(), ErrorCode::InvalidArgument,
                    "max_disp must satisfy 1 <= max_disp < width");
    const Index h = feat_left.height(), w = feat_left.width();
    const Scalar inv_c = Scalar(1) / static_cast<Scalar>(feat_left.channels());

    CostVolume<Scalar> vol{LevelStack<Scalar>(static_cast<std::size_t>(max_disp + 1), Plane<Scalar>::Zero(h, w)),
                           CostPolarity::similarity};
    for (Index d = 0; d <= max_disp; ++d) {
        auto& plane = vol.costs[static_cast<std::size_t>(d)];
        const Index n = w - d;
        for (Index c = 0; c < feat_left.channels(); ++c)
            plane.rightCols(n) += feat_left.channel(c).rightCols(n) * feat_right.channel(c).leftCols(n);
        plane *= inv_c;
    }
    return vol;
}

/// Per-pixel best level; ties go to the smaller disparity.
template <typename Scalar>
DisparityMap<Scalar> cost_volume_wta(const CostVolume<Scalar>& volume) {
    detail::require(volume.num_disp() >= 1, ErrorCode::InvalidArgument, "cost volume is empty");
    const bool maximize = volume.polarity == CostPolarity::similarity;
    Plane<Scalar> best = volume.costs[0];
    Plane<Scalar> arg = Plane<Scalar>::Zero(volume.height(), volume.width());
    for (Index d = 1; d < volume.num_disp(); ++d) {
        const auto& c = volume.costs[static_cast<std::size_t>(d)];
        const auto better = maximize ? (c > best).eval() : (c < best).eval();
        best = better.select(c, best);
        arg = better.select(Plane<Scalar>::Constant(arg.rows(), arg.cols(), Scalar(d)), arg);
    }
    return DisparityMap<Scalar>::dense(std::move(arg));
}

/// Winner-take-all block matching of left against right, comparing left column j with
/// right column j - d. Pixels whose window leaves the image, and pixels whose best cost is
/// not clearly better than every candidate more than one level away, are invalid.
template <typename Scalar>
DisparityMap<Scalar> block_match(const ImageGrid<Scalar>& left, const ImageGrid<Scalar>& right,
                                 const BlockMatchConfig& cfg) {
    detail::require_same_shape(left, right, "left and right images differ in shape");
    detail::require(cfg.is_valid(), ErrorCode::InvalidArgument,
                    "block matching needs window_radius >= 1, max_disparity >= 1, uniqueness_ratio >= 1");
    const Index r = cfg.window_radius;
    const Index win = 2 * r + 1;
    const Index h = left.height(), w = left.width();
    detail::require(h >= win && w >= win, ErrorCode::InvalidArgument, "image too small for the matching window");

    const Plane<Scalar> gl = to_gray(left);
    const Plane<Scalar> gr = to_gray(right);
    const Index num_disp = static_cast<Index>(cfg.max_disparity) + 1;
    const Scalar ratio = static_cast<Scalar>(cfg.uniqueness_ratio);

    DisparityMap<Scalar> out(h, w);
    parallel_rows(h - 2 * r, [&](Index row) {
        const Index i = row + r;
        // costs(d, j): aggregated window cost; +inf where the right window leaves the image.
        Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> costs =
            decltype(costs)::Constant(num_disp, w, std::numeric_limits<Scalar>::infinity());
        Eigen::Array<Scalar, 1, Eigen::Dynamic> column(w);
        for (Index d = 0; d < num_disp && d < w; ++d) {
            const Index n = w - d;
            auto diff = gl.block(i - r, d, win, n) - gr.block(i - r, 0, win, n);
            column.setZero();
            if (cfg.metric == MatchMetric::SAD)
                column.tail(n) = diff.abs().colwise().sum();
            else
                column.tail(n) = diff.square().colwise().sum();
            for (Index j = d + r; j < w - r; ++j) costs(d, j) = column.segment(j - r, win).sum();
        }

        for (Index j = r; j < w - r; ++j) {
            const Index candidates = std::min(num_disp, j - r + 1);
            Index best = 0;
            for (Index d = 1; d < candidates; ++d)
                if (costs(d, j) < costs(best, j)) best = d;
            Scalar second = std::numeric_limits<Scalar>::infinity();
            for (Index d = 0; d < candidates; ++d)
                if (std::abs(d - best) > 1) second = std::min(second, costs(d, j));
            if (!std::isfinite(second) || costs(best, j) * ratio >= second) continue;

            Scalar disp = static_cast<Scalar>(best);
            if (cfg.subpixel && best >= 1 && best + 1 < candidates) {
                const Scalar c0 = costs(best - 1, j), c1 = costs(best, j), c2 = costs(best + 1, j);
                const Scalar denom = c0 - Scalar(2) * c1 + c2;
                if (denom > 0) disp += (c0 - c2) / (Scalar(2) * denom);
            }
            out.values(i, j) = disp;
            out.valid(i, j) = true;
        }
    });
    return out;
}

}  // namespace svs
