#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <utility>
#include <vector>

#include "svs/error.hpp"

namespace svs {

using Index = Eigen::Index;

/// A single H x W raster. Row-major, origin top-left.
template <typename Scalar>
using Plane = Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// H x W x L array of reals, one plane per disparity level.
template <typename Scalar>
using LevelStack = std::vector<Plane<Scalar>>;

using Mask = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Dense H x W x C image with intensities in [0, 1], stored as one plane per channel.
template <typename Scalar = double>
class ImageGrid {
public:
    ImageGrid() = default;

    ImageGrid(Index height, Index width, Index channels, Scalar fill = Scalar(0))
        : planes_(static_cast<std::size_t>(channels), Plane<Scalar>::Constant(height, width, fill)) {
        detail::require(height > 0 && width > 0, ErrorCode::InvalidArgument,
                        "image dimensions must be positive");
        detail::require(channels == 1 || channels == 3, ErrorCode::InvalidArgument,
                        "image must have 1 or 3 channels");
    }

    explicit ImageGrid(std::vector<Plane<Scalar>> planes) : planes_(std::move(planes)) {
        detail::require(planes_.size() == 1 || planes_.size() == 3, ErrorCode::InvalidArgument,
                        "image must have 1 or 3 channels");
        for (const auto& p : planes_)
            detail::require(p.rows() == planes_[0].rows() && p.cols() == planes_[0].cols() &&
                                p.size() > 0,
                            ErrorCode::ShapeMismatch, "channel planes differ in shape");
    }

    Index height() const { return planes_.empty() ? 0 : planes_[0].rows(); }
    Index width() const { return planes_.empty() ? 0 : planes_[0].cols(); }
    Index channels() const { return static_cast<Index>(planes_.size()); }
    Index size() const { return height() * width() * channels(); }

    Plane<Scalar>& channel(Index c) { return planes_[static_cast<std::size_t>(c)]; }
    const Plane<Scalar>& channel(Index c) const { return planes_[static_cast<std::size_t>(c)]; }

    Scalar& operator()(Index i, Index j, Index c) { return channel(c)(i, j); }
    Scalar operator()(Index i, Index j, Index c) const { return channel(c)(i, j); }

    const std::vector<Plane<Scalar>>& planes() const { return planes_; }
    std::vector<Plane<Scalar>>& planes() { return planes_; }

    bool same_shape(const ImageGrid& other) const {
        return height() == other.height() && width() == other.width() &&
               channels() == other.channels();
    }

    /// True when every value is finite and inside [0, 1].
    bool is_valid() const {
        for (const auto& p : planes_)
            if (!p.allFinite() || (p < Scalar(0)).any() || (p > Scalar(1)).any()) return false;
        return !planes_.empty();
    }

    template <typename To>
    ImageGrid<To> cast() const {
        std::vector<Plane<To>> out;
        out.reserve(planes_.size());
        for (const auto& p : planes_) out.push_back(p.template cast<To>());
        return ImageGrid<To>(std::move(out));
    }

private:
    std::vector<Plane<Scalar>> planes_;
};

/// Per-pixel categorical distribution over integer disparities 0..num_levels-1.
/// Level d is stored as its own H x W plane.
template <typename Scalar = double>
class DisparityVolume {
public:
    static constexpr int kDefaultLevels = 65;

    DisparityVolume() = default;

    explicit DisparityVolume(std::vector<Plane<Scalar>> levels) : levels_(std::move(levels)) {
        detail::require(!levels_.empty(), ErrorCode::InvalidArgument,
                        "volume needs at least one level");
        for (const auto& p : levels_)
            detail::require(p.rows() == levels_[0].rows() && p.cols() == levels_[0].cols() &&
                                p.size() > 0,
                            ErrorCode::ShapeMismatch, "volume levels differ in shape");
    }

    /// Every pixel assigns all its mass to `level`.
    static DisparityVolume one_hot(Index height, Index width, Index num_levels, Index level) {
        detail::require(level >= 0 && level < num_levels, ErrorCode::InvalidArgument,
                        "one-hot level out of range");
        std::vector<Plane<Scalar>> levels(static_cast<std::size_t>(num_levels),
                                          Plane<Scalar>::Zero(height, width));
        levels[static_cast<std::size_t>(level)].setOnes();
        return DisparityVolume(std::move(levels));
    }

    static DisparityVolume uniform(Index height, Index width, Index num_levels) {
        return DisparityVolume(std::vector<Plane<Scalar>>(
            static_cast<std::size_t>(num_levels),
            Plane<Scalar>::Constant(height, width, Scalar(1) / Scalar(num_levels))));
    }

    Index height() const { return levels_.empty() ? 0 : levels_[0].rows(); }
    Index width() const { return levels_.empty() ? 0 : levels_[0].cols(); }
    Index num_levels() const { return static_cast<Index>(levels_.size()); }

    Plane<Scalar>& level(Index d) { return levels_[static_cast<std::size_t>(d)]; }
    const Plane<Scalar>& level(Index d) const { return levels_[static_cast<std::size_t>(d)]; }
    const std::vector<Plane<Scalar>>& levels() const { return levels_; }

    /// Non-negative everywhere and each pixel sums to one within 1e-6.
    bool is_valid() const {
        if (levels_.empty()) return false;
        Plane<Scalar> total = Plane<Scalar>::Zero(height(), width());
        for (const auto& p : levels_) {
            if (!p.allFinite() || (p < Scalar(0)).any()) return false;
            total += p;
        }
        return ((total - Scalar(1)).abs() <= Scalar(1e-6)).all();
    }

private:
    std::vector<Plane<Scalar>> levels_;
};

struct DisparityTag {};
struct DepthTag {};

/// H x W real map with a validity mask. Invalid pixels hold 0 and never enter any computation.
template <typename Scalar, typename Tag>
struct MaskedMap {
    Plane<Scalar> values;
    Mask valid;

    MaskedMap() = default;
    MaskedMap(Index height, Index width)
        : values(Plane<Scalar>::Zero(height, width)), valid(Mask::Constant(height, width, false)) {}
    MaskedMap(Plane<Scalar> v, Mask m) : values(std::move(v)), valid(std::move(m)) {
        detail::require(values.rows() == valid.rows() && values.cols() == valid.cols(),
                        ErrorCode::ShapeMismatch, "values and mask differ in shape");
    }

    /// All pixels valid.
    static MaskedMap dense(Plane<Scalar> v) {
        Mask m = Mask::Constant(v.rows(), v.cols(), true);
        return MaskedMap(std::move(v), std::move(m));
    }

    Index height() const { return values.rows(); }
    Index width() const { return values.cols(); }

    bool same_shape(const MaskedMap& other) const {
        return height() == other.height() && width() == other.width();
    }
    template <typename OtherTag>
    bool same_shape(const MaskedMap<Scalar, OtherTag>& other) const {
        return height() == other.height() && width() == other.width();
    }

    Index valid_count() const { return valid.count(); }
};

template <typename Scalar = double>
using DisparityMap = MaskedMap<Scalar, DisparityTag>;
template <typename Scalar = double>
using DepthMap = MaskedMap<Scalar, DepthTag>;

/// Rectified stereo rig: disparity d [px] and depth Z [m] satisfy Z = focal_px * baseline_m / d.
template <typename Scalar = double>
struct CameraRig {
    Scalar focal_px = Scalar(720);
    Scalar baseline_m = Scalar(0.54);

    bool is_valid() const {
        return std::isfinite(focal_px) && std::isfinite(baseline_m) && focal_px > 0 &&
               baseline_m > 0;
    }
};

namespace detail {

template <typename Scalar>
void require_same_shape(const ImageGrid<Scalar>& a, const ImageGrid<Scalar>& b, const char* what) {
    require(a.same_shape(b), ErrorCode::ShapeMismatch, what);
}

/// Plane shifted left by d with the last column replicated: out(i, j) = in(i, min(j + d, W - 1)).
template <typename Derived>
Plane<typename Derived::Scalar> shift_plane(const Eigen::ArrayBase<Derived>& in, Index d) {
    const Index w = in.cols();
    Plane<typename Derived::Scalar> out(in.rows(), w);
    const Index keep = std::max<Index>(w - d, 0);
    if (keep > 0) out.leftCols(keep) = in.rightCols(keep);
    if (keep < w) out.rightCols(w - keep) = in.col(w - 1).replicate(1, w - keep);
    return out;
}

}  // namespace detail
}  // namespace svs
