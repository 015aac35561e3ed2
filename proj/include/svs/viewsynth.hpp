#pragma once

// Differentiable view synthesis: the right view is rebuilt from the left view as a
// per-pixel convex combination of horizontally shifted copies, weighted by a
// disparity probability volume. Everything here is a pure function of its inputs.

#include <cmath>
#include <limits>
#include <vector>

#include "svs/grid.hpp"

namespace svs {

template <typename Scalar>
struct SynthesisGradients {
    LevelStack<Scalar> d_probs;  // dL/dvolume
    ImageGrid<Scalar> d_image;   // dL/dleft
};

template <typename Scalar>
struct L1Result {
    Scalar loss;
    ImageGrid<Scalar> grad;
};

template <typename Scalar>
struct WarpResult {
    ImageGrid<Scalar> image;
    Mask valid;
};

/// Shifted left view: out(i, j) = image(i, j + d), replicating the last column past the edge.
template <typename Scalar>
ImageGrid<Scalar> shift_image(const ImageGrid<Scalar>& image, Index d) {
    detail::require(d >= 0 && d < image.width(), ErrorCode::InvalidArgument,
                    "shift must satisfy 0 <= d < width");
    std::vector<Plane<Scalar>> out;
    out.reserve(static_cast<std::size_t>(image.channels()));
    for (const auto& p : image.planes()) out.push_back(detail::shift_plane(p, d));
    return ImageGrid<Scalar>(std::move(out));
}

namespace detail {

template <typename Scalar>
void require_volume(const ImageGrid<Scalar>& left, const DisparityVolume<Scalar>& volume) {
    require(volume.height() == left.height() && volume.width() == left.width(),
            ErrorCode::ShapeMismatch, "volume and image differ in shape");
    require(volume.is_valid(), ErrorCode::InvalidArgument,
            "volume must be non-negative and sum to one per pixel");
}

/// shift_plane(left.channel(c), d) for every level and channel, computed once.
template <typename Scalar>
class ShiftedViews {
public:
    ShiftedViews(const ImageGrid<Scalar>& left, Index num_levels)
        : height_(left.height()), width_(left.width()), channels_(left.channels()) {
        views_.reserve(static_cast<std::size_t>(num_levels * channels_));
        for (Index d = 0; d < num_levels; ++d)
            for (Index c = 0; c < channels_; ++c) views_.push_back(shift_plane(left.channel(c), d));
    }

    const Plane<Scalar>& operator()(Index d, Index c) const {
        return views_[static_cast<std::size_t>(d * channels_ + c)];
    }
    Index num_levels() const { return static_cast<Index>(views_.size()) / channels_; }
    Index channels() const { return channels_; }

    ImageGrid<Scalar> synthesize(const DisparityVolume<Scalar>& volume) const {
        ImageGrid<Scalar> out(height_, width_, channels_);
        for (Index c = 0; c < channels_; ++c) {
            auto& acc = out.channel(c);
            for (Index d = 0; d < volume.num_levels(); ++d) acc += (*this)(d, c) * volume.level(d);
        }
        return out;
    }

    LevelStack<Scalar> volume_gradient(const ImageGrid<Scalar>& upstream) const {
        LevelStack<Scalar> out(static_cast<std::size_t>(num_levels()), Plane<Scalar>::Zero(height_, width_));
        for (Index d = 0; d < num_levels(); ++d)
            for (Index c = 0; c < channels_; ++c) out[static_cast<std::size_t>(d)] += upstream.channel(c) * (*this)(d, c);
        return out;
    }

private:
    Index height_, width_, channels_;
    std::vector<Plane<Scalar>> views_;
};

}  // namespace detail

/// Probabilistic reconstruction of the right view: sum over d of shift(left, d) * P_d.
template <typename Scalar>
ImageGrid<Scalar> selection_forward(const ImageGrid<Scalar>& left, const DisparityVolume<Scalar>& volume) {
    detail::require_volume(left, volume);
    ImageGrid<Scalar> out(left.height(), left.width(), left.channels());
    for (Index c = 0; c < left.channels(); ++c) {
        auto& acc = out.channel(c);
        for (Index d = 0; d < volume.num_levels(); ++d)
            acc += detail::shift_plane(left.channel(c), d) * volume.level(d);
    }
    return out;
}

/// Adjoint of selection_forward with respect to both the volume and the left image.
/// Contributions that came from the replicated border column flow back into that column.
template <typename Scalar>
SynthesisGradients<Scalar> selection_backward(const ImageGrid<Scalar>& left,
                                              const DisparityVolume<Scalar>& volume,
                                              const ImageGrid<Scalar>& upstream) {
    detail::require_volume(left, volume);
    detail::require_same_shape(left, upstream, "upstream gradient and image differ in shape");
    const Index h = left.height(), w = left.width();

    SynthesisGradients<Scalar> g{LevelStack<Scalar>(static_cast<std::size_t>(volume.num_levels()),
                                                    Plane<Scalar>::Zero(h, w)),
                                 ImageGrid<Scalar>(h, w, left.channels())};
    for (Index d = 0; d < volume.num_levels(); ++d) {
        auto& dp = g.d_probs[static_cast<std::size_t>(d)];
        const Index keep = std::max<Index>(w - d, 0);
        for (Index c = 0; c < left.channels(); ++c) {
            dp += upstream.channel(c) * detail::shift_plane(left.channel(c), d);

            const Plane<Scalar> contrib = upstream.channel(c) * volume.level(d);
            auto& di = g.d_image.channel(c);
            if (keep > 0) di.rightCols(keep) += contrib.leftCols(keep);
            if (keep < w) di.col(w - 1) += contrib.rightCols(w - keep).rowwise().sum();
        }
    }
    return g;
}

/// Per-pixel softmax across levels, stabilized by subtracting the per-pixel maximum.
template <typename Scalar>
DisparityVolume<Scalar> softmax_levels(const LevelStack<Scalar>& logits) {
    detail::require(!logits.empty(), ErrorCode::InvalidArgument, "logits need at least one level");
    for (const auto& p : logits) {
        detail::require(p.rows() == logits[0].rows() && p.cols() == logits[0].cols(),
                        ErrorCode::ShapeMismatch, "logit levels differ in shape");
        detail::require(p.allFinite(), ErrorCode::NonFinite, "logits must be finite");
    }
    Plane<Scalar> peak = logits[0];
    for (const auto& p : logits) peak = peak.max(p);

    LevelStack<Scalar> probs;
    probs.reserve(logits.size());
    Plane<Scalar> total = Plane<Scalar>::Zero(peak.rows(), peak.cols());
    for (const auto& p : logits) {
        probs.push_back((p - peak).exp());
        total += probs.back();
    }
    for (auto& p : probs) p /= total;
    return DisparityVolume<Scalar>(std::move(probs));
}

/// Softmax Jacobian-vector product: grad_d = p_d * (u_d - sum_k u_k p_k).
template <typename Scalar>
LevelStack<Scalar> softmax_backward(const DisparityVolume<Scalar>& probs, const LevelStack<Scalar>& upstream) {
    detail::require(static_cast<Index>(upstream.size()) == probs.num_levels(), ErrorCode::ShapeMismatch,
                    "upstream level count differs from volume");
    Plane<Scalar> dot = Plane<Scalar>::Zero(probs.height(), probs.width());
    for (Index d = 0; d < probs.num_levels(); ++d) {
        const auto& u = upstream[static_cast<std::size_t>(d)];
        detail::require(u.rows() == probs.height() && u.cols() == probs.width(), ErrorCode::ShapeMismatch,
                        "upstream level differs in shape");
        dot += u * probs.level(d);
    }
    LevelStack<Scalar> out;
    out.reserve(upstream.size());
    for (Index d = 0; d < probs.num_levels(); ++d)
        out.push_back(probs.level(d) * (upstream[static_cast<std::size_t>(d)] - dot));
    return out;
}

/// Hard forward warp: left pixel (i, j) lands on right column j - round(D(i, j)).
/// On collisions the larger disparity wins; unwritten targets are 0 and flagged invalid.
template <typename Scalar>
WarpResult<Scalar> dibr_warp(const ImageGrid<Scalar>& left, const DisparityMap<Scalar>& disparity) {
    detail::require(disparity.height() == left.height() && disparity.width() == left.width(),
                    ErrorCode::ShapeMismatch, "disparity and image differ in shape");
    const Index h = left.height(), w = left.width();
    WarpResult<Scalar> out{ImageGrid<Scalar>(h, w, left.channels()), Mask::Constant(h, w, false)};
    Plane<Scalar> winner = Plane<Scalar>::Constant(h, w, -std::numeric_limits<Scalar>::infinity());

    for (Index i = 0; i < h; ++i) {
        for (Index j = 0; j < w; ++j) {
            if (!disparity.valid(i, j)) continue;
            const Scalar d = disparity.values(i, j);
            detail::require(std::isfinite(d) && d >= 0, ErrorCode::InvalidArgument,
                            "warp disparities must be finite and non-negative");
            const Index t = j - static_cast<Index>(std::llround(d));
            if (t < 0 || t >= w || d <= winner(i, t)) continue;
            winner(i, t) = d;
            out.valid(i, t) = true;
            for (Index c = 0; c < left.channels(); ++c) out.image(i, t, c) = left(i, j, c);
        }
    }
    return out;
}

/// Mean absolute error and its subgradient sign(synth - target) / N, with sign(0) = 0.
template <typename Scalar>
L1Result<Scalar> l1_loss(const ImageGrid<Scalar>& synth, const ImageGrid<Scalar>& target) {
    detail::require_same_shape(synth, target, "synthesized and target images differ in shape");
    const Scalar n = static_cast<Scalar>(synth.size());
    L1Result<Scalar> r{Scalar(0), ImageGrid<Scalar>(synth.height(), synth.width(), synth.channels())};
    for (Index c = 0; c < synth.channels(); ++c) {
        const Plane<Scalar> diff = synth.channel(c) - target.channel(c);
        r.loss += diff.abs().sum();
        r.grad.channel(c) = diff.sign() / n;
    }
    r.loss /= n;
    return r;
}

/// Peak signal-to-noise ratio for unit peak. Identical images give +infinity.
template <typename Scalar>
Scalar psnr(const ImageGrid<Scalar>& a, const ImageGrid<Scalar>& b) {
    detail::require_same_shape(a, b, "images differ in shape");
    Scalar sse = 0;
    for (Index c = 0; c < a.channels(); ++c) sse += (a.channel(c) - b.channel(c)).square().sum();
    const Scalar mse = sse / static_cast<Scalar>(a.size());
    if (mse == Scalar(0)) return std::numeric_limits<Scalar>::infinity();
    return Scalar(10) * std::log10(Scalar(1) / mse);
}

/// Mean of the per-pixel distribution over levels; every pixel is valid.
template <typename Scalar>
DisparityMap<Scalar> expected_disparity(const DisparityVolume<Scalar>& volume) {
    detail::require(volume.is_valid(), ErrorCode::InvalidArgument,
                    "volume must be non-negative and sum to one per pixel");
    Plane<Scalar> mean = Plane<Scalar>::Zero(volume.height(), volume.width());
    for (Index d = 1; d < volume.num_levels(); ++d) mean += Scalar(d) * volume.level(d);
    return DisparityMap<Scalar>::dense(std::move(mean));
}

// ---------------------------------------------------------------------------
// Direct optimization of a disparity volume for one stereo pair.

struct OptimizerConfig {
    enum class Init { uniform, zero_logit };

    int iterations = 150;
    // Step applied to the gradient of the per-pixel loss (the image-mean loss times H*W),
    // so the same value behaves alike across image sizes.
    double step_size = 500.0;
    Init init = Init::zero_logit;
    int max_halvings = 10;

    bool is_valid() const { return iterations >= 1 && step_size > 0 && std::isfinite(step_size) && max_halvings >= 0; }
};

template <typename Scalar>
struct OptimizationResult {
    DisparityVolume<Scalar> volume;
    Scalar initial_loss;
    std::vector<Scalar> loss_trace;  // loss after each iteration; non-increasing
    std::vector<int> halvings;       // step halvings used per iteration (-1: no step accepted)
};

namespace detail {

template <typename Scalar>
Scalar synthesis_loss(const ShiftedViews<Scalar>& views, const ImageGrid<Scalar>& right,
                      const LevelStack<Scalar>& logits, DisparityVolume<Scalar>* probs_out = nullptr) {
    DisparityVolume<Scalar> probs = softmax_levels(logits);
    const Scalar loss = l1_loss(views.synthesize(probs), right).loss;
    if (probs_out) *probs_out = std::move(probs);
    return loss;
}

}  // namespace detail

/// Gradient descent on per-pixel logits through softmax -> selection -> L1.
/// A step that raises the loss is halved and retried up to cfg.max_halvings times;
/// if every retry fails the iterate is kept, so the loss trace never increases.
template <typename Scalar>
OptimizationResult<Scalar> optimize_volume(const ImageGrid<Scalar>& left, const ImageGrid<Scalar>& right,
                                           Index num_levels, const OptimizerConfig& cfg) {
    detail::require(cfg.is_valid(), ErrorCode::InvalidArgument,
                    "optimizer needs iterations >= 1 and a positive step size");
    detail::require(num_levels >= 1, ErrorCode::InvalidArgument, "num_levels must be positive");
    detail::require_same_shape(left, right, "left and right images differ in shape");

    const Index h = left.height(), w = left.width();
    // Both init modes start from zero logits, i.e. the uniform distribution.
    LevelStack<Scalar> logits(static_cast<std::size_t>(num_levels), Plane<Scalar>::Zero(h, w));

    const detail::ShiftedViews<Scalar> views(left, num_levels);
    DisparityVolume<Scalar> probs;
    Scalar loss = detail::synthesis_loss(views, right, logits, &probs);
    detail::require(std::isfinite(loss), ErrorCode::Divergence, "initial loss is not finite");

    OptimizationResult<Scalar> result{probs, loss, {}, {}};
    result.loss_trace.reserve(static_cast<std::size_t>(cfg.iterations));
    const Scalar base_step = static_cast<Scalar>(cfg.step_size) * static_cast<Scalar>(h * w);

    for (int it = 0; it < cfg.iterations; ++it) {
        const L1Result<Scalar> l1 = l1_loss(views.synthesize(probs), right);
        const LevelStack<Scalar> d_logits = softmax_backward(probs, views.volume_gradient(l1.grad));

        Scalar step = base_step;
        int used = -1;
        LevelStack<Scalar> trial(logits.size());
        for (int k = 0; k <= cfg.max_halvings; ++k, step /= Scalar(2)) {
            for (std::size_t d = 0; d < logits.size(); ++d) trial[d] = logits[d] - step * d_logits[d];
            DisparityVolume<Scalar> trial_probs;
            const Scalar trial_loss = detail::synthesis_loss(views, right, trial, &trial_probs);
            if (!std::isfinite(trial_loss)) detail::fail(ErrorCode::Divergence, "loss became non-finite");
            if (trial_loss <= loss) {
                logits.swap(trial);
                probs = std::move(trial_probs);
                loss = trial_loss;
                used = k;
                break;
            }
        }
        result.loss_trace.push_back(loss);
        result.halvings.push_back(used);
    }
    result.volume = std::move(probs);
    return result;
}

}  // namespace svs
