#include "svs/scene.hpp"

#include <string>

#include "svs/viewsynth.hpp"

namespace svs {

SceneKind parse_scene_kind(std::string_view name) {
    if (name == "constant-plane") return SceneKind::constant_plane;
    if (name == "slanted-plane") return SceneKind::slanted_plane;
    if (name == "two-layer") return SceneKind::two_layer;
    detail::fail(ErrorCode::InvalidArgument, "unknown scene kind: " + std::string(name));
}

std::string_view to_string(SceneKind kind) {
    switch (kind) {
    case SceneKind::constant_plane: return "constant-plane";
    case SceneKind::slanted_plane: return "slanted-plane";
    case SceneKind::two_layer: return "two-layer";
    }
    return "unknown";
}

ImageGrid<double> random_texture(Index width, Index height, Index channels, std::uint64_t seed) {
    Lcg64 rng(seed);
    std::vector<Plane<double>> noise(static_cast<std::size_t>(channels), Plane<double>(height + 2, width + 2));
    for (Index i = 0; i < height + 2; ++i)
        for (Index j = 0; j < width + 2; ++j)
            for (auto& p : noise) p(i, j) = rng.uniform();

    ImageGrid<double> out(height, width, channels);
    for (Index c = 0; c < channels; ++c) {
        const auto& n = noise[static_cast<std::size_t>(c)];
        auto& dst = out.channel(c);
        for (Index di = 0; di < 3; ++di)
            for (Index dj = 0; dj < 3; ++dj) dst += n.block(di, dj, height, width);
        dst /= 9.0;
    }
    return out;
}

DisparityMap<double> scene_disparity(Index width, Index height, SceneKind kind, const SceneParams& params) {
    Plane<double> d(height, width);
    switch (kind) {
    case SceneKind::constant_plane:
        d.setConstant(params.constant_disparity);
        break;
    case SceneKind::slanted_plane:
        for (Index j = 0; j < width; ++j)
            d.col(j).setConstant(params.slant_from + (params.slant_to - params.slant_from) *
                                                         static_cast<double>(j) /
                                                         static_cast<double>(width - 1));
        break;
    case SceneKind::two_layer:
        d.setConstant(params.background_disparity);
        d.block(height / 4, width / 4, height / 2, width / 2).setConstant(params.foreground_disparity);
        break;
    }
    detail::require(d.minCoeff() >= 0.0 && d.maxCoeff() <= params.max_disparity, ErrorCode::InvalidArgument,
                    "scene disparities must lie in [0, max_disparity]");
    return DisparityMap<double>::dense(std::move(d));
}

ImageGrid<double> fill_holes_replicate(const ImageGrid<double>& image, const Mask& valid) {
    ImageGrid<double> out = image;
    const Index w = image.width();
    for (Index i = 0; i < image.height(); ++i) {
        Index next_valid = -1;  // nearest valid column to the right of j
        for (Index j = w - 1; j >= 0; --j) {
            if (valid(i, j)) {
                next_valid = j;
                continue;
            }
            Index src = next_valid;
            if (src < 0)
                for (Index k = j - 1; k >= 0; --k)
                    if (valid(i, k)) {
                        src = k;
                        break;
                    }
            if (src < 0) continue;
            for (Index c = 0; c < image.channels(); ++c) out(i, j, c) = image(i, src, c);
        }
    }
    return out;
}

SyntheticScene gen_scene(Index width, Index height, SceneKind kind, std::uint64_t seed, const SceneParams& params) {
    detail::require(width >= 32 && height >= 32, ErrorCode::InvalidArgument, "scenes must be at least 32x32");
    SyntheticScene s;
    s.left = random_texture(width, height, params.channels, seed);
    s.gt_disparity = scene_disparity(width, height, kind, params);
    const auto warped = dibr_warp(s.left, s.gt_disparity);
    s.right = fill_holes_replicate(warped.image, warped.valid);
    return s;
}

}  // namespace svs
