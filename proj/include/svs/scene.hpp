#pragma once

#include <cstdint>
#include <string_view>

#include "svs/grid.hpp"

namespace svs {

/// 64-bit linear congruential generator (Knuth's MMIX constants).
///   state' = state * 6364136223846793005 + 1442695040888963407  (mod 2^64)
/// uniform() returns the top 53 bits of the new state scaled into [0, 1).
class Lcg64 {
public:
    static constexpr std::uint64_t kMultiplier = 6364136223846793005ULL;
    static constexpr std::uint64_t kIncrement = 1442695040888963407ULL;

    explicit Lcg64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        state_ = state_ * kMultiplier + kIncrement;
        return state_;
    }

    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

private:
    std::uint64_t state_;
};

enum class SceneKind { constant_plane, slanted_plane, two_layer };

SceneKind parse_scene_kind(std::string_view name);
std::string_view to_string(SceneKind kind);

struct SceneParams {
    Index channels = 3;
    double constant_disparity = 5.0;
    double slant_from = 2.0;  // disparity at column 0
    double slant_to = 10.0;   // disparity at the last column
    double background_disparity = 2.0;
    double foreground_disparity = 10.0;
    double max_disparity = 64.0;
};

struct SyntheticScene {
    ImageGrid<double> left;
    ImageGrid<double> right;
    DisparityMap<double> gt_disparity;
};

/// Box-filtered (3x3) uniform noise. The noise is drawn row-major over an
/// (H+2) x (W+2) padded grid with channels innermost, so every output pixel
/// averages nine real samples.
ImageGrid<double> random_texture(Index width, Index height, Index channels, std::uint64_t seed);

/// Ground-truth disparity for a scene kind. The two-layer foreground is the
/// rectangle covering the middle half of the rows and columns.
DisparityMap<double> scene_disparity(Index width, Index height, SceneKind kind, const SceneParams& params);

/// Fills pixels that are false in `valid` from the nearest valid pixel to their
/// right in the same row, or from the nearest one to their left at the right edge.
ImageGrid<double> fill_holes_replicate(const ImageGrid<double>& image, const Mask& valid);

/// Textured left view, ground truth, and the right view obtained by forward-warping
/// the left view with the ground truth and filling holes by replication.
SyntheticScene gen_scene(Index width, Index height, SceneKind kind, std::uint64_t seed,
                         const SceneParams& params = {});

}  // namespace svs
