#pragma once

#include <filesystem>

#include "svs/grid.hpp"

namespace svs {

/// Reads binary PGM (P5, one channel) or PPM (P6, three channels), maxval 255 or 65535.
/// Samples are divided by maxval. Throws Error with MalformedHeader, TruncatedPayload
/// or UnsupportedFormat.
ImageGrid<double> load_image(const std::filesystem::path& path);

/// Writes P5 or P6 with maxval 255; each value is rounded to the nearest of the 256 levels.
void save_image(const ImageGrid<double>& grid, const std::filesystem::path& path);

/// Reads a grayscale PFM ("Pf"). Byte order follows the sign of the scale field
/// (negative = little-endian); rows are stored bottom-up on disk. Negative or
/// non-finite samples become invalid pixels with value 0.
DisparityMap<double> load_disparity(const std::filesystem::path& path);
DepthMap<double> load_depth(const std::filesystem::path& path);

/// Writes a little-endian grayscale PFM. Invalid pixels are written as -1.0.
template <typename Tag>
void save_float_map(const MaskedMap<double, Tag>& map, const std::filesystem::path& path);

extern template void save_float_map(const DisparityMap<double>&, const std::filesystem::path&);
extern template void save_float_map(const DepthMap<double>&, const std::filesystem::path&);

/// Volumes travel as one PFM with the levels stacked vertically (level 0 on top),
/// so the file is W x (num_levels * H). The result must satisfy the volume invariants.
DisparityVolume<double> load_volume(const std::filesystem::path& path, Index num_levels);
void save_volume(const DisparityVolume<double>& volume, const std::filesystem::path& path);

}  // namespace svs
