#pragma once

#include <filesystem>

#include "endovqa/raster.hpp"

namespace endovqa {

/// Reads PNG or JPEG (detected from the file signature). Alpha is dropped,
/// gray+alpha becomes gray, palette and 16-bit PNGs are expanded to 8-bit.
/// Throws DataError naming the path on any failure.
RasterImage load_image(const std::filesystem::path& path);

/// Writes an 8-bit gray or RGB PNG. Output bytes depend only on the pixels.
void save_image(const RasterImage& img, const std::filesystem::path& path);

/// Mask as single-channel PNG: 0 = keep, 255 = inpaint.
void save_mask(const BinaryMask& mask, const std::filesystem::path& path);

}  // namespace endovqa
