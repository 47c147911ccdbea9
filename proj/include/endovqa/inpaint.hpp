#pragma once

#include <cstddef>
#include <vector>

#include "endovqa/highlight.hpp"
#include "endovqa/raster.hpp"

namespace endovqa::inpaint {

struct InpaintConfig {
    int blur_passes = 5;   ///< 3x3 mean passes for the restoration source
    int telea_radius = 5;  ///< neighbourhood radius of the Telea estimator
    bool blend = true;     ///< blend the blurred image through the feathered mask first

    void validate() const;
};

/// out = a * box_blur_iterated(img, passes) + (1 - a) * img, a = feathered weight.
/// Pixels with a == 0 are copied unchanged.
RasterImage initial_restore(const RasterImage& img, const SoftMask& feathered, int passes);

/// Per-fill diagnostics, in marching order.
struct FillRecord {
    std::size_t index = 0;    ///< y * width + x of the filled pixel
    double arrival = 0.0;     ///< fast-marching arrival time when popped
    double known_min = 0.0;   ///< smallest contributing known value (channel 0)
    double known_max = 0.0;   ///< largest contributing known value (channel 0)
};

struct TeleaOptions {
    int radius = 5;
    /// Add the first-order term grad I(q) . (p - q) to each contribution.
    /// With it disabled every fill is a convex combination of known values.
    bool extrapolate_gradient = true;
};

/**
 * Fast-marching inpainting after Telea: masked pixels are visited in order
 * of increasing distance from the mask boundary, and each is estimated from
 * the already-known pixels within `radius` using direction, distance and
 * level-set weights. One marching order serves all channels.
 *
 * Unmasked pixels are returned bit-identical. If `trace` is non-null it
 * receives one record per filled pixel.
 *
 * @throws std::invalid_argument if dimensions differ, radius < 1, or every
 * pixel is masked.
 */
RasterImage telea_inpaint(const RasterImage& img, const BinaryMask& mask, const TeleaOptions& opts,
                          std::vector<FillRecord>* trace = nullptr);

inline RasterImage telea_inpaint(const RasterImage& img, const BinaryMask& mask, int radius) {
    return telea_inpaint(img, mask, TeleaOptions{radius, true});
}

/// Restore through `blend` (when enabled) and then Telea-inpaint `hard`.
RasterImage restore_and_inpaint(const RasterImage& img, const BinaryMask& hard, const SoftMask& blend,
                                const InpaintConfig& cfg);

/// detect_highlights -> initial_restore -> telea_inpaint on the hard mask.
RasterImage remove_highlights(const RasterImage& img, const highlight::HighlightConfig& hcfg = {},
                              const InpaintConfig& icfg = {});

}  // namespace endovqa::inpaint
