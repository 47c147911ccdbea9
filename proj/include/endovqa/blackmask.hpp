#pragma once

#include <optional>

#include "endovqa/highlight.hpp"
#include "endovqa/inpaint.hpp"
#include "endovqa/raster.hpp"

namespace endovqa::blackmask {

/// Width of the black frame measured from each image edge.
struct BorderWidths {
    int left = 0;
    int top = 0;
    int right = 0;
    int bottom = 0;

    bool operator==(const BorderWidths&) const = default;
};

/// Pixel rectangle [x0, x1) x [y0, y1).
struct Region {
    int x0 = 0;
    int y0 = 0;
    int x1 = 0;
    int y1 = 0;
    bool contains(int x, int y) const { return x >= x0 && x < x1 && y >= y0 && y < y1; }
};

struct BlackMaskConfig {
    int black_threshold = 10;   ///< gray levels below this count as frame
    int erode_kernel = 3;       ///< noise removal on the inverse-threshold mask
    double sigma = 1.25;        ///< circle radius = (height / 2) * sigma, must be > 1
    int margin = 2;             ///< extra inset added to each detected border
    bool has_black_box = false; ///< preserve a text box in the bottom-left corner
    double box_width_frac = 0.25;
    double box_height_frac = 0.12;

    void validate() const;

    /// Bottom-left box region for an image of the given size.
    Region box_region(int width, int height) const;
};

/**
 * Inverse-threshold the gray image, open it with `erode_kernel` to drop
 * isolated dark specks, then take, for each edge, the shortest run of frame
 * pixels from that edge inward across all of its scanlines.
 *
 * @throws std::invalid_argument if the whole image is frame.
 */
BorderWidths detect_border_widths(const RasterImage& img, const BlackMaskConfig& cfg = {});

/**
 * Inpaint mask for the frame: NOT(rect AND disk), where `rect` is inset from
 * each edge by its border width plus `margin`, and `disk` is centred on
 * (width/2, height/2) with radius (height/2) * sigma.
 *
 * @throws std::invalid_argument if sigma <= 1, the borders do not fit, or the
 * kept interior is empty.
 */
BinaryMask build_artificial_mask(int width, int height, const BorderWidths& borders, double sigma,
                                 int margin = 2);

/// Both membership tests of build_artificial_mask for one pixel; true = inpaint.
bool artificial_mask_at(int x, int y, int width, int height, const BorderWidths& borders, double sigma,
                        int margin = 2);

/**
 * Inpaint the black frame. With `has_black_box` the bottom-left box of
 * `box_source` (defaults to `img`) is pasted back after inpainting, with its
 * near-black pixels replaced by pure green.
 */
RasterImage remove_black_mask(const RasterImage& img, const BlackMaskConfig& cfg = {},
                              const inpaint::InpaintConfig& icfg = {},
                              const RasterImage* box_source = nullptr);

struct EnhanceConfig {
    highlight::HighlightConfig highlight;
    inpaint::InpaintConfig inpaint;
    BlackMaskConfig blackmask;
};

/// Wall time per stage, milliseconds.
struct StageTimings {
    double detect = 0.0;
    double restore = 0.0;
    double telea = 0.0;
    double blackmask = 0.0;
};

/// Intermediate images of one enhancement run.
struct EnhanceStages {
    RasterImage grayscale;
    BinaryMask highlight_mask;
    SoftMask feathered;
    RasterImage blurred;
    RasterImage restored;
    RasterImage highlights_removed;
    BinaryMask frame_mask;
    RasterImage final_image;
    StageTimings timings;
};

/// remove_highlights followed by remove_black_mask. The black box is
/// snapshotted from the original so highlight removal cannot touch its text.
RasterImage enhance(const RasterImage& img, const EnhanceConfig& cfg = {});

/// Same result as enhance(), keeping every intermediate.
EnhanceStages enhance_with_stages(const RasterImage& img, const EnhanceConfig& cfg = {});

}  // namespace endovqa::blackmask
