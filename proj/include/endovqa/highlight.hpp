#pragma once

#include <span>
#include <vector>

#include "endovqa/raster.hpp"

namespace endovqa::highlight {

struct HighlightConfig {
    int threshold = 230;         ///< fixed gray level marking a highlight
    int morph_kernel = 3;        ///< dilate/erode square size
    double zscore_cutoff = 17.0; ///< contours scoring above this are dropped
    int feather_kernel = 19;     ///< Gaussian size for the blend mask
    int blur_passes = 5;         ///< 3x3 mean passes for the restoration source

    /// Throws std::invalid_argument naming the offending field.
    void validate() const;
};

/**
 * Robust outlier score of each contour area: |s_i - median| / MAD, with
 * MAD = median_i |s_i - median|. Even-length medians average the two central
 * order statistics.
 *
 * When MAD is zero a score is 0 if its area equals the median and +inf
 * otherwise, so any off-median contour in a degenerate set is an outlier.
 *
 * @throws std::invalid_argument on empty input.
 */
std::vector<double> modified_z_scores(std::span<const double> areas);

/// Median of a copy of `values`; mean of the central pair for even sizes.
double median(std::vector<double> values);

struct Detection {
    BinaryMask hard;      ///< pixels to inpaint
    SoftMask feathered;   ///< Gaussian-feathered hard mask, blend weights
    BinaryMask dilated;   ///< threshold mask after dilation, before contour removal
    std::vector<Contour> contours;     ///< components of `dilated`
    std::vector<double> scores;        ///< modified z-score of each contour
};

/// threshold -> dilate -> drop outlier contours -> erode -> feather.
Detection detect_highlights(const RasterImage& img, const HighlightConfig& cfg = {});

}  // namespace endovqa::highlight
