#include "endovqa/highlight.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace endovqa::highlight {

void HighlightConfig::validate() const {
    if (threshold < 0 || threshold > 255) throw std::invalid_argument("threshold must be in [0,255]");
    if (!(zscore_cutoff > 0.0)) throw std::invalid_argument("zscore_cutoff must be > 0");
    if (morph_kernel < 1 || morph_kernel % 2 == 0) throw std::invalid_argument("morph_kernel must be odd");
    if (feather_kernel < 1 || feather_kernel % 2 == 0) throw std::invalid_argument("feather_kernel must be odd");
    if (blur_passes < 1) throw std::invalid_argument("blur_passes must be >= 1");
}

double median(std::vector<double> values) {
    if (values.empty()) throw std::invalid_argument("median of empty list");
    const std::size_t n = values.size();
    const auto mid = values.begin() + static_cast<std::ptrdiff_t>(n / 2);
    std::nth_element(values.begin(), mid, values.end());
    const double upper = *mid;
    if (n % 2 == 1) return upper;
    const double lower = *std::max_element(values.begin(), mid);
    return (lower + upper) / 2.0;
}

std::vector<double> modified_z_scores(std::span<const double> areas) {
    if (areas.empty()) throw std::invalid_argument("modified_z_scores needs at least one area");
    const double med = median({areas.begin(), areas.end()});
    std::vector<double> dev(areas.size());
    std::transform(areas.begin(), areas.end(), dev.begin(), [med](double s) { return std::abs(s - med); });
    const double mad = median(dev);

    std::vector<double> scores(areas.size());
    for (std::size_t i = 0; i < areas.size(); ++i) {
        if (mad == 0.0) {
            scores[i] = dev[i] == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
        } else {
            scores[i] = dev[i] / mad;
        }
    }
    return scores;
}

Detection detect_highlights(const RasterImage& img, const HighlightConfig& cfg) {
    cfg.validate();
    Detection det;
    const BinaryMask bright = raster::threshold(img, cfg.threshold);
    det.dilated = raster::dilate(bright, cfg.morph_kernel);
    det.contours = raster::connected_components(det.dilated);

    BinaryMask kept = det.dilated;
    if (!det.contours.empty()) {
        std::vector<double> areas;
        areas.reserve(det.contours.size());
        for (const auto& c : det.contours) areas.push_back(static_cast<double>(c.area()));
        det.scores = modified_z_scores(areas);
        for (std::size_t i = 0; i < det.contours.size(); ++i) {
            if (det.scores[i] > cfg.zscore_cutoff) {
                for (const Point p : det.contours[i].pixels) kept.set(p.x, p.y, false);
            }
        }
    }

    det.hard = raster::erode(kept, cfg.morph_kernel);
    det.feathered = raster::gaussian_feather(det.hard, cfg.feather_kernel,
                                             raster::default_sigma(cfg.feather_kernel));
    return det;
}

}  // namespace endovqa::highlight
