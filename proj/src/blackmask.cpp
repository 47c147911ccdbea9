#include "endovqa/blackmask.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>
#include <string>

namespace endovqa::blackmask {

void BlackMaskConfig::validate() const {
    if (black_threshold < 0 || black_threshold > 255) {
        throw std::invalid_argument("black_threshold must be in [0,255]");
    }
    if (erode_kernel < 1 || erode_kernel % 2 == 0) throw std::invalid_argument("erode_kernel must be odd");
    if (!(sigma > 1.0)) throw std::invalid_argument("sigma must be > 1");
    if (margin < 0) throw std::invalid_argument("margin must be >= 0");
    if (!(box_width_frac > 0.0 && box_width_frac <= 1.0) || !(box_height_frac > 0.0 && box_height_frac <= 1.0)) {
        throw std::invalid_argument("box fractions must be in (0,1]");
    }
}

Region BlackMaskConfig::box_region(int width, int height) const {
    const int bw = std::max(1, static_cast<int>(std::lround(box_width_frac * width)));
    const int bh = std::max(1, static_cast<int>(std::lround(box_height_frac * height)));
    return {0, height - bh, std::min(bw, width), height};
}

BorderWidths detect_border_widths(const RasterImage& img, const BlackMaskConfig& cfg) {
    cfg.validate();
    const BinaryMask frame =
        raster::open(raster::threshold(img, cfg.black_threshold, /*inverse=*/true), cfg.erode_kernel);
    if (frame.count() == frame.size()) {
        throw std::invalid_argument("detect_border_widths: image is entirely black");
    }
    const int w = frame.width();
    const int h = frame.height();

    BorderWidths b{w, h, w, h};
    for (int y = 0; y < h; ++y) {
        int run = 0;
        while (run < w && frame.at(run, y)) ++run;
        b.left = std::min(b.left, run);
        run = 0;
        while (run < w && frame.at(w - 1 - run, y)) ++run;
        b.right = std::min(b.right, run);
    }
    for (int x = 0; x < w; ++x) {
        int run = 0;
        while (run < h && frame.at(x, run)) ++run;
        b.top = std::min(b.top, run);
        run = 0;
        while (run < h && frame.at(x, h - 1 - run)) ++run;
        b.bottom = std::min(b.bottom, run);
    }
    return b;
}

bool artificial_mask_at(int x, int y, int width, int height, const BorderWidths& b, double sigma, int margin) {
    const bool in_rect = x >= b.left + margin && x < width - (b.right + margin) && y >= b.top + margin &&
                         y < height - (b.bottom + margin);
    const double cx = width / 2.0;
    const double cy = height / 2.0;
    const double radius = cy * sigma;
    const double dx = x - cx;
    const double dy = y - cy;
    const bool in_disk = dx * dx + dy * dy <= radius * radius;
    return !(in_rect && in_disk);
}

BinaryMask build_artificial_mask(int width, int height, const BorderWidths& b, double sigma, int margin) {
    if (!(sigma > 1.0)) throw std::invalid_argument("sigma must be > 1");
    if (b.left < 0 || b.top < 0 || b.right < 0 || b.bottom < 0 || b.left + b.right >= width ||
        b.top + b.bottom >= height) {
        throw std::invalid_argument("border widths do not fit a " + std::to_string(width) + "x" +
                                    std::to_string(height) + " image");
    }
    BinaryMask mask(width, height);
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) mask.set(x, y, artificial_mask_at(x, y, width, height, b, sigma, margin));
    }
    if (mask.count() == mask.size()) {
        throw std::invalid_argument("border widths leave no interior to keep");
    }
    return mask;
}

namespace {

void paste_box(RasterImage& out, const RasterImage& source, const BlackMaskConfig& cfg) {
    const Region box = cfg.box_region(out.width(), out.height());
    const RasterImage gray = raster::to_grayscale(source);
    const int ch = out.channels();
    // Gray images get the luma of pure green.
    const std::uint8_t green[3] = {0, 255, 0};
    const std::uint8_t green_luma = 150;
    for (int y = box.y0; y < box.y1; ++y) {
        for (int x = box.x0; x < box.x1; ++x) {
            const bool background = gray.at(x, y) < cfg.black_threshold;
            for (int c = 0; c < ch; ++c) {
                if (!background) {
                    out.at(x, y, c) = source.at(x, y, c);
                } else {
                    out.at(x, y, c) = ch == 3 ? green[c] : green_luma;
                }
            }
        }
    }
}

}  // namespace

RasterImage remove_black_mask(const RasterImage& img, const BlackMaskConfig& cfg,
                              const inpaint::InpaintConfig& icfg, const RasterImage* box_source) {
    cfg.validate();
    const BorderWidths borders = detect_border_widths(img, cfg);
    const BinaryMask mask = build_artificial_mask(img.width(), img.height(), borders, cfg.sigma, cfg.margin);
    // Hard 0/1 blend weights: the kept interior must stay bit-identical.
    RasterImage out = inpaint::restore_and_inpaint(img, mask, SoftMask::from_binary(mask), icfg);
    if (cfg.has_black_box) {
        const RasterImage& source = box_source ? *box_source : img;
        if (source.width() != img.width() || source.height() != img.height() ||
            source.channels() != img.channels()) {
            throw std::invalid_argument("black box source does not match the image");
        }
        paste_box(out, source, cfg);
    }
    return out;
}

EnhanceStages enhance_with_stages(const RasterImage& img, const EnhanceConfig& cfg) {
    cfg.highlight.validate();
    cfg.inpaint.validate();
    cfg.blackmask.validate();

    using Clock = std::chrono::steady_clock;
    auto ms_since = [](Clock::time_point t0) {
        return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
    };

    EnhanceStages st;
    auto t0 = Clock::now();
    st.grayscale = raster::to_grayscale(img);
    auto det = highlight::detect_highlights(img, cfg.highlight);
    st.highlight_mask = std::move(det.hard);
    st.feathered = std::move(det.feathered);
    st.timings.detect = ms_since(t0);

    t0 = Clock::now();
    st.blurred = raster::box_blur_iterated(img, cfg.inpaint.blur_passes);
    const bool any = st.highlight_mask.any();
    st.restored = any && cfg.inpaint.blend ? inpaint::initial_restore(img, st.feathered, cfg.inpaint.blur_passes) : img;
    st.timings.restore = ms_since(t0);

    t0 = Clock::now();
    st.highlights_removed =
        any ? inpaint::telea_inpaint(st.restored, st.highlight_mask, inpaint::TeleaOptions{cfg.inpaint.telea_radius, true})
            : img;
    st.timings.telea = ms_since(t0);

    t0 = Clock::now();
    const BorderWidths borders = detect_border_widths(st.highlights_removed, cfg.blackmask);
    st.frame_mask = build_artificial_mask(img.width(), img.height(), borders, cfg.blackmask.sigma, cfg.blackmask.margin);
    st.final_image = remove_black_mask(st.highlights_removed, cfg.blackmask, cfg.inpaint, &img);
    st.timings.blackmask = ms_since(t0);
    return st;
}

RasterImage enhance(const RasterImage& img, const EnhanceConfig& cfg) {
    const RasterImage cleaned = inpaint::remove_highlights(img, cfg.highlight, cfg.inpaint);
    return remove_black_mask(cleaned, cfg.blackmask, cfg.inpaint, &img);
}

}  // namespace endovqa::blackmask
