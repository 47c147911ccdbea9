#include "endovqa/raster_reference.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace endovqa::raster::reference {

namespace {

std::uint8_t round_u8(double v) {
    return static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
}

void check_kernel(int k) {
    if (k < 1 || k % 2 == 0) throw std::invalid_argument("kernel size must be odd and >= 1");
}

}  // namespace

RasterImage to_grayscale(const RasterImage& img) {
    if (img.channels() == 1) return img;
    RasterImage out(img.width(), img.height(), 1);
    for (int y = 0; y < img.height(); ++y) {
        for (int x = 0; x < img.width(); ++x) {
            out.at(x, y) = round_u8(0.299 * img.at(x, y, 0) + 0.587 * img.at(x, y, 1) +
                                    0.114 * img.at(x, y, 2));
        }
    }
    return out;
}

BinaryMask threshold(const RasterImage& img, int t, bool inverse) {
    if (t < 0 || t > 255) throw std::invalid_argument("threshold must be in [0,255]");
    const RasterImage gray = to_grayscale(img);
    BinaryMask out(img.width(), img.height());
    for (int y = 0; y < img.height(); ++y) {
        for (int x = 0; x < img.width(); ++x) {
            const bool above = gray.at(x, y) >= t;
            out.set(x, y, above != inverse);
        }
    }
    return out;
}

BinaryMask dilate(const BinaryMask& mask, int k) {
    check_kernel(k);
    const int r = k / 2;
    BinaryMask out(mask.width(), mask.height());
    for (int y = 0; y < mask.height(); ++y) {
        for (int x = 0; x < mask.width(); ++x) {
            bool hit = false;
            for (int dy = -r; dy <= r && !hit; ++dy) {
                for (int dx = -r; dx <= r && !hit; ++dx) {
                    const int xx = x + dx;
                    const int yy = y + dy;
                    if (xx < 0 || yy < 0 || xx >= mask.width() || yy >= mask.height()) continue;
                    hit = mask.at(xx, yy);
                }
            }
            out.set(x, y, hit);
        }
    }
    return out;
}

BinaryMask erode(const BinaryMask& mask, int k) {
    check_kernel(k);
    const int r = k / 2;
    BinaryMask out(mask.width(), mask.height());
    for (int y = 0; y < mask.height(); ++y) {
        for (int x = 0; x < mask.width(); ++x) {
            bool all = true;
            for (int dy = -r; dy <= r && all; ++dy) {
                for (int dx = -r; dx <= r && all; ++dx) {
                    const int xx = x + dx;
                    const int yy = y + dy;
                    if (xx < 0 || yy < 0 || xx >= mask.width() || yy >= mask.height()) continue;
                    all = mask.at(xx, yy);
                }
            }
            out.set(x, y, all);
        }
    }
    return out;
}

RasterImage box_blur_iterated(const RasterImage& img, int passes) {
    if (passes < 0) throw std::invalid_argument("blur passes must be >= 0");
    if (passes == 0) return img;
    const int w = img.width();
    const int h = img.height();
    const int ch = img.channels();
    auto at = [&](const std::vector<double>& buf, int x, int y, int c) {
        x = std::clamp(x, 0, w - 1);
        y = std::clamp(y, 0, h - 1);
        return buf[(static_cast<std::size_t>(y) * w + x) * ch + c];
    };

    std::vector<double> cur(img.data().begin(), img.data().end());
    std::vector<double> next(cur.size());
    for (int pass = 0; pass < passes; ++pass) {
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                for (int c = 0; c < ch; ++c) {
                    double sum = 0.0;
                    for (int dy = -1; dy <= 1; ++dy)
                        for (int dx = -1; dx <= 1; ++dx) sum += at(cur, x + dx, y + dy, c);
                    next[(static_cast<std::size_t>(y) * w + x) * ch + c] = sum / 9.0;
                }
            }
        }
        cur.swap(next);
    }

    RasterImage out(w, h, ch);
    for (std::size_t i = 0; i < cur.size(); ++i) out.data()[i] = round_u8(cur[i]);
    return out;
}

SoftMask gaussian_feather(const BinaryMask& mask, int k, double sigma) {
    const std::vector<double> g = gaussian_kernel_1d(k, sigma);
    const int r = k / 2;
    const int w = mask.width();
    const int h = mask.height();
    SoftMask out(w, h);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            double acc = 0.0;
            for (int dy = -r; dy <= r; ++dy) {
                for (int dx = -r; dx <= r; ++dx) {
                    const int xx = std::clamp(x + dx, 0, w - 1);
                    const int yy = std::clamp(y + dy, 0, h - 1);
                    if (mask.at(xx, yy)) {
                        acc += g[static_cast<std::size_t>(dy + r)] * g[static_cast<std::size_t>(dx + r)];
                    }
                }
            }
            out.at(x, y) = std::clamp(acc, 0.0, 1.0);
        }
    }
    return out;
}

}  // namespace endovqa::raster::reference
