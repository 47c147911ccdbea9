#include "endovqa/raster.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace endovqa {

namespace {

void check_dims(int width, int height) {
    if (width < 1 || height < 1) {
        throw std::invalid_argument("raster dimensions must be positive, got " +
                                    std::to_string(width) + "x" + std::to_string(height));
    }
}

void check_kernel(int k) {
    if (k < 1 || k % 2 == 0) {
        throw std::invalid_argument("kernel size must be odd and >= 1, got " + std::to_string(k));
    }
}

std::uint8_t round_u8(double v) {
    return static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
}

}  // namespace

RasterImage::RasterImage(int width, int height, int channels, std::uint8_t fill)
    : width_(width), height_(height), channels_(channels) {
    check_dims(width, height);
    if (channels != 1 && channels != 3) {
        throw std::invalid_argument("image must have 1 or 3 channels, got " + std::to_string(channels));
    }
    data_.assign(static_cast<std::size_t>(width) * height * channels, fill);
}

RasterImage::RasterImage(int width, int height, int channels, std::vector<std::uint8_t> data)
    : RasterImage(width, height, channels) {
    if (data.size() != data_.size()) {
        throw std::invalid_argument("pixel buffer has " + std::to_string(data.size()) +
                                    " bytes, expected " + std::to_string(data_.size()));
    }
    data_ = std::move(data);
}

BinaryMask::BinaryMask(int width, int height, bool fill) : width_(width), height_(height) {
    check_dims(width, height);
    data_.assign(static_cast<std::size_t>(width) * height, fill ? 1 : 0);
}

std::size_t BinaryMask::count() const {
    return static_cast<std::size_t>(std::count(data_.begin(), data_.end(), std::uint8_t{1}));
}

BinaryMask BinaryMask::complement() const {
    BinaryMask out = *this;
    for (auto& v : out.data_) v = v ? 0 : 1;
    return out;
}

SoftMask::SoftMask(int width, int height, double fill) : width_(width), height_(height) {
    check_dims(width, height);
    data_.assign(static_cast<std::size_t>(width) * height, fill);
}

SoftMask SoftMask::from_binary(const BinaryMask& mask) {
    SoftMask out(mask.width(), mask.height());
    auto src = mask.data();
    std::transform(src.begin(), src.end(), out.data_.begin(),
                   [](std::uint8_t v) { return v ? 1.0 : 0.0; });
    return out;
}

RasterImage SoftMask::quantized() const {
    RasterImage out(width_, height_, 1);
    auto dst = out.data();
    for (std::size_t i = 0; i < data_.size(); ++i) dst[i] = round_u8(data_[i] * 255.0);
    return out;
}

namespace raster {

RasterImage to_grayscale(const RasterImage& img) {
    if (img.channels() == 1) return img;
    RasterImage out(img.width(), img.height(), 1);
    const auto src = img.data();
    auto dst = out.data();
    const auto n = static_cast<std::ptrdiff_t>(img.pixel_count());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        const auto* p = &src[static_cast<std::size_t>(i) * 3];
        dst[i] = round_u8(0.299 * p[0] + 0.587 * p[1] + 0.114 * p[2]);
    }
    return out;
}

BinaryMask threshold(const RasterImage& img, int t, bool inverse) {
    if (t < 0 || t > 255) throw std::invalid_argument("threshold must be in [0,255]");
    const RasterImage gray = to_grayscale(img);
    BinaryMask out(img.width(), img.height());
    const auto src = gray.data();
    auto dst = out.data();
    const auto n = static_cast<std::ptrdiff_t>(src.size());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        const bool above = src[i] >= t;
        dst[i] = (above != inverse) ? 1 : 0;
    }
    return out;
}

namespace {

// Square structuring elements are separable: a k x k min/max is a k-wide
// horizontal pass followed by a k-tall vertical pass. `border` is the value
// assumed outside the image.
BinaryMask morph(const BinaryMask& mask, int k, bool dilation) {
    check_kernel(k);
    const int w = mask.width();
    const int h = mask.height();
    const int r = k / 2;
    const std::uint8_t border = dilation ? 0 : 1;
    const auto src = mask.data();
    std::vector<std::uint8_t> tmp(src.size());

#pragma omp parallel for schedule(static)
    for (int y = 0; y < h; ++y) {
        const std::uint8_t* row = &src[static_cast<std::size_t>(y) * w];
        std::uint8_t* out = &tmp[static_cast<std::size_t>(y) * w];
        for (int x = 0; x < w; ++x) {
            std::uint8_t acc = dilation ? 0 : 1;
            for (int dx = -r; dx <= r; ++dx) {
                const int xx = x + dx;
                const std::uint8_t v = (xx < 0 || xx >= w) ? border : row[xx];
                acc = dilation ? (acc | v) : (acc & v);
            }
            out[x] = acc;
        }
    }

    BinaryMask result(w, h);
    auto dst = result.data();
#pragma omp parallel for schedule(static)
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            std::uint8_t acc = dilation ? 0 : 1;
            for (int dy = -r; dy <= r; ++dy) {
                const int yy = y + dy;
                const std::uint8_t v =
                    (yy < 0 || yy >= h) ? border : tmp[static_cast<std::size_t>(yy) * w + x];
                acc = dilation ? (acc | v) : (acc & v);
            }
            dst[static_cast<std::size_t>(y) * w + x] = acc;
        }
    }
    return result;
}

}  // namespace

BinaryMask dilate(const BinaryMask& mask, int k) { return morph(mask, k, true); }

BinaryMask erode(const BinaryMask& mask, int k) { return morph(mask, k, false); }

BinaryMask open(const BinaryMask& mask, int k) { return dilate(erode(mask, k), k); }

std::vector<Contour> connected_components(const BinaryMask& mask) {
    const int w = mask.width();
    const int h = mask.height();
    std::vector<std::uint8_t> seen(mask.size(), 0);
    std::vector<Contour> out;
    std::vector<Point> stack;

    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const std::size_t idx = static_cast<std::size_t>(y) * w + x;
            if (!mask.at(x, y) || seen[idx]) continue;
            Contour c;
            seen[idx] = 1;
            stack.push_back({x, y});
            while (!stack.empty()) {
                const Point p = stack.back();
                stack.pop_back();
                c.pixels.push_back(p);
                for (int dy = -1; dy <= 1; ++dy) {
                    for (int dx = -1; dx <= 1; ++dx) {
                        const int nx = p.x + dx;
                        const int ny = p.y + dy;
                        if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
                        const std::size_t nidx = static_cast<std::size_t>(ny) * w + nx;
                        if (mask.at(nx, ny) && !seen[nidx]) {
                            seen[nidx] = 1;
                            stack.push_back({nx, ny});
                        }
                    }
                }
            }
            std::sort(c.pixels.begin(), c.pixels.end(), [](Point a, Point b) {
                return a.y != b.y ? a.y < b.y : a.x < b.x;
            });
            out.push_back(std::move(c));
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
    const auto src = img.data();
    std::vector<double> cur(src.begin(), src.end());
    std::vector<double> next(cur.size());

    for (int pass = 0; pass < passes; ++pass) {
#pragma omp parallel for schedule(static)
        for (int y = 0; y < h; ++y) {
            const int rows[3] = {std::max(y - 1, 0), y, std::min(y + 1, h - 1)};
            for (int x = 0; x < w; ++x) {
                const int cols[3] = {std::max(x - 1, 0), x, std::min(x + 1, w - 1)};
                for (int c = 0; c < ch; ++c) {
                    double sum = 0.0;
                    for (int ry : rows) {
                        const double* row = &cur[static_cast<std::size_t>(ry) * w * ch];
                        for (int cx : cols) sum += row[cx * ch + c];
                    }
                    next[(static_cast<std::size_t>(y) * w + x) * ch + c] = sum / 9.0;
                }
            }
        }
        cur.swap(next);
    }

    RasterImage out(w, h, ch);
    auto dst = out.data();
    for (std::size_t i = 0; i < cur.size(); ++i) dst[i] = round_u8(cur[i]);
    return out;
}

std::vector<double> gaussian_kernel_1d(int k, double sigma) {
    check_kernel(k);
    if (!(sigma > 0.0)) throw std::invalid_argument("gaussian sigma must be positive");
    const int r = k / 2;
    std::vector<double> g(static_cast<std::size_t>(k));
    double sum = 0.0;
    for (int i = -r; i <= r; ++i) {
        g[static_cast<std::size_t>(i + r)] = std::exp(-(i * i) / (2.0 * sigma * sigma));
        sum += g[static_cast<std::size_t>(i + r)];
    }
    for (auto& v : g) v /= sum;
    return g;
}

SoftMask gaussian_feather(const BinaryMask& mask, int k, double sigma) {
    const std::vector<double> g = gaussian_kernel_1d(k, sigma);
    const int w = mask.width();
    const int h = mask.height();
    const int r = k / 2;
    const auto src = mask.data();
    std::vector<double> tmp(src.size());

#pragma omp parallel for schedule(static)
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            double acc = 0.0;
            for (int i = -r; i <= r; ++i) {
                const int xx = std::clamp(x + i, 0, w - 1);
                if (src[static_cast<std::size_t>(y) * w + xx]) acc += g[static_cast<std::size_t>(i + r)];
            }
            tmp[static_cast<std::size_t>(y) * w + x] = acc;
        }
    }

    SoftMask out(w, h);
    auto dst = out.data();
#pragma omp parallel for schedule(static)
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            double acc = 0.0;
            for (int i = -r; i <= r; ++i) {
                const int yy = std::clamp(y + i, 0, h - 1);
                acc += g[static_cast<std::size_t>(i + r)] * tmp[static_cast<std::size_t>(yy) * w + x];
            }
            dst[static_cast<std::size_t>(y) * w + x] = std::clamp(acc, 0.0, 1.0);
        }
    }
    return out;
}

}  // namespace raster
}  // namespace endovqa
