#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

/**
 * @file raster.hpp
 *
 * @brief Pixel containers and the filter/morphology kernels used by every
 * enhancement stage.
 *
 * The kernels in `endovqa::raster` are OpenMP-parallel over rows. Each has a
 * serial counterpart in `endovqa::raster::reference` (raster_reference.hpp)
 * that the tests and the benchmark compare against.
 */

namespace endovqa {

/// Row-major 8-bit image with 1 (gray) or 3 (RGB) interleaved channels.
class RasterImage {
public:
    RasterImage() = default;
    RasterImage(int width, int height, int channels, std::uint8_t fill = 0);
    RasterImage(int width, int height, int channels, std::vector<std::uint8_t> data);

    int width() const { return width_; }
    int height() const { return height_; }
    int channels() const { return channels_; }
    bool empty() const { return data_.empty(); }
    std::size_t pixel_count() const { return static_cast<std::size_t>(width_) * height_; }

    std::uint8_t& at(int x, int y, int c = 0) { return data_[index(x, y, c)]; }
    std::uint8_t at(int x, int y, int c = 0) const { return data_[index(x, y, c)]; }

    std::span<std::uint8_t> data() { return data_; }
    std::span<const std::uint8_t> data() const { return data_; }

    bool operator==(const RasterImage&) const = default;

private:
    std::size_t index(int x, int y, int c) const {
        return (static_cast<std::size_t>(y) * width_ + x) * channels_ + c;
    }

    int width_ = 0;
    int height_ = 0;
    int channels_ = 0;
    std::vector<std::uint8_t> data_;
};

/// Same-size boolean annotation of an image. Stored one byte per pixel so
/// rows can be written concurrently.
class BinaryMask {
public:
    BinaryMask() = default;
    BinaryMask(int width, int height, bool fill = false);

    int width() const { return width_; }
    int height() const { return height_; }
    std::size_t size() const { return data_.size(); }

    bool at(int x, int y) const { return data_[static_cast<std::size_t>(y) * width_ + x] != 0; }
    void set(int x, int y, bool v) { data_[static_cast<std::size_t>(y) * width_ + x] = v ? 1 : 0; }

    std::span<std::uint8_t> data() { return data_; }
    std::span<const std::uint8_t> data() const { return data_; }

    std::size_t count() const;
    bool any() const { return count() != 0; }
    BinaryMask complement() const;

    bool operator==(const BinaryMask&) const = default;

private:
    int width_ = 0;
    int height_ = 0;
    std::vector<std::uint8_t> data_;
};

/// Per-pixel blend weights in [0,1].
class SoftMask {
public:
    SoftMask() = default;
    SoftMask(int width, int height, double fill = 0.0);

    /// Hard 0/1 weights from a binary mask.
    static SoftMask from_binary(const BinaryMask& mask);

    int width() const { return width_; }
    int height() const { return height_; }

    double at(int x, int y) const { return data_[static_cast<std::size_t>(y) * width_ + x]; }
    double& at(int x, int y) { return data_[static_cast<std::size_t>(y) * width_ + x]; }

    std::span<double> data() { return data_; }
    std::span<const double> data() const { return data_; }

    /// Weights scaled to 0..255 and rounded, for debugging dumps.
    RasterImage quantized() const;

private:
    int width_ = 0;
    int height_ = 0;
    std::vector<double> data_;
};

struct Point {
    int x = 0;
    int y = 0;
    bool operator==(const Point&) const = default;
};

/// One 8-connected component of mask pixels, in scanline order.
struct Contour {
    std::vector<Point> pixels;
    std::size_t area() const { return pixels.size(); }
};

namespace raster {

/// ITU-R 601 luma, rounded. Single-channel input is returned unchanged.
RasterImage to_grayscale(const RasterImage& img);

/// True where intensity >= t, or < t when `inverse` is set. Multi-channel
/// input is converted to gray first.
BinaryMask threshold(const RasterImage& img, int t, bool inverse = false);

/**
 * Square k x k dilation. Out-of-bounds neighbours are false, so dilation
 * never grows a mask in from the border.
 *
 * @throws std::invalid_argument if k is even or < 1.
 */
BinaryMask dilate(const BinaryMask& mask, int k);

/**
 * Square k x k erosion. Out-of-bounds neighbours are true (the neutral
 * element for erosion), which keeps erode(m) == !dilate(!m) everywhere.
 *
 * @throws std::invalid_argument if k is even or < 1.
 */
BinaryMask erode(const BinaryMask& mask, int k);

/// erode followed by dilate with the same kernel.
BinaryMask open(const BinaryMask& mask, int k);

/// 8-connected components ordered by the scanline position of their first pixel.
std::vector<Contour> connected_components(const BinaryMask& mask);

/// `passes` rounds of a 3x3 mean filter with edge replication. Intermediate
/// values stay in double; the result is rounded once.
RasterImage box_blur_iterated(const RasterImage& img, int passes);

/// Normalized 1-D Gaussian of odd length k. The 2-D kernel is its outer product.
std::vector<double> gaussian_kernel_1d(int k, double sigma);

/// Default sigma for a k-tap feather kernel (k / 6).
inline double default_sigma(int k) { return k / 6.0; }

/**
 * Convolve the 0/1 mask with a normalized k x k Gaussian (edge replication).
 * Output weights are clamped into [0,1].
 *
 * @throws std::invalid_argument if k is even or < 1, or sigma <= 0.
 */
SoftMask gaussian_feather(const BinaryMask& mask, int k, double sigma);

}  // namespace raster
}  // namespace endovqa
