#pragma once

#include "endovqa/raster.hpp"

// Straightforward single-threaded versions of the raster kernels. They are
// written for clarity (direct k x k windows, no separable passes) and serve as
// the oracle for the parallel kernels in tests and benchmarks.

namespace endovqa::raster::reference {

RasterImage to_grayscale(const RasterImage& img);
BinaryMask threshold(const RasterImage& img, int t, bool inverse = false);
BinaryMask dilate(const BinaryMask& mask, int k);
BinaryMask erode(const BinaryMask& mask, int k);
RasterImage box_blur_iterated(const RasterImage& img, int passes);

// Direct 2-D convolution with the outer-product kernel. Matches the
// separable kernel to within floating-point reassociation (~1e-15).
SoftMask gaussian_feather(const BinaryMask& mask, int k, double sigma);

}  // namespace endovqa::raster::reference
