#include <random>

#include <benchmark/benchmark.h>

#include "endovqa/blackmask.hpp"
#include "endovqa/raster.hpp"
#include "endovqa/raster_reference.hpp"

using namespace endovqa;

namespace {

RasterImage noise_image(int side) {
    std::mt19937_64 rng(1);
    RasterImage img(side, side, 3);
    for (auto& v : img.data()) v = static_cast<std::uint8_t>(rng());
    return img;
}

BinaryMask noise_mask(int side) {
    std::mt19937_64 rng(2);
    BinaryMask m(side, side);
    for (auto& v : m.data()) v = rng() % 7 == 0;
    return m;
}

void BM_BoxBlur(benchmark::State& state) {
    const auto img = noise_image(static_cast<int>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(raster::box_blur_iterated(img, 5));
}

void BM_BoxBlurReference(benchmark::State& state) {
    const auto img = noise_image(static_cast<int>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(raster::reference::box_blur_iterated(img, 5));
}

void BM_Feather(benchmark::State& state) {
    const auto m = noise_mask(static_cast<int>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(raster::gaussian_feather(m, 19, raster::default_sigma(19)));
}

void BM_FeatherReference(benchmark::State& state) {
    const auto m = noise_mask(static_cast<int>(state.range(0)));
    for (auto _ : state)
        benchmark::DoNotOptimize(raster::reference::gaussian_feather(m, 19, raster::default_sigma(19)));
}

void BM_Dilate(benchmark::State& state) {
    const auto m = noise_mask(static_cast<int>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(raster::dilate(m, 3));
}

void BM_DilateReference(benchmark::State& state) {
    const auto m = noise_mask(static_cast<int>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(raster::reference::dilate(m, 3));
}

void BM_Grayscale(benchmark::State& state) {
    const auto img = noise_image(static_cast<int>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(raster::to_grayscale(img));
}

void BM_GrayscaleReference(benchmark::State& state) {
    const auto img = noise_image(static_cast<int>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(raster::reference::to_grayscale(img));
}

void BM_Enhance(benchmark::State& state) {
    const int side = static_cast<int>(state.range(0));
    RasterImage img(side, side, 3, 110);
    for (int y = 0; y < side; ++y)
        for (int x = 0; x < side; ++x) {
            const bool frame = x < 12 || y < 12 || x >= side - 12 || y >= side - 12;
            const bool spot = (x / 9 + y / 9) % 11 == 0 && x % 9 < 3 && y % 9 < 3;
            for (int c = 0; c < 3; ++c) img.at(x, y, c) = frame ? 0 : spot ? 250 : 110;
        }
    for (auto _ : state) benchmark::DoNotOptimize(blackmask::enhance(img));
}

}  // namespace

BENCHMARK(BM_BoxBlur)->Arg(256)->Arg(1024)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_BoxBlurReference)->Arg(256)->Arg(1024)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Feather)->Arg(256)->Arg(1024)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_FeatherReference)->Arg(256)->Arg(1024)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Dilate)->Arg(256)->Arg(1024)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_DilateReference)->Arg(256)->Arg(1024)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Grayscale)->Arg(256)->Arg(1024)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_GrayscaleReference)->Arg(256)->Arg(1024)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Enhance)->Arg(256)->Arg(512)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
