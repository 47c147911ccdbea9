#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "endovqa/raster.hpp"
#include "endovqa/raster_reference.hpp"
#include "support/synthetic.hpp"

using namespace endovqa;

namespace {

BinaryMask single_pixel(int side, int x, int y) {
    BinaryMask m(side, side);
    m.set(x, y, true);
    return m;
}

bool interior_equal(const BinaryMask& a, const BinaryMask& b, int inset) {
    for (int y = inset; y < a.height() - inset; ++y)
        for (int x = inset; x < a.width() - inset; ++x)
            if (a.at(x, y) != b.at(x, y)) return false;
    return true;
}

}  // namespace

TEST_CASE("grayscale luma") {
    RasterImage img(3, 1, 3);
    const std::uint8_t px[3][3] = {{255, 255, 255}, {0, 0, 0}, {100, 150, 200}};
    for (int x = 0; x < 3; ++x)
        for (int c = 0; c < 3; ++c) img.at(x, 0, c) = px[x][c];
    const auto g = raster::to_grayscale(img);
    CHECK(g.channels() == 1);
    CHECK(g.at(0, 0) == 255);
    CHECK(g.at(1, 0) == 0);
    CHECK(g.at(2, 0) == 141);

    RasterImage gray(4, 4, 1, 77);
    CHECK(raster::to_grayscale(gray) == gray);
}

TEST_CASE("threshold boundaries") {
    RasterImage img(4, 1, 1, std::vector<std::uint8_t>{100, 229, 230, 255});
    const auto m = raster::threshold(img, 230);
    CHECK_FALSE(m.at(0, 0));
    CHECK_FALSE(m.at(1, 0));
    CHECK(m.at(2, 0));
    CHECK(m.at(3, 0));
    const auto inv = raster::threshold(img, 230, true);
    CHECK(inv == m.complement());

    CHECK_FALSE(raster::threshold(RasterImage(5, 5, 1, 0), 230).any());
    CHECK(raster::threshold(RasterImage(5, 5, 1, 255), 230).count() == 25);
}

TEST_CASE("dilate and erode hand examples") {
    CHECK_FALSE(raster::dilate(BinaryMask(11, 11), 3).any());

    const auto block = raster::dilate(single_pixel(11, 5, 5), 3);
    CHECK(block.count() == 9);
    for (int y = 4; y <= 6; ++y)
        for (int x = 4; x <= 6; ++x) CHECK(block.at(x, y));

    CHECK(raster::erode(block, 3) == single_pixel(11, 5, 5));
    CHECK_THROWS_AS(raster::dilate(block, 2), std::invalid_argument);
    CHECK_THROWS_AS(raster::erode(block, 0), std::invalid_argument);
}

TEST_CASE("morphology does not grow from the border") {
    BinaryMask m(6, 6);
    m.set(0, 0, true);
    const auto d = raster::dilate(m, 3);
    CHECK(d.count() == 4);
    BinaryMask full(6, 6, true);
    CHECK(raster::erode(full, 3) == full);
}

TEST_CASE("property: duality and monotonicity") {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 200; ++trial) {
        const int w = 3 + static_cast<int>(rng() % 30);
        const int h = 3 + static_cast<int>(rng() % 30);
        const int k = 1 + 2 * static_cast<int>(rng() % 3);
        const auto m = synth::random_mask(rng, w, h, 0.1 + 0.8 * (rng() % 100) / 100.0);
        const auto d = raster::dilate(m, k);
        const auto e = raster::erode(m, k);
        CHECK(raster::erode(m.complement(), k) == d.complement());
        CHECK(interior_equal(raster::erode(m.complement(), k), d.complement(), k));
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                if (m.at(x, y)) CHECK(d.at(x, y));
                if (e.at(x, y)) CHECK(m.at(x, y));
            }
        }
    }
}

TEST_CASE("property: single pixel dilate then erode round trip") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 50; ++trial) {
        const int x = 2 + static_cast<int>(rng() % 12);
        const int y = 2 + static_cast<int>(rng() % 12);
        const auto m = single_pixel(16, x, y);
        CHECK(raster::erode(raster::dilate(m, 3), 3) == m);
    }
}

TEST_CASE("connected components") {
    CHECK(raster::connected_components(BinaryMask(5, 5)).empty());

    BinaryMask diag(4, 4);
    diag.set(1, 1, true);
    diag.set(2, 2, true);
    const auto one = raster::connected_components(diag);
    REQUIRE(one.size() == 1);
    CHECK(one[0].area() == 2);

    BinaryMask gap(5, 1);
    gap.set(1, 0, true);
    gap.set(3, 0, true);
    const auto two = raster::connected_components(gap);
    REQUIRE(two.size() == 2);
    CHECK(two[0].area() == 1);
    CHECK(two[0].pixels[0] == Point{1, 0});
    CHECK(two[1].pixels[0] == Point{3, 0});
}

TEST_CASE("property: component areas partition the mask") {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 100; ++trial) {
        const auto m = synth::random_mask(rng, 1 + static_cast<int>(rng() % 40), 1 + static_cast<int>(rng() % 40), 0.35);
        const auto cs = raster::connected_components(m);
        std::size_t total = 0;
        BinaryMask seen(m.width(), m.height());
        for (const auto& c : cs) {
            total += c.area();
            for (const auto& p : c.pixels) {
                CHECK(m.at(p.x, p.y));
                CHECK_FALSE(seen.at(p.x, p.y));
                seen.set(p.x, p.y, true);
            }
        }
        CHECK(total == m.count());
        for (std::size_t i = 1; i < cs.size(); ++i) {
            const auto& a = cs[i - 1].pixels[0];
            const auto& b = cs[i].pixels[0];
            CHECK((a.y < b.y || (a.y == b.y && a.x < b.x)));
        }
    }
}

TEST_CASE("box blur") {
    std::mt19937_64 rng(5);
    const auto img = synth::random_image(rng, 9, 7, 3);
    CHECK(raster::box_blur_iterated(img, 0) == img);
    RasterImage flat(6, 6, 3, 42);
    CHECK(raster::box_blur_iterated(flat, 4) == flat);

    RasterImage spot(5, 5, 1, 0);
    spot.at(2, 2) = 9;
    const auto b = raster::box_blur_iterated(spot, 1);
    for (int y = 1; y <= 3; ++y)
        for (int x = 1; x <= 3; ++x) CHECK(b.at(x, y) == 1);
    CHECK(b.at(0, 0) == 0);
}

TEST_CASE("property: box blur stays within input range") {
    std::mt19937_64 rng(13);
    for (int trial = 0; trial < 60; ++trial) {
        const auto img = synth::random_image(rng, 1 + static_cast<int>(rng() % 20), 1 + static_cast<int>(rng() % 20), 1);
        const auto [lo, hi] = std::minmax_element(img.data().begin(), img.data().end());
        const auto out = raster::box_blur_iterated(img, 1 + static_cast<int>(rng() % 6));
        for (auto v : out.data()) {
            CHECK(v >= *lo);
            CHECK(v <= *hi);
        }
    }
}

TEST_CASE("gaussian kernel and feather") {
    for (int k : {1, 3, 7, 19, 31}) {
        const auto g = raster::gaussian_kernel_1d(k, raster::default_sigma(k));
        double s2 = 0.0;
        for (double a : g)
            for (double b : g) s2 += a * b;
        CHECK(std::abs(std::accumulate(g.begin(), g.end(), 0.0) - 1.0) < 1e-9);
        CHECK(std::abs(s2 - 1.0) < 1e-9);
    }
    CHECK_THROWS_AS(raster::gaussian_feather(BinaryMask(5, 5), 4, 1.0), std::invalid_argument);

    const auto zero = raster::gaussian_feather(BinaryMask(25, 25), 19, raster::default_sigma(19));
    CHECK(std::all_of(zero.data().begin(), zero.data().end(), [](double v) { return v == 0.0; }));
    const auto one = raster::gaussian_feather(BinaryMask(25, 25, true), 19, raster::default_sigma(19));
    CHECK(std::all_of(one.data().begin(), one.data().end(), [](double v) { return std::abs(v - 1.0) < 1e-12; }));

    BinaryMask dot(41, 41);
    dot.set(20, 20, true);
    const auto g = raster::gaussian_kernel_1d(19, raster::default_sigma(19));
    const auto f = raster::gaussian_feather(dot, 19, raster::default_sigma(19));
    CHECK(f.at(20, 20) == doctest::Approx(g[9] * g[9]).epsilon(1e-12));
    CHECK(f.at(20 + 10, 20) == 0.0);
}

TEST_CASE("parallel kernels match the serial reference") {
    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 25; ++trial) {
        const int w = 1 + static_cast<int>(rng() % 48);
        const int h = 1 + static_cast<int>(rng() % 48);
        const auto img = synth::random_image(rng, w, h, 3);
        const auto m = synth::random_mask(rng, w, h, 0.3);
        const int t = static_cast<int>(rng() % 256);
        CHECK(raster::to_grayscale(img) == raster::reference::to_grayscale(img));
        CHECK(raster::threshold(img, t, trial % 2) == raster::reference::threshold(img, t, trial % 2));
        CHECK(raster::dilate(m, 3) == raster::reference::dilate(m, 3));
        CHECK(raster::erode(m, 5) == raster::reference::erode(m, 5));
        CHECK(raster::box_blur_iterated(img, 3) == raster::reference::box_blur_iterated(img, 3));
        const auto a = raster::gaussian_feather(m, 7, 1.5);
        const auto b = raster::reference::gaussian_feather(m, 7, 1.5);
        for (std::size_t i = 0; i < a.data().size(); ++i) CHECK(std::abs(a.data()[i] - b.data()[i]) < 1e-12);
    }
}
