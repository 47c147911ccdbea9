#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>

#include <jpeglib.h>

#include "endovqa/error.hpp"
#include "endovqa/image_io.hpp"
#include "support/synthetic.hpp"

using namespace endovqa;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const auto dir = fs::temp_directory_path() / "endovqa_test_image_io";
    fs::create_directories(dir);
    return dir / name;
}

void write_jpeg(const RasterImage& img, const fs::path& path) {
    jpeg_compress_struct cinfo;
    jpeg_error_mgr jerr;
    cinfo.err = jpeg_std_error(&jerr);
    jpeg_create_compress(&cinfo);
    FILE* f = std::fopen(path.c_str(), "wb");
    REQUIRE(f);
    jpeg_stdio_dest(&cinfo, f);
    cinfo.image_width = static_cast<JDIMENSION>(img.width());
    cinfo.image_height = static_cast<JDIMENSION>(img.height());
    cinfo.input_components = img.channels();
    cinfo.in_color_space = img.channels() == 3 ? JCS_RGB : JCS_GRAYSCALE;
    jpeg_set_defaults(&cinfo);
    jpeg_set_quality(&cinfo, 100, TRUE);
    jpeg_start_compress(&cinfo, TRUE);
    while (cinfo.next_scanline < cinfo.image_height) {
        JSAMPROW row = const_cast<JSAMPROW>(img.data().data() + static_cast<std::size_t>(cinfo.next_scanline) *
                                                                   img.width() * img.channels());
        jpeg_write_scanlines(&cinfo, &row, 1);
    }
    jpeg_finish_compress(&cinfo);
    jpeg_destroy_compress(&cinfo);
    std::fclose(f);
}

}  // namespace

TEST_CASE("png round trip is lossless") {
    std::mt19937_64 rng(1);
    for (int ch : {1, 3}) {
        const auto img = synth::random_image(rng, 8, 8, ch);
        const auto p = scratch("rt" + std::to_string(ch) + ".png");
        save_image(img, p);
        CHECK(load_image(p) == img);
    }
    const RasterImage tiny(1, 1, 3, 200);
    save_image(tiny, scratch("tiny.png"));
    const auto back = load_image(scratch("tiny.png"));
    CHECK(back.width() == 1);
    CHECK(back.height() == 1);
    CHECK(back == tiny);
}

TEST_CASE("png bytes depend only on pixels") {
    std::mt19937_64 rng(2);
    const auto img = synth::random_image(rng, 13, 9, 3);
    save_image(img, scratch("a.png"));
    save_image(img, scratch("b.png"));
    auto slurp = [](const fs::path& p) {
        std::ifstream in(p, std::ios::binary);
        return std::string(std::istreambuf_iterator<char>(in), {});
    };
    CHECK(slurp(scratch("a.png")) == slurp(scratch("b.png")));
}

TEST_CASE("mask export uses 0 and 255") {
    BinaryMask m(3, 2);
    m.set(1, 1, true);
    save_mask(m, scratch("mask.png"));
    const auto img = load_image(scratch("mask.png"));
    CHECK(img.channels() == 1);
    CHECK(img.at(1, 1) == 255);
    CHECK(img.at(0, 0) == 0);
}

TEST_CASE("jpeg is readable") {
    const RasterImage flat(16, 12, 3, 128);
    write_jpeg(flat, scratch("flat.jpg"));
    const auto img = load_image(scratch("flat.jpg"));
    CHECK(img.width() == 16);
    CHECK(img.height() == 12);
    CHECK(img.channels() == 3);
    for (auto v : img.data()) CHECK(std::abs(int(v) - 128) <= 2);
}

TEST_CASE("load errors name the path") {
    const auto missing = scratch("does_not_exist.png");
    try {
        load_image(missing);
        FAIL("expected DataError");
    } catch (const DataError& e) {
        CHECK(std::string(e.what()).find("does_not_exist.png") != std::string::npos);
    }
    const auto junk = scratch("junk.png");
    std::ofstream(junk) << "not an image";
    CHECK_THROWS_AS(load_image(junk), DataError);
    const auto truncated = scratch("truncated.png");
    {
        std::mt19937_64 rng(3);
        save_image(synth::random_image(rng, 32, 32, 3), truncated);
        fs::resize_file(truncated, 60);
    }
    CHECK_THROWS_AS(load_image(truncated), DataError);
}
