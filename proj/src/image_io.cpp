#include "endovqa/image_io.hpp"

#include <csetjmp>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>
#include <string>

#include <jpeglib.h>
#include <png.h>

#include "endovqa/error.hpp"

namespace endovqa {

namespace {

std::string describe(const std::filesystem::path& path) { return "'" + path.string() + "'"; }

enum class Format { Png, Jpeg, Unknown };

Format sniff(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open image " + describe(path));
    unsigned char sig[8] = {};
    in.read(reinterpret_cast<char*>(sig), sizeof sig);
    if (in.gcount() >= 8 && png_sig_cmp(sig, 0, 8) == 0) return Format::Png;
    if (in.gcount() >= 3 && sig[0] == 0xFF && sig[1] == 0xD8 && sig[2] == 0xFF) return Format::Jpeg;
    return Format::Unknown;
}

RasterImage load_png(const std::filesystem::path& path) {
    png_image image;
    std::memset(&image, 0, sizeof image);
    image.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_file(&image, path.c_str())) {
        throw DataError("cannot decode PNG " + describe(path) + ": " + image.message);
    }
    const bool color = (image.format & PNG_FORMAT_FLAG_COLOR) != 0;
    image.format = color ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
    const int channels = color ? 3 : 1;
    std::vector<std::uint8_t> buf(PNG_IMAGE_SIZE(image), 0);
    if (!png_image_finish_read(&image, nullptr, buf.data(), 0, nullptr)) {
        std::string msg = image.message;
        png_image_free(&image);
        throw DataError("cannot decode PNG " + describe(path) + ": " + msg);
    }
    return RasterImage(static_cast<int>(image.width), static_cast<int>(image.height), channels,
                       std::move(buf));
}

struct JpegErrorManager {
    jpeg_error_mgr base;
    std::jmp_buf jump;
    char message[JMSG_LENGTH_MAX];
};

void jpeg_error_exit(j_common_ptr cinfo) {
    auto* err = reinterpret_cast<JpegErrorManager*>(cinfo->err);
    (*cinfo->err->format_message)(cinfo, err->message);
    std::longjmp(err->jump, 1);
}

// Decodes into caller-owned storage; returns false with `err.message` set on
// failure. Kept free of C++ objects with destructors because of longjmp.
bool decode_jpeg(std::FILE* file, JpegErrorManager& err, std::vector<std::uint8_t>& buf,
                 int& width, int& height, int& channels) {
    jpeg_decompress_struct cinfo;
    cinfo.err = jpeg_std_error(&err.base);
    err.base.error_exit = jpeg_error_exit;
    if (setjmp(err.jump)) {
        jpeg_destroy_decompress(&cinfo);
        return false;
    }
    jpeg_create_decompress(&cinfo);
    jpeg_stdio_src(&cinfo, file);
    jpeg_read_header(&cinfo, TRUE);
    cinfo.out_color_space = cinfo.num_components == 1 ? JCS_GRAYSCALE : JCS_RGB;
    jpeg_start_decompress(&cinfo);
    width = static_cast<int>(cinfo.output_width);
    height = static_cast<int>(cinfo.output_height);
    channels = cinfo.output_components;
    buf.resize(static_cast<std::size_t>(width) * height * channels);
    while (cinfo.output_scanline < cinfo.output_height) {
        JSAMPROW row = &buf[static_cast<std::size_t>(cinfo.output_scanline) * width * channels];
        jpeg_read_scanlines(&cinfo, &row, 1);
    }
    jpeg_finish_decompress(&cinfo);
    jpeg_destroy_decompress(&cinfo);
    return true;
}

RasterImage load_jpeg(const std::filesystem::path& path) {
    std::unique_ptr<std::FILE, int (*)(std::FILE*)> file(std::fopen(path.c_str(), "rb"), &std::fclose);
    if (!file) throw DataError("cannot open image " + describe(path));
    JpegErrorManager err{};
    std::vector<std::uint8_t> buf;
    int width = 0, height = 0, channels = 0;
    if (!decode_jpeg(file.get(), err, buf, width, height, channels)) {
        throw DataError("cannot decode JPEG " + describe(path) + ": " + err.message);
    }
    if (channels != 1 && channels != 3) {
        throw DataError("unsupported JPEG channel count in " + describe(path));
    }
    return RasterImage(width, height, channels, std::move(buf));
}

}  // namespace

RasterImage load_image(const std::filesystem::path& path) {
    switch (sniff(path)) {
        case Format::Png: return load_png(path);
        case Format::Jpeg: return load_jpeg(path);
        case Format::Unknown: break;
    }
    throw DataError("unrecognized image format in " + describe(path));
}

void save_image(const RasterImage& img, const std::filesystem::path& path) {
    if (img.empty()) throw std::invalid_argument("cannot save an empty image");
    png_image image;
    std::memset(&image, 0, sizeof image);
    image.version = PNG_IMAGE_VERSION;
    image.width = static_cast<png_uint_32>(img.width());
    image.height = static_cast<png_uint_32>(img.height());
    image.format = img.channels() == 3 ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
    if (!png_image_write_to_file(&image, path.c_str(), 0, img.data().data(), 0, nullptr)) {
        throw DataError("cannot write PNG " + describe(path) + ": " + image.message);
    }
}

void save_mask(const BinaryMask& mask, const std::filesystem::path& path) {
    RasterImage img(mask.width(), mask.height(), 1);
    const auto src = mask.data();
    auto dst = img.data();
    for (std::size_t i = 0; i < src.size(); ++i) dst[i] = src[i] ? 255 : 0;
    save_image(img, path);
}

}  // namespace endovqa
