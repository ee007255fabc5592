#pragma once

#include <csetjmp>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include <jpeglib.h>
#include <png.h>

#include "nsn/error.hpp"
#include "nsn/image.hpp"

namespace nsn {

namespace detail {

struct FileCloser {
    void operator()(std::FILE* f) const noexcept {
        if (f) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

inline FilePtr open_file(const std::string& path, const char* mode) {
    std::FILE* f = std::fopen(path.c_str(), mode);
    if (!f) {
        if (mode[0] == 'r' && !std::filesystem::exists(path))
            raise(Errc::file_not_found, "no such file: " + path);
        raise(Errc::io_error, "cannot open " + path);
    }
    return FilePtr(f);
}

struct JpegErrorMgr {
    jpeg_error_mgr pub;
    std::jmp_buf setjmp_buffer;
    char message[JMSG_LENGTH_MAX];
};

inline void jpeg_error_exit(j_common_ptr cinfo) {
    auto* err = reinterpret_cast<JpegErrorMgr*>(cinfo->err);
    (*cinfo->err->format_message)(cinfo, err->message);
    std::longjmp(err->setjmp_buffer, 1);
}

inline bool has_png_signature(std::FILE* f) {
    unsigned char sig[8];
    std::size_t n = std::fread(sig, 1, 8, f);
    std::rewind(f);
    return n == 8 && png_sig_cmp(sig, 0, 8) == 0;
}

inline bool has_jpeg_signature(std::FILE* f) {
    unsigned char sig[2];
    std::size_t n = std::fread(sig, 1, 2, f);
    std::rewind(f);
    return n == 2 && sig[0] == 0xFF && sig[1] == 0xD8;
}

inline Image load_png_file(std::FILE* f, const std::string& path) {
    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) raise(Errc::decode_error, "png reader allocation failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_read_struct(&png, nullptr, nullptr);
        raise(Errc::decode_error, "png info allocation failed");
    }
    std::vector<png_bytep> row_ptrs;
    std::vector<unsigned char> data;
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        raise(Errc::decode_error, "corrupt or truncated png: " + path);
    }
    png_init_io(png, f);
    png_read_info(png, info);

    // Normalize every PNG variant to 8-bit RGB: expand palettes and
    // low-bit-depth grayscale, strip 16-bit channels down to 8, convert
    // grayscale to RGB, and drop any alpha channel.
    png_byte color_type = png_get_color_type(png, info);
    png_byte bit_depth = png_get_bit_depth(png, info);
    if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
    if (color_type == PNG_COLOR_TYPE_GRAY && bit_depth < 8) png_set_expand_gray_1_2_4_to_8(png);
    if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
    if (bit_depth == 16) png_set_strip_16(png);
    if (color_type == PNG_COLOR_TYPE_GRAY || color_type == PNG_COLOR_TYPE_GRAY_ALPHA)
        png_set_gray_to_rgb(png);
    png_set_strip_alpha(png);
    png_read_update_info(png, info);

    const int width = static_cast<int>(png_get_image_width(png, info));
    const int height = static_cast<int>(png_get_image_height(png, info));
    const std::size_t rowbytes = png_get_rowbytes(png, info);
    require(rowbytes == static_cast<std::size_t>(width) * 3, Errc::decode_error,
            "unexpected png row layout in " + path);

    data.resize(rowbytes * height);
    row_ptrs.resize(height);
    for (int y = 0; y < height; ++y) row_ptrs[y] = data.data() + rowbytes * y;
    png_read_image(png, row_ptrs.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);

    std::vector<Rgb> pixels(static_cast<std::size_t>(width) * height);
    for (std::size_t i = 0; i < pixels.size(); ++i)
        pixels[i] = Rgb{data[i * 3], data[i * 3 + 1], data[i * 3 + 2]};
    return Image(width, height, std::move(pixels));
}

inline Image load_jpeg_file(std::FILE* f, const std::string& path) {
    jpeg_decompress_struct cinfo;
    JpegErrorMgr jerr;
    cinfo.err = jpeg_std_error(&jerr.pub);
    jerr.pub.error_exit = jpeg_error_exit;
    if (setjmp(jerr.setjmp_buffer)) {
        jpeg_destroy_decompress(&cinfo);
        raise(Errc::decode_error, "corrupt or truncated jpeg: " + path + " (" + jerr.message + ")");
    }
    jpeg_create_decompress(&cinfo);
    jpeg_stdio_src(&cinfo, f);
    jpeg_read_header(&cinfo, TRUE);
    cinfo.out_color_space = JCS_RGB;  // grayscale and YCbCr both land on RGB
    jpeg_start_decompress(&cinfo);

    const int width = static_cast<int>(cinfo.output_width);
    const int height = static_cast<int>(cinfo.output_height);
    require(cinfo.output_components == 3, Errc::decode_error,
            "unexpected jpeg component count in " + path);

    std::vector<Rgb> pixels(static_cast<std::size_t>(width) * height);
    std::vector<unsigned char> row(static_cast<std::size_t>(width) * 3);
    unsigned char* row_ptr = row.data();
    while (cinfo.output_scanline < cinfo.output_height) {
        const int y = static_cast<int>(cinfo.output_scanline);
        jpeg_read_scanlines(&cinfo, &row_ptr, 1);
        for (int x = 0; x < width; ++x)
            pixels[static_cast<std::size_t>(y) * width + x] =
                Rgb{row[x * 3], row[x * 3 + 1], row[x * 3 + 2]};
    }
    jpeg_finish_decompress(&cinfo);
    jpeg_destroy_decompress(&cinfo);
    return Image(width, height, std::move(pixels));
}

}  // namespace detail

// Decodes a PNG or JPEG file to 8-bit RGB. The container is detected from the
// file's magic bytes, not its extension.
inline Image load_image(const std::string& path) {
    detail::FilePtr f = detail::open_file(path, "rb");
    if (detail::has_png_signature(f.get())) return detail::load_png_file(f.get(), path);
    if (detail::has_jpeg_signature(f.get())) return detail::load_jpeg_file(f.get(), path);
    raise(Errc::format_error, "not a png or jpeg file: " + path);
}

// Writes 8-bit RGB PNG with fixed settings so repeated saves of the same image
// are byte-identical.
inline void save_png(const Image& image, const std::string& path) {
    detail::FilePtr f = detail::open_file(path, "wb");
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) raise(Errc::io_error, "png writer allocation failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_write_struct(&png, nullptr);
        raise(Errc::io_error, "png info allocation failed");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        raise(Errc::io_error, "png write failed: " + path);
    }
    png_init_io(png, f.get());
    png_set_IHDR(png, info, static_cast<png_uint_32>(image.width()),
                 static_cast<png_uint_32>(image.height()), 8, PNG_COLOR_TYPE_RGB,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_set_compression_level(png, 6);
    png_write_info(png, info);

    std::vector<unsigned char> row(static_cast<std::size_t>(image.width()) * 3);
    for (int y = 0; y < image.height(); ++y) {
        for (int x = 0; x < image.width(); ++x) {
            const Rgb& p = image.at(x, y);
            row[x * 3] = p.r;
            row[x * 3 + 1] = p.g;
            row[x * 3 + 2] = p.b;
        }
        png_write_row(png, row.data());
    }
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

}  // namespace nsn
