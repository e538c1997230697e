// SPDX-License-Identifier: Apache-2.0
#include "vistrace/image/codec.hpp"

#include "vistrace/core/encoding.hpp"
#include "vistrace/core/error.hpp"

#include <csetjmp>
#include <cstdio>
#include <fstream>
#include <iterator>

#include <fmt/core.h>
#include <jpeglib.h>
#include <png.h>

namespace vistrace::image {

namespace {

bool is_png(std::span<const std::uint8_t> b) {
    static constexpr std::uint8_t kSig[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1A, '\n'};
    return b.size() >= 8 && std::equal(std::begin(kSig), std::end(kSig), b.begin());
}

bool is_jpeg(std::span<const std::uint8_t> b) {
    return b.size() >= 3 && b[0] == 0xFF && b[1] == 0xD8 && b[2] == 0xFF;
}

ImageData decode_png(std::span<const std::uint8_t> bytes) {
    png_image png{};
    png.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_memory(&png, bytes.data(), bytes.size()))
        throw InvalidArgument(fmt::format("png decode failed: {}", png.message));

    const bool alpha = (png.format & PNG_FORMAT_FLAG_ALPHA) != 0;
    png.format = alpha ? PNG_FORMAT_RGBA : PNG_FORMAT_RGB;
    ImageData img(static_cast<int>(png.width), static_cast<int>(png.height), alpha ? 4 : 3);
    if (!png_image_finish_read(&png, nullptr, img.pixels.data(), 0, nullptr)) {
        std::string msg = png.message;
        png_image_free(&png);
        throw InvalidArgument("png decode failed: " + msg);
    }
    return img;
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

ImageData decode_jpeg(std::span<const std::uint8_t> bytes) {
    jpeg_decompress_struct cinfo{};
    JpegErrorManager err{};
    cinfo.err = jpeg_std_error(&err.base);
    err.base.error_exit = jpeg_error_exit;

    // Everything touched after setjmp lives outside this frame's locals or is trivially destructible.
    auto* img = new ImageData();
    if (setjmp(err.jump)) {
        jpeg_destroy_decompress(&cinfo);
        delete img;
        throw InvalidArgument(fmt::format("jpeg decode failed: {}", err.message));
    }
    jpeg_create_decompress(&cinfo);
    jpeg_mem_src(&cinfo, bytes.data(), static_cast<unsigned long>(bytes.size()));
    jpeg_read_header(&cinfo, TRUE);
    cinfo.out_color_space = JCS_RGB;
    jpeg_start_decompress(&cinfo);

    *img = ImageData(static_cast<int>(cinfo.output_width), static_cast<int>(cinfo.output_height), 3);
    const auto stride = static_cast<std::size_t>(cinfo.output_width) * 3;
    while (cinfo.output_scanline < cinfo.output_height) {
        JSAMPROW row = img->pixels.data() + static_cast<std::size_t>(cinfo.output_scanline) * stride;
        jpeg_read_scanlines(&cinfo, &row, 1);
    }
    jpeg_finish_decompress(&cinfo);
    jpeg_destroy_decompress(&cinfo);

    ImageData out = std::move(*img);
    delete img;
    return out;
}

} // namespace

std::vector<std::uint8_t> encode_png(const ImageData& img) {
    if (!img.valid()) throw InvalidArgument("cannot encode an invalid image");
    png_image png{};
    png.version = PNG_IMAGE_VERSION;
    png.width = static_cast<png_uint_32>(img.width);
    png.height = static_cast<png_uint_32>(img.height);
    png.format = img.channels == 4 ? PNG_FORMAT_RGBA : PNG_FORMAT_RGB;

    png_alloc_size_t size = 0;
    if (!png_image_write_to_memory(&png, nullptr, &size, 0, img.pixels.data(), 0, nullptr))
        throw InvalidArgument(fmt::format("png encode failed: {}", png.message));
    std::vector<std::uint8_t> out(size);
    if (!png_image_write_to_memory(&png, out.data(), &size, 0, img.pixels.data(), 0, nullptr))
        throw InvalidArgument(fmt::format("png encode failed: {}", png.message));
    out.resize(size);
    return out;
}

ImageData decode(std::span<const std::uint8_t> bytes) {
    if (is_png(bytes)) return decode_png(bytes);
    if (is_jpeg(bytes)) return decode_jpeg(bytes);
    throw InvalidArgument("unsupported image format (expected PNG or JPEG)");
}

std::string to_png_base64(const ImageData& img) { return base64_encode(encode_png(img)); }

ImageData from_base64(std::string_view b64) {
    const auto bytes = base64_decode(b64);
    return decode(bytes);
}

ImageData read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError(fmt::format("cannot open image '{}'", path.string()));
    std::vector<std::uint8_t> bytes{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
    return decode(bytes);
}

void write_png(const std::filesystem::path& path, const ImageData& img) {
    const auto bytes = encode_png(img);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError(fmt::format("cannot write '{}'", path.string()));
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError(fmt::format("short write to '{}'", path.string()));
}

} // namespace vistrace::image
