#include "pclwater/io.hpp"

#include <png.h>

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>
#include <vector>

namespace pclwater {

namespace {

struct FileCloser {
    void operator()(std::FILE* f) const {
        if (f) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

ByteRaster read_png(const std::string& path, int want_color_type, int want_channels,
                    const char* kind) {
    FilePtr fp(std::fopen(path.c_str(), "rb"));
    if (!fp) throw FormatError(std::string("cannot open ") + kind + ": " + path);

    png_byte header[8];
    if (std::fread(header, 1, 8, fp.get()) != 8 || png_sig_cmp(header, 0, 8)) {
        throw FormatError(std::string(kind) + " is not a PNG file: " + path);
    }

    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) throw FormatError("png reader allocation failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_read_struct(&png, nullptr, nullptr);
        throw FormatError("png info allocation failed");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw FormatError(std::string("png decode failed for ") + kind + ": " + path);
    }
    png_init_io(png, fp.get());
    png_set_sig_bytes(png, 8);
    png_read_info(png, info);

    const png_uint_32 width = png_get_image_width(png, info);
    const png_uint_32 height = png_get_image_height(png, info);
    const int bit_depth = png_get_bit_depth(png, info);
    const int color_type = png_get_color_type(png, info);
    if (bit_depth != 8 || color_type != want_color_type) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw FormatError(std::string(kind) + " must be 8-bit " +
                          (want_channels == 3 ? "RGB" : "grayscale") + ": " + path);
    }

    ByteRaster out = ByteRaster::zeros(int(width), int(height), want_channels);
    std::vector<png_bytep> rows(height);
    const std::size_t stride = std::size_t(width) * want_channels;
    for (png_uint_32 r = 0; r < height; ++r) rows[r] = out.data.data() + r * stride;
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);
    return out;
}

void write_png(const std::string& path, const ByteRaster& raster, int color_type,
               const char* kind) {
    FilePtr fp(std::fopen(path.c_str(), "wb"));
    if (!fp) throw FormatError(std::string("cannot open ") + kind + " for writing: " + path);

    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) throw FormatError("png writer allocation failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_write_struct(&png, nullptr);
        throw FormatError("png info allocation failed");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw FormatError(std::string("png encode failed for ") + kind + ": " + path);
    }
    png_init_io(png, fp.get());
    png_set_IHDR(png, info, png_uint_32(raster.width), png_uint_32(raster.height), 8, color_type,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);

    std::vector<png_bytep> rows(raster.height);
    const std::size_t stride = std::size_t(raster.width) * raster.channels;
    for (int r = 0; r < raster.height; ++r) {
        rows[r] = const_cast<png_bytep>(raster.data.data() + std::size_t(r) * stride);
    }
    png_write_image(png, rows.data());
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

std::uint32_t load_u32le(const unsigned char* b) {
    return std::uint32_t(b[0]) | std::uint32_t(b[1]) << 8 | std::uint32_t(b[2]) << 16 |
           std::uint32_t(b[3]) << 24;
}

void store_u32le(std::uint32_t v, unsigned char* b) {
    b[0] = (unsigned char)(v & 0xff);
    b[1] = (unsigned char)((v >> 8) & 0xff);
    b[2] = (unsigned char)((v >> 16) & 0xff);
    b[3] = (unsigned char)((v >> 24) & 0xff);
}

} // namespace

ByteRaster read_png_image(const std::string& path) {
    return read_png(path, PNG_COLOR_TYPE_RGB, 3, "image");
}

ByteRaster read_png_mask(const std::string& path) {
    ByteRaster raw = read_png(path, PNG_COLOR_TYPE_GRAY, 1, "mask");
    for (std::size_t i = 0; i < raw.data.size(); ++i) {
        if (raw.data[i] == 0) continue;
        if (raw.data[i] == 255) {
            raw.data[i] = 1;
            continue;
        }
        throw FormatError("mask " + path + " has non-binary value " +
                          std::to_string(int(raw.data[i])) + " at pixel index " +
                          std::to_string(i));
    }
    return raw;
}

void write_png_image(const std::string& path, const ByteRaster& image) {
    if (image.channels != 3) throw ShapeError("image PNG requires 3 channels");
    write_png(path, image, PNG_COLOR_TYPE_RGB, "image");
}

void write_png_mask(const std::string& path, const ByteRaster& mask01) {
    if (mask01.channels != 1) throw ShapeError("mask PNG requires 1 channel");
    ByteRaster scaled = mask01;
    for (std::size_t i = 0; i < scaled.data.size(); ++i) {
        if (scaled.data[i] == 1) scaled.data[i] = 255;
        else if (scaled.data[i] != 0) {
            throw FormatError("mask values must be 0 or 1, got " +
                              std::to_string(int(scaled.data[i])));
        }
    }
    write_png(path, scaled, PNG_COLOR_TYPE_GRAY, "mask");
}

ByteRaster bytes_from_grid(const RasterGrid& grid) {
    ByteRaster out = ByteRaster::zeros(grid.width, grid.height, grid.channels);
    for (std::size_t i = 0; i < grid.data.size(); ++i) {
        const double v = std::lround(std::min(1.0, std::max(0.0, grid.data[i])) * 255.0);
        out.data[i] = (unsigned char)(v);
    }
    return out;
}

ByteRaster bytes_from_confidence(const ConfidenceMap& map) {
    ByteRaster out = ByteRaster::zeros(map.width, map.height, 1);
    for (std::size_t i = 0; i < map.values.size(); ++i) {
        const double v = std::lround(std::min(1.0, std::max(0.0, map.values[i])) * 255.0);
        out.data[i] = (unsigned char)(v);
    }
    return out;
}

void write_png_gray(const std::string& path, const ByteRaster& gray) {
    if (gray.channels != 1) throw ShapeError("grayscale PNG requires 1 channel");
    write_png(path, gray, PNG_COLOR_TYPE_GRAY, "grayscale image");
}

void write_pcm(const std::string& path, const ConfidenceMap& map) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw FormatError("cannot open confidence file for writing: " + path);
    unsigned char head[12] = {'P', 'C', 'M', '1'};
    store_u32le(std::uint32_t(map.width), head + 4);
    store_u32le(std::uint32_t(map.height), head + 8);
    out.write(reinterpret_cast<const char*>(head), sizeof head);
    std::vector<unsigned char> body(map.values.size() * 4);
    for (std::size_t i = 0; i < map.values.size(); ++i) {
        store_u32le(std::bit_cast<std::uint32_t>(float(map.values[i])), body.data() + 4 * i);
    }
    out.write(reinterpret_cast<const char*>(body.data()), std::streamsize(body.size()));
    if (!out) throw FormatError("failed writing confidence file: " + path);
}

ConfidenceMap read_pcm(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open confidence file: " + path);
    unsigned char head[12];
    in.read(reinterpret_cast<char*>(head), sizeof head);
    if (in.gcount() != sizeof head) {
        throw FormatError(path + ": truncated header at byte " + std::to_string(in.gcount()));
    }
    if (std::memcmp(head, "PCM1", 4) != 0) throw FormatError(path + ": bad magic at byte 0");
    const std::uint32_t width = load_u32le(head + 4);
    const std::uint32_t height = load_u32le(head + 8);
    if (width == 0 || height == 0 || std::uint64_t(width) * height > (std::uint64_t(1) << 34)) {
        throw FormatError(path + ": implausible dimensions at byte 4");
    }
    const std::size_t n = std::size_t(width) * height;
    std::vector<unsigned char> body(n * 4);
    in.read(reinterpret_cast<char*>(body.data()), std::streamsize(body.size()));
    if (std::size_t(in.gcount()) != body.size()) {
        throw FormatError(path + ": truncated at byte " + std::to_string(12 + in.gcount()));
    }
    ConfidenceMap map = ConfidenceMap::filled(int(width), int(height), 0.5);
    for (std::size_t i = 0; i < n; ++i) {
        map.values[i] = double(std::bit_cast<float>(load_u32le(body.data() + 4 * i)));
    }
    return map;
}

} // namespace pclwater
