#pragma once

#include <string>

#include "pclwater/raster.hpp"

namespace pclwater {

// Strict formats: images are 8-bit RGB PNG, masks 8-bit grayscale PNG whose
// pixels are exactly 0 (background) or 255 (water). Reads map 255 -> 1.
ByteRaster read_png_image(const std::string& path);
ByteRaster read_png_mask(const std::string& path);
void write_png_image(const std::string& path, const ByteRaster& image);
void write_png_mask(const std::string& path, const ByteRaster& mask01);

// Lossy visualization helpers (round to 8 bits).
ByteRaster bytes_from_grid(const RasterGrid& grid);
ByteRaster bytes_from_confidence(const ConfidenceMap& map);

// Plain 8-bit grayscale PNG without the binary-mask restriction.
void write_png_gray(const std::string& path, const ByteRaster& gray);

// Confidence map container: magic "PCM1", u32le width, u32le height, then
// width*height f32le values row-major. Values are stored at float precision.
void write_pcm(const std::string& path, const ConfidenceMap& map);
ConfidenceMap read_pcm(const std::string& path);

} // namespace pclwater
