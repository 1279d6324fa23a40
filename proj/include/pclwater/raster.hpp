#pragma once

#include <cstdint>
#include <vector>

#include "pclwater/errors.hpp"

namespace pclwater {

// Row-major grid of doubles with interleaved channels. Carries images,
// masks, and feature planes. Math-facing counterpart of ByteRaster.
struct RasterGrid {
    int width = 0;
    int height = 0;
    int channels = 1;
    std::vector<double> data;

    static RasterGrid zeros(int width, int height, int channels = 1);
    static RasterGrid filled(int width, int height, int channels, double value);
    static RasterGrid from(int width, int height, int channels, std::vector<double> data);

    std::size_t idx(int r, int c, int ch = 0) const {
        return (std::size_t(r) * width + c) * channels + ch;
    }
    double at(int r, int c, int ch = 0) const { return data[idx(r, c, ch)]; }
    double& at(int r, int c, int ch = 0) { return data[idx(r, c, ch)]; }
    std::size_t pixel_count() const { return std::size_t(width) * height; }
};

// 8-bit storage twin of RasterGrid: corpus images and masks live here so a
// full training corpus fits in memory. Conversion to RasterGrid divides by
// 255 (masks are stored as {0,1} and convert verbatim).
struct ByteRaster {
    int width = 0;
    int height = 0;
    int channels = 1;
    std::vector<std::uint8_t> data;

    static ByteRaster zeros(int width, int height, int channels = 1);

    std::size_t idx(int r, int c, int ch = 0) const {
        return (std::size_t(r) * width + c) * channels + ch;
    }
    std::uint8_t at(int r, int c, int ch = 0) const { return data[idx(r, c, ch)]; }
    std::uint8_t& at(int r, int c, int ch = 0) { return data[idx(r, c, ch)]; }
};

// Square tile position within a larger raster.
struct TileCoord {
    int row0 = 0;
    int col0 = 0;
    int size = 0;

    bool operator==(const TileCoord&) const = default;
};

// Axis-aligned rectangle with fractional pixel coordinates. Needed because
// a tile mapped into a coarser layer has a non-integer side (512/5 = 102.4).
struct FracRect {
    double top = 0.0;
    double left = 0.0;
    double height = 0.0;
    double width = 0.0;
};

// Integer rectangle, used for intra-layer overlap regions.
struct IntRect {
    int row0 = 0;
    int col0 = 0;
    int height = 0;
    int width = 0;

    bool operator==(const IntRect&) const = default;
};

// Per-pixel probabilities stored as doubles, clamped into
// [kConfidenceClamp, 1 - kConfidenceClamp] at construction so log terms
// stay finite.
inline constexpr double kConfidenceClamp = 1e-7;

struct ConfidenceMap {
    int width = 0;
    int height = 0;
    std::vector<double> values;

    static ConfidenceMap from(int width, int height, std::vector<double> values);
    static ConfidenceMap filled(int width, int height, double value);

    std::size_t idx(int r, int c) const { return std::size_t(r) * width + c; }
    double at(int r, int c) const { return values[idx(r, c)]; }
    std::size_t pixel_count() const { return std::size_t(width) * height; }
};

double clamp_confidence(double v);

// All tile positions covering a height x width raster in row-major order.
// (height - tile) and (width - tile) must be divisible by stride.
std::vector<TileCoord> tile_grid(int height, int width, int tile, int stride);

// Area-average (box filter) downsampling; dims must divide by factor.
// Preserves the grid mean exactly up to rounding.
RasterGrid downsample_area(const RasterGrid& src, int factor);

// Bilinear sampling of a fractional region onto an out_size x out_size grid.
// Source pixel (r, c) is treated as a sample at (r + 0.5, c + 0.5); output
// pixel centers are mapped affinely onto the region; coordinates inside the
// outer half-pixel border replicate the edge sample. An integer-aligned
// region with out_size equal to its side reproduces the source exactly.
RasterGrid sample_bilinear(const RasterGrid& src, const FracRect& region, int out_size);
ConfidenceMap sample_bilinear(const ConfidenceMap& src, const FracRect& region, int out_size);

// Transpose of the sampling operator above: scatters an out_size^2 gradient
// back onto a src_width x src_height grid. Used to push loss gradients
// through confidence alignment.
std::vector<double> sample_bilinear_adjoint(const std::vector<double>& grad_out,
                                            int out_size, int src_width, int src_height,
                                            const FracRect& region);

// Crop helpers. tile_from_bytes also rescales by 1/255.
RasterGrid crop(const RasterGrid& src, const TileCoord& t);
RasterGrid tile_from_bytes(const ByteRaster& src, const TileCoord& t);
RasterGrid mask_tile_from_bytes(const ByteRaster& mask, const TileCoord& t);
RasterGrid grid_from_bytes(const ByteRaster& src);

} // namespace pclwater
