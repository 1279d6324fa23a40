#include "pclwater/raster.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace pclwater {

namespace {

void check_dims(int width, int height, int channels) {
    if (width < 1 || height < 1) {
        throw ShapeError("raster dims must be >= 1, got " + std::to_string(width) + "x" +
                         std::to_string(height));
    }
    if (channels < 1) {
        throw ShapeError("raster needs >= 1 channel, got " + std::to_string(channels));
    }
}

} // namespace

RasterGrid RasterGrid::zeros(int width, int height, int channels) {
    return filled(width, height, channels, 0.0);
}

RasterGrid RasterGrid::filled(int width, int height, int channels, double value) {
    check_dims(width, height, channels);
    RasterGrid g;
    g.width = width;
    g.height = height;
    g.channels = channels;
    g.data.assign(std::size_t(width) * height * channels, value);
    return g;
}

RasterGrid RasterGrid::from(int width, int height, int channels, std::vector<double> data) {
    check_dims(width, height, channels);
    if (data.size() != std::size_t(width) * height * channels) {
        throw ShapeError("raster data length " + std::to_string(data.size()) + " != " +
                         std::to_string(std::size_t(width) * height * channels));
    }
    RasterGrid g;
    g.width = width;
    g.height = height;
    g.channels = channels;
    g.data = std::move(data);
    return g;
}

ByteRaster ByteRaster::zeros(int width, int height, int channels) {
    check_dims(width, height, channels);
    ByteRaster b;
    b.width = width;
    b.height = height;
    b.channels = channels;
    b.data.assign(std::size_t(width) * height * channels, 0);
    return b;
}

double clamp_confidence(double v) {
    if (!(v == v)) throw ParamError("confidence value is NaN");
    return std::min(1.0 - kConfidenceClamp, std::max(kConfidenceClamp, v));
}

ConfidenceMap ConfidenceMap::from(int width, int height, std::vector<double> values) {
    check_dims(width, height, 1);
    if (values.size() != std::size_t(width) * height) {
        throw ShapeError("confidence data length " + std::to_string(values.size()) + " != " +
                         std::to_string(std::size_t(width) * height));
    }
    for (double& v : values) v = clamp_confidence(v);
    ConfidenceMap m;
    m.width = width;
    m.height = height;
    m.values = std::move(values);
    return m;
}

ConfidenceMap ConfidenceMap::filled(int width, int height, double value) {
    return from(width, height, std::vector<double>(std::size_t(width) * height, value));
}

std::vector<TileCoord> tile_grid(int height, int width, int tile, int stride) {
    if (tile < 1) throw ParamError("tile size must be >= 1");
    if (stride < 1) throw ParamError("stride must be >= 1");
    if (tile > height || tile > width) {
        throw ParamError("tile " + std::to_string(tile) + " exceeds raster " +
                         std::to_string(width) + "x" + std::to_string(height));
    }
    if ((height - tile) % stride != 0) {
        throw AlignmentError("height " + std::to_string(height) + " minus tile " +
                             std::to_string(tile) + " not divisible by stride " +
                             std::to_string(stride));
    }
    if ((width - tile) % stride != 0) {
        throw AlignmentError("width " + std::to_string(width) + " minus tile " +
                             std::to_string(tile) + " not divisible by stride " +
                             std::to_string(stride));
    }
    const int rows = (height - tile) / stride + 1;
    const int cols = (width - tile) / stride + 1;
    std::vector<TileCoord> tiles;
    tiles.reserve(std::size_t(rows) * cols);
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c)
            tiles.push_back(TileCoord{r * stride, c * stride, tile});
    return tiles;
}

RasterGrid downsample_area(const RasterGrid& src, int factor) {
    if (factor < 1) throw ParamError("downsample factor must be >= 1");
    if (factor == 1) return src;
    if (src.height % factor != 0) {
        throw AlignmentError("height " + std::to_string(src.height) + " not divisible by factor " +
                             std::to_string(factor));
    }
    if (src.width % factor != 0) {
        throw AlignmentError("width " + std::to_string(src.width) + " not divisible by factor " +
                             std::to_string(factor));
    }
    const int oh = src.height / factor;
    const int ow = src.width / factor;
    const int ch = src.channels;
    RasterGrid out = RasterGrid::zeros(ow, oh, ch);
    const double inv = 1.0 / (double(factor) * factor);
    for (int r = 0; r < oh; ++r) {
        for (int c = 0; c < ow; ++c) {
            for (int k = 0; k < ch; ++k) {
                double sum = 0.0;
                for (int dr = 0; dr < factor; ++dr)
                    for (int dc = 0; dc < factor; ++dc)
                        sum += src.at(r * factor + dr, c * factor + dc, k);
                out.at(r, c, k) = sum * inv;
            }
        }
    }
    return out;
}

namespace {

constexpr double kGeomTol = 1e-9;

void check_region(const FracRect& region, int src_width, int src_height) {
    if (!(region.height > 0.0) || !(region.width > 0.0)) {
        throw GeometryError("region side must be positive");
    }
    if (region.top < -kGeomTol || region.left < -kGeomTol ||
        region.top + region.height > src_height + kGeomTol ||
        region.left + region.width > src_width + kGeomTol) {
        throw GeometryError("region [" + std::to_string(region.top) + "," +
                            std::to_string(region.left) + " " + std::to_string(region.height) +
                            "x" + std::to_string(region.width) + "] outside source " +
                            std::to_string(src_width) + "x" + std::to_string(src_height));
    }
}

struct Corner {
    int r0, r1, c0, c1;
    double wr, wc; // weight of the r1 / c1 sample
};

inline Corner corners_at(double y, double x, int src_width, int src_height) {
    const double u = y - 0.5;
    const double v = x - 0.5;
    double fr = std::floor(u);
    double fc = std::floor(v);
    Corner k;
    k.wr = u - fr;
    k.wc = v - fc;
    k.r0 = std::clamp(int(fr), 0, src_height - 1);
    k.r1 = std::clamp(int(fr) + 1, 0, src_height - 1);
    k.c0 = std::clamp(int(fc), 0, src_width - 1);
    k.c1 = std::clamp(int(fc) + 1, 0, src_width - 1);
    return k;
}

std::vector<double> sample_core(const double* src, int src_width, int src_height,
                                std::size_t stride, const FracRect& region, int out_size) {
    if (out_size < 1) throw ParamError("out_size must be >= 1");
    check_region(region, src_width, src_height);
    std::vector<double> out(std::size_t(out_size) * out_size);
    const double sy = region.height / out_size;
    const double sx = region.width / out_size;
    for (int i = 0; i < out_size; ++i) {
        const double y = region.top + (i + 0.5) * sy;
        for (int j = 0; j < out_size; ++j) {
            const double x = region.left + (j + 0.5) * sx;
            const Corner k = corners_at(y, x, src_width, src_height);
            const double top = src[(std::size_t(k.r0) * src_width + k.c0) * stride] * (1.0 - k.wc) +
                               src[(std::size_t(k.r0) * src_width + k.c1) * stride] * k.wc;
            const double bot = src[(std::size_t(k.r1) * src_width + k.c0) * stride] * (1.0 - k.wc) +
                               src[(std::size_t(k.r1) * src_width + k.c1) * stride] * k.wc;
            out[std::size_t(i) * out_size + j] = top * (1.0 - k.wr) + bot * k.wr;
        }
    }
    return out;
}

} // namespace

RasterGrid sample_bilinear(const RasterGrid& src, const FracRect& region, int out_size) {
    RasterGrid out = RasterGrid::zeros(out_size, out_size, src.channels);
    for (int ch = 0; ch < src.channels; ++ch) {
        std::vector<double> plane =
            sample_core(src.data.data() + ch, src.width, src.height, src.channels, region, out_size);
        for (int i = 0; i < out_size; ++i)
            for (int j = 0; j < out_size; ++j)
                out.at(i, j, ch) = plane[std::size_t(i) * out_size + j];
    }
    return out;
}

ConfidenceMap sample_bilinear(const ConfidenceMap& src, const FracRect& region, int out_size) {
    ConfidenceMap out;
    out.width = out_size;
    out.height = out_size;
    out.values = sample_core(src.values.data(), src.width, src.height, 1, region, out_size);
    // convex combinations of clamped values stay in range; no re-clamp
    return out;
}

std::vector<double> sample_bilinear_adjoint(const std::vector<double>& grad_out, int out_size,
                                            int src_width, int src_height, const FracRect& region) {
    if (grad_out.size() != std::size_t(out_size) * out_size) {
        throw ShapeError("adjoint gradient length mismatch");
    }
    check_region(region, src_width, src_height);
    std::vector<double> grad_src(std::size_t(src_width) * src_height, 0.0);
    const double sy = region.height / out_size;
    const double sx = region.width / out_size;
    for (int i = 0; i < out_size; ++i) {
        const double y = region.top + (i + 0.5) * sy;
        for (int j = 0; j < out_size; ++j) {
            const double x = region.left + (j + 0.5) * sx;
            const Corner k = corners_at(y, x, src_width, src_height);
            const double g = grad_out[std::size_t(i) * out_size + j];
            grad_src[std::size_t(k.r0) * src_width + k.c0] += g * (1.0 - k.wr) * (1.0 - k.wc);
            grad_src[std::size_t(k.r0) * src_width + k.c1] += g * (1.0 - k.wr) * k.wc;
            grad_src[std::size_t(k.r1) * src_width + k.c0] += g * k.wr * (1.0 - k.wc);
            grad_src[std::size_t(k.r1) * src_width + k.c1] += g * k.wr * k.wc;
        }
    }
    return grad_src;
}

namespace {

void check_tile_bounds(int width, int height, const TileCoord& t) {
    if (t.size < 1 || t.row0 < 0 || t.col0 < 0 || t.row0 + t.size > height ||
        t.col0 + t.size > width) {
        throw GeometryError("tile (" + std::to_string(t.row0) + "," + std::to_string(t.col0) +
                            " size " + std::to_string(t.size) + ") outside raster " +
                            std::to_string(width) + "x" + std::to_string(height));
    }
}

} // namespace

RasterGrid crop(const RasterGrid& src, const TileCoord& t) {
    check_tile_bounds(src.width, src.height, t);
    RasterGrid out = RasterGrid::zeros(t.size, t.size, src.channels);
    for (int r = 0; r < t.size; ++r) {
        const double* in = &src.data[src.idx(t.row0 + r, t.col0, 0)];
        double* dst = &out.data[out.idx(r, 0, 0)];
        std::copy(in, in + std::size_t(t.size) * src.channels, dst);
    }
    return out;
}

RasterGrid tile_from_bytes(const ByteRaster& src, const TileCoord& t) {
    check_tile_bounds(src.width, src.height, t);
    RasterGrid out = RasterGrid::zeros(t.size, t.size, src.channels);
    constexpr double kInv = 1.0 / 255.0;
    for (int r = 0; r < t.size; ++r) {
        const std::uint8_t* in = &src.data[src.idx(t.row0 + r, t.col0, 0)];
        double* dst = &out.data[out.idx(r, 0, 0)];
        const std::size_t n = std::size_t(t.size) * src.channels;
        for (std::size_t k = 0; k < n; ++k) dst[k] = in[k] * kInv;
    }
    return out;
}

RasterGrid mask_tile_from_bytes(const ByteRaster& mask, const TileCoord& t) {
    if (mask.channels != 1) throw ShapeError("mask raster must be single-channel");
    check_tile_bounds(mask.width, mask.height, t);
    RasterGrid out = RasterGrid::zeros(t.size, t.size, 1);
    for (int r = 0; r < t.size; ++r) {
        const std::uint8_t* in = &mask.data[mask.idx(t.row0 + r, t.col0)];
        double* dst = &out.data[out.idx(r, 0)];
        for (int c = 0; c < t.size; ++c) dst[c] = double(in[c]);
    }
    return out;
}

RasterGrid grid_from_bytes(const ByteRaster& src) {
    RasterGrid out = RasterGrid::zeros(src.width, src.height, src.channels);
    constexpr double kInv = 1.0 / 255.0;
    for (std::size_t k = 0; k < src.data.size(); ++k) out.data[k] = src.data[k] * kInv;
    return out;
}

} // namespace pclwater
