#include "pclwater/pyramid.hpp"

#include <cmath>
#include <string>

namespace pclwater {

void PyramidSpec::validate(int image_width, int image_height) const {
    if (rates.empty()) throw ParamError("pyramid needs at least one rate");
    if (rates.front() != 1) throw ParamError("first pyramid rate must be 1");
    for (std::size_t k = 1; k < rates.size(); ++k) {
        if (rates[k] <= rates[k - 1]) throw ParamError("pyramid rates must be strictly increasing");
    }
    if (tile < 1) throw ParamError("tile size must be >= 1");
    for (std::size_t k = 0; k < rates.size(); ++k) {
        const int rate = rates[k];
        const std::string layer = "layer " + std::to_string(k + 1);
        if (image_height % rate != 0) {
            throw AlignmentError(layer + ": height " + std::to_string(image_height) +
                                 " not divisible by rate " + std::to_string(rate));
        }
        if (image_width % rate != 0) {
            throw AlignmentError(layer + ": width " + std::to_string(image_width) +
                                 " not divisible by rate " + std::to_string(rate));
        }
        if ((image_height / rate) % tile != 0) {
            throw AlignmentError(layer + ": height " + std::to_string(image_height / rate) +
                                 " not divisible by tile " + std::to_string(tile));
        }
        if ((image_width / rate) % tile != 0) {
            throw AlignmentError(layer + ": width " + std::to_string(image_width / rate) +
                                 " not divisible by tile " + std::to_string(tile));
        }
    }
}

std::vector<RasterGrid> build_pyramid(const RasterGrid& image, const PyramidSpec& spec) {
    spec.validate(image.width, image.height);
    std::vector<RasterGrid> layers;
    layers.reserve(spec.rates.size());
    for (int rate : spec.rates) layers.push_back(downsample_area(image, rate));
    return layers;
}

RasterGrid downsample_area_from_bytes(const ByteRaster& image, int factor) {
    if (factor < 1) throw ParamError("downsample factor must be >= 1");
    if (factor == 1) return grid_from_bytes(image);
    if (image.height % factor != 0) {
        throw AlignmentError("height " + std::to_string(image.height) + " not divisible by " +
                             std::to_string(factor));
    }
    if (image.width % factor != 0) {
        throw AlignmentError("width " + std::to_string(image.width) + " not divisible by " +
                             std::to_string(factor));
    }
    constexpr double kInv = 1.0 / 255.0;
    const int oh = image.height / factor;
    const int ow = image.width / factor;
    const int ch = image.channels;
    RasterGrid out = RasterGrid::zeros(ow, oh, ch);
    const double inv = 1.0 / (double(factor) * factor);
    for (int r = 0; r < oh; ++r) {
        for (int c = 0; c < ow; ++c) {
            for (int k = 0; k < ch; ++k) {
                double sum = 0.0;
                for (int dr = 0; dr < factor; ++dr)
                    for (int dc = 0; dc < factor; ++dc)
                        sum += image.at(r * factor + dr, c * factor + dc, k) * kInv;
                out.at(r, c, k) = sum * inv;
            }
        }
    }
    return out;
}

std::vector<RasterGrid> build_pyramid_from_bytes(const ByteRaster& image, const PyramidSpec& spec) {
    spec.validate(image.width, image.height);
    std::vector<RasterGrid> layers;
    layers.reserve(spec.rates.size());
    for (int rate : spec.rates) layers.push_back(downsample_area_from_bytes(image, rate));
    return layers;
}

InterLayerGroup inter_group_for(const TileCoord& anchor, const PyramidSpec& spec, int image_side) {
    spec.validate(image_side, image_side);
    if (anchor.size != spec.tile) {
        throw GeometryError("anchor size " + std::to_string(anchor.size) + " != tile " +
                            std::to_string(spec.tile));
    }
    if (anchor.row0 < 0 || anchor.col0 < 0 || anchor.row0 + anchor.size > image_side ||
        anchor.col0 + anchor.size > image_side) {
        throw GeometryError("anchor tile outside image of side " + std::to_string(image_side));
    }

    constexpr double kTol = 1e-9;
    InterLayerGroup group;
    group.anchor = anchor;
    for (std::size_t k = 1; k < spec.rates.size(); ++k) {
        const int rate = spec.rates[k];
        const double top = double(anchor.row0) / rate;
        const double left = double(anchor.col0) / rate;
        const double side = double(spec.tile) / rate;
        const int tile_r = int(std::floor(top / spec.tile));
        const int tile_c = int(std::floor(left / spec.tile));
        if (top + side > double(tile_r + 1) * spec.tile + kTol ||
            left + side > double(tile_c + 1) * spec.tile + kTol) {
            throw GeometryError("anchor footprint straddles two tiles of layer " +
                                std::to_string(k + 1));
        }
        LayerFootprint fp;
        fp.layer_index = int(k + 1);
        fp.rate = rate;
        fp.tile = TileCoord{tile_r * spec.tile, tile_c * spec.tile, spec.tile};
        fp.footprint = FracRect{top - double(fp.tile.row0), left - double(fp.tile.col0), side, side};
        group.uppers.push_back(fp);
    }
    return group;
}

std::vector<RasterGrid> extract_group_views(const InterLayerGroup& group,
                                            const std::vector<RasterGrid>& layers, int tile) {
    if (layers.size() != group.uppers.size() + 1) {
        throw ShapeError("pyramid has " + std::to_string(layers.size()) + " layers, group expects " +
                         std::to_string(group.uppers.size() + 1));
    }
    std::vector<RasterGrid> views;
    views.reserve(layers.size());
    views.push_back(crop(layers[0], group.anchor));
    for (std::size_t k = 0; k < group.uppers.size(); ++k) {
        const TileCoord& t = group.uppers[k].tile;
        if (t.size != tile) throw ShapeError("group tile size mismatch");
        views.push_back(crop(layers[k + 1], t));
    }
    return views;
}

ConfidenceMap align_confidence(const ConfidenceMap& conf, const FracRect& footprint, int out) {
    return sample_bilinear(conf, footprint, out);
}

IntraLayerGroup intra_group_sample(int image_side, int tile, int anchor_row, int anchor_col,
                                   int overlap_stride) {
    if (tile < 1) throw ParamError("tile size must be >= 1");
    if (overlap_stride <= 0 || overlap_stride >= tile) {
        throw GeometryError("overlap stride must satisfy 0 < s < tile, got " +
                            std::to_string(overlap_stride));
    }
    if (anchor_row < 0 || anchor_col < 0 || anchor_row + overlap_stride + tile > image_side ||
        anchor_col + overlap_stride + tile > image_side) {
        throw GeometryError("intra group at (" + std::to_string(anchor_row) + "," +
                            std::to_string(anchor_col) + ") exceeds image side " +
                            std::to_string(image_side));
    }

    const int s = overlap_stride;
    IntraLayerGroup g;
    g.tile_size = tile;
    g.tiles = {TileCoord{anchor_row, anchor_col, tile}, TileCoord{anchor_row, anchor_col + s, tile},
               TileCoord{anchor_row + s, anchor_col, tile},
               TileCoord{anchor_row + s, anchor_col + s, tile}};

    int n = 0;
    for (int i = 0; i < 4; ++i) {
        for (int j = i + 1; j < 4; ++j) {
            const TileCoord& a = g.tiles[i];
            const TileCoord& b = g.tiles[j];
            const int r0 = std::max(a.row0, b.row0);
            const int c0 = std::max(a.col0, b.col0);
            const int r1 = std::min(a.row0 + tile, b.row0 + tile);
            const int c1 = std::min(a.col0 + tile, b.col0 + tile);
            PairOverlap po;
            po.i = i;
            po.j = j;
            po.in_i = IntRect{r0 - a.row0, c0 - a.col0, r1 - r0, c1 - c0};
            po.in_j = IntRect{r0 - b.row0, c0 - b.col0, r1 - r0, c1 - c0};
            g.pairs[n++] = po;
        }
    }
    return g;
}

std::vector<std::pair<int, int>> intra_anchor_lattice(int image_side, int tile,
                                                      int overlap_stride) {
    if (overlap_stride <= 0 || overlap_stride >= tile) {
        throw GeometryError("overlap stride must satisfy 0 < s < tile");
    }
    std::vector<std::pair<int, int>> anchors;
    for (int r = 0; r + overlap_stride + tile <= image_side; r += tile)
        for (int c = 0; c + overlap_stride + tile <= image_side; c += tile)
            anchors.emplace_back(r, c);
    return anchors;
}

} // namespace pclwater
