#pragma once

#include <array>
#include <utility>
#include <vector>

#include "pclwater/raster.hpp"

namespace pclwater {

// Downsample rates and tile size for the image pyramid. Rates must be
// strictly increasing and start at 1; every layer side must divide by the
// tile size. Defaults mirror the full survey scale; the desk-scale twin is
// {1, 5, 25} with tile 256 on side-6400 images.
struct PyramidSpec {
    std::vector<int> rates{1, 5, 25};
    int tile = 512;

    void validate(int image_width, int image_height) const;
    std::size_t layer_count() const { return rates.size(); }
};

// A first-layer tile plus, per coarser layer, the tile that covers the same
// ground and the fractional footprint of the anchor inside that tile.
struct LayerFootprint {
    int layer_index = 0; // 1-based pyramid layer (2 = first coarser layer)
    int rate = 1;
    TileCoord tile;
    FracRect footprint;
};

struct InterLayerGroup {
    TileCoord anchor;
    std::vector<LayerFootprint> uppers;

    const LayerFootprint& second() const { return uppers.at(0); }
    const LayerFootprint& third() const { return uppers.at(1); }
};

// Four adjacent overlapping first-layer tiles in a 2x2 arrangement plus the
// six ordered pair overlap rectangles, each expressed in both tiles' local
// frames. tile_size * tile_size is the default loss normalization area.
struct PairOverlap {
    int i = 0;
    int j = 0;
    IntRect in_i;
    IntRect in_j;
};

struct IntraLayerGroup {
    std::array<TileCoord, 4> tiles{};
    std::array<PairOverlap, 6> pairs{};
    int tile_size = 0;
};

// Layer k = downsample_area(image, rates[k]), each computed from the
// original (layer 1 is a plain copy).
std::vector<RasterGrid> build_pyramid(const RasterGrid& image, const PyramidSpec& spec);

// Same layers computed straight from 8-bit storage. Term-by-term identical
// arithmetic to grid_from_bytes + build_pyramid without materializing the
// full-resolution double grid.
std::vector<RasterGrid> build_pyramid_from_bytes(const ByteRaster& image, const PyramidSpec& spec);

// One layer straight from 8-bit storage; factor 1 is grid_from_bytes.
RasterGrid downsample_area_from_bytes(const ByteRaster& image, int factor);

// Locate the coarser-layer tiles covering an anchor tile and the anchor's
// fractional footprint inside each. Throws GeometryError if a footprint
// would straddle two tiles of a coarser layer (cannot happen when layer
// sides divide by the tile size).
InterLayerGroup inter_group_for(const TileCoord& anchor, const PyramidSpec& spec, int image_side);

// Model inputs for a group: the raw anchor tile plus the full containing
// tile of every coarser layer. All views are tile x tile; the ground extent
// they cover grows by the layer rate.
std::vector<RasterGrid> extract_group_views(const InterLayerGroup& group,
                                            const std::vector<RasterGrid>& layers, int tile);

// Upsample the footprint region of a coarser-layer confidence map to the
// first-layer tile size so maps can be compared pixel by pixel.
ConfidenceMap align_confidence(const ConfidenceMap& conf, const FracRect& footprint, int out);

// 2x2 group of tiles at offsets (0,0), (0,s), (s,0), (s,s) from the anchor,
// with all six pairwise overlap rectangles.
IntraLayerGroup intra_group_sample(int image_side, int tile, int anchor_row, int anchor_col,
                                   int overlap_stride);

// Anchor positions for intra-layer groups on a regular lattice with stride
// equal to the tile size.
std::vector<std::pair<int, int>> intra_anchor_lattice(int image_side, int tile, int overlap_stride);

} // namespace pclwater
