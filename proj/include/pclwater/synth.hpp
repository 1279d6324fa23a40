#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pclwater/pyramid.hpp"
#include "pclwater/raster.hpp"

namespace pclwater {

struct CorpusItem {
    std::string id;
    ByteRaster image; // 8-bit RGB
    ByteRaster mask;  // 8-bit, values in {0,1}
};

// Procedural scene: meandering rivers, wobbly elliptical lakes, pond
// clusters over a textured background; water pixels tinted and noised.
// Deterministic per (seed, index) regardless of generation order.
CorpusItem synth_image(std::uint64_t seed, int index, int side);

// Validates side against the pyramid spec before generating anything.
std::vector<CorpusItem> synth_corpus(std::uint64_t seed, int count, int side,
                                     const PyramidSpec& spec);

double water_fraction(const ByteRaster& mask01);

} // namespace pclwater
