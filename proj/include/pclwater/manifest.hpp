#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "pclwater/pyramid.hpp"

namespace pclwater {

enum class Split { Train, Val, Test };

const char* split_name(Split s);
Split split_from_name(const std::string& name);

struct ManifestEntry {
    std::string id;
    std::string image_path;
    std::string mask_path;
    int width = 0;
    int height = 0;
};

struct Manifest {
    std::vector<ManifestEntry> entries;
    std::map<std::string, Split> split;
    std::uint64_t seed = 0;
};

// Seeded shuffle then 80/10/10; val and test take the ceiling, in that order.
// Fewer than 10 ids still splits but warns on stderr (test may be empty).
std::map<std::string, Split> make_split(const std::vector<std::string>& ids, std::uint64_t seed);

std::string manifest_to_json(const Manifest& m);
Manifest manifest_from_json(const std::string& text);
void save_manifest(const Manifest& m, const std::string& path);
Manifest load_manifest(const std::string& path);

struct ManifestSummary {
    std::size_t entries = 0;
    std::uint64_t total_tiles = 0;  // layer-1 tiles over aligned entries
    std::uint64_t total_pixels = 0; // over aligned entries
    std::vector<std::string> misaligned_ids;

    double billions_of_pixels() const { return double(total_pixels) / 1e9; }
};

ManifestSummary summarize(const Manifest& m, const PyramidSpec& spec);

} // namespace pclwater
