#include "pclwater/manifest.hpp"

#include <cmath>
#include <fstream>
#include <iostream>
#include <set>

#include <json.hpp>

#include "pclwater/rng.hpp"

namespace pclwater {

using nlohmann::json;

const char* split_name(Split s) {
    switch (s) {
    case Split::Train: return "train";
    case Split::Val: return "val";
    case Split::Test: return "test";
    }
    throw ParamError("unknown split");
}

Split split_from_name(const std::string& name) {
    if (name == "train") return Split::Train;
    if (name == "val") return Split::Val;
    if (name == "test") return Split::Test;
    throw ManifestError("unknown split name '" + name + "'");
}

std::map<std::string, Split> make_split(const std::vector<std::string>& ids, std::uint64_t seed) {
    std::set<std::string> seen;
    for (const std::string& id : ids) {
        if (!seen.insert(id).second) throw ManifestError("duplicate id '" + id + "'");
    }
    const std::size_t n = ids.size();
    if (n == 0) throw ManifestError("cannot split an empty id list");
    if (n < 10) {
        std::cerr << "warning: only " << n << " ids; validation/test splits may be degenerate\n";
    }

    std::vector<std::string> order = ids;
    Rng rng(mix_seed(seed, 0x5917EEDull));
    for (std::size_t i = n - 1; i > 0; --i) {
        const std::size_t j = rng.uniform_index(i + 1);
        std::swap(order[i], order[j]);
    }

    const std::size_t n_val = std::size_t(std::ceil(0.1 * double(n)));
    const std::size_t n_test = std::min(n_val, n - n_val);
    const std::size_t n_train = n - n_val - n_test;

    std::map<std::string, Split> split;
    for (std::size_t i = 0; i < n; ++i) {
        Split s = Split::Train;
        if (i >= n_train && i < n_train + n_val) s = Split::Val;
        else if (i >= n_train + n_val) s = Split::Test;
        split[order[i]] = s;
    }
    return split;
}

std::string manifest_to_json(const Manifest& m) {
    json j;
    j["seed"] = m.seed;
    j["entries"] = json::array();
    for (const ManifestEntry& e : m.entries) {
        j["entries"].push_back({{"id", e.id},
                                {"image", e.image_path},
                                {"mask", e.mask_path},
                                {"width", e.width},
                                {"height", e.height}});
    }
    json split = json::object();
    for (const auto& [id, s] : m.split) split[id] = split_name(s);
    j["split"] = split;
    return j.dump(2) + "\n";
}

Manifest manifest_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ManifestError(std::string("manifest is not valid JSON: ") + e.what());
    }
    Manifest m;
    try {
        m.seed = j.at("seed").get<std::uint64_t>();
        for (const json& je : j.at("entries")) {
            ManifestEntry e;
            e.id = je.at("id").get<std::string>();
            e.image_path = je.at("image").get<std::string>();
            e.mask_path = je.at("mask").get<std::string>();
            e.width = je.at("width").get<int>();
            e.height = je.at("height").get<int>();
            m.entries.push_back(std::move(e));
        }
        for (const auto& [id, sname] : j.at("split").items()) {
            m.split[id] = split_from_name(sname.get<std::string>());
        }
    } catch (const json::exception& e) {
        throw ManifestError(std::string("manifest missing required field: ") + e.what());
    }

    std::set<std::string> paths;
    for (const ManifestEntry& e : m.entries) {
        if (!paths.insert(e.image_path).second) {
            throw ManifestError("duplicate path '" + e.image_path + "'");
        }
        if (!paths.insert(e.mask_path).second) {
            throw ManifestError("duplicate path '" + e.mask_path + "'");
        }
    }
    return m;
}

void save_manifest(const Manifest& m, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ManifestError("cannot open manifest for writing: " + path);
    out << manifest_to_json(m);
    if (!out) throw ManifestError("failed writing manifest: " + path);
}

Manifest load_manifest(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ManifestError("cannot open manifest: " + path);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return manifest_from_json(text);
}

ManifestSummary summarize(const Manifest& m, const PyramidSpec& spec) {
    ManifestSummary s;
    s.entries = m.entries.size();
    for (const ManifestEntry& e : m.entries) {
        try {
            spec.validate(e.width, e.height);
        } catch (const Error&) {
            s.misaligned_ids.push_back(e.id);
            continue;
        }
        s.total_tiles += std::uint64_t(e.width / spec.tile) * std::uint64_t(e.height / spec.tile);
        s.total_pixels += std::uint64_t(e.width) * std::uint64_t(e.height);
    }
    return s;
}

} // namespace pclwater
