#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>

#include "oracles.hpp"
#include "pclwater/errors.hpp"
#include "pclwater/manifest.hpp"
#include "pclwater/pyramid.hpp"
#include "pclwater/rng.hpp"

using namespace pclwater;

TEST_CASE("spec validation accepts the two shipped geometries") {
    PyramidSpec full; // tile 512, rates 1/5/25
    CHECK_NOTHROW(full.validate(12800, 12800));

    PyramidSpec desk;
    desk.tile = 256;
    CHECK_NOTHROW(desk.validate(6400, 6400));
}

TEST_CASE("spec validation rejects broken configurations") {
    PyramidSpec spec;
    spec.rates = {1, 5, 25};
    spec.tile = 512;
    CHECK_THROWS_AS(spec.validate(12801, 12800), AlignmentError); // side % 5
    CHECK_THROWS_AS(spec.validate(1280, 1280), AlignmentError);   // 1280/25 not tile-aligned

    spec.rates = {5, 25};
    CHECK_THROWS_AS(spec.validate(12800, 12800), ParamError); // first rate must be 1
    spec.rates = {1, 5, 5};
    CHECK_THROWS_AS(spec.validate(12800, 12800), ParamError); // strictly increasing
    spec.rates = {};
    CHECK_THROWS_AS(spec.validate(12800, 12800), ParamError);
    spec.rates = {1, 5, 25};
    spec.tile = 0;
    CHECK_THROWS_AS(spec.validate(12800, 12800), ParamError);
}

TEST_CASE("pyramid layers are block means at each rate") {
    PyramidSpec spec;
    spec.tile = 8;
    spec.rates = {1, 5, 25};
    Rng rng(3);
    const RasterGrid img = oracle::random_grid(rng, 200, 200, 3);

    const auto layers = build_pyramid(img, spec);
    REQUIRE(layers.size() == 3);
    CHECK(layers[0].width == 200);
    CHECK(layers[1].width == 40);
    CHECK(layers[2].width == 8);

    const RasterGrid want2 = oracle::ref_downsample(img, 5);
    const RasterGrid want3 = oracle::ref_downsample(img, 25);
    for (std::size_t i = 0; i < want2.data.size(); ++i)
        CHECK(layers[1].data[i] == doctest::Approx(want2.data[i]).epsilon(1e-12));
    for (std::size_t i = 0; i < want3.data.size(); ++i)
        CHECK(layers[2].data[i] == doctest::Approx(want3.data[i]).epsilon(1e-12));
}

TEST_CASE("each layer is computed from the original, not the previous layer") {
    // 25x block mean == 5x of 5x only in exact arithmetic; check against the
    // direct reference to pin the from-original contract.
    PyramidSpec spec;
    spec.tile = 2;
    spec.rates = {1, 5, 25};
    Rng rng(9);
    const RasterGrid img = oracle::random_grid(rng, 50, 50, 1);
    const auto layers = build_pyramid(img, spec);
    const RasterGrid want = oracle::ref_downsample(img, 25);
    for (std::size_t i = 0; i < want.data.size(); ++i)
        CHECK(layers[2].data[i] == doctest::Approx(want.data[i]).epsilon(1e-13));
}

TEST_CASE("byte-input pyramid matches the double-path pyramid bitwise") {
    PyramidSpec spec;
    spec.tile = 2;
    spec.rates = {1, 5, 25};
    Rng rng(17);
    ByteRaster img = ByteRaster::zeros(50, 50, 3);
    for (auto& v : img.data) v = std::uint8_t(rng.uniform_index(256));

    const auto from_bytes = build_pyramid_from_bytes(img, spec);
    const auto from_grid = build_pyramid(grid_from_bytes(img), spec);
    REQUIRE(from_bytes.size() == from_grid.size());
    for (std::size_t k = 0; k < from_bytes.size(); ++k) {
        REQUIRE(from_bytes[k].data.size() == from_grid[k].data.size());
        for (std::size_t i = 0; i < from_bytes[k].data.size(); ++i)
            CHECK(from_bytes[k].data[i] == from_grid[k].data[i]);
    }
}

TEST_CASE("anchor footprints land on the frozen coordinates") {
    PyramidSpec full; // 512, 1/5/25

    InterLayerGroup g = inter_group_for(TileCoord{0, 0, 512}, full, 12800);
    REQUIRE(g.uppers.size() == 2);
    CHECK(g.second().tile == TileCoord{0, 0, 512});
    CHECK(g.second().footprint.top == doctest::Approx(0.0));
    CHECK(g.second().footprint.width == doctest::Approx(102.4).epsilon(1e-12));
    CHECK(g.third().footprint.width == doctest::Approx(20.48).epsilon(1e-12));

    g = inter_group_for(TileCoord{6144, 6144, 512}, full, 12800);
    CHECK(g.second().tile == TileCoord{2 * 512, 2 * 512, 512});
    CHECK(g.second().footprint.top == doctest::Approx(204.8).epsilon(1e-12));
    CHECK(g.third().tile == TileCoord{0, 0, 512});
    CHECK(g.third().footprint.top == doctest::Approx(245.76).epsilon(1e-12));
    CHECK(g.third().footprint.left == doctest::Approx(245.76).epsilon(1e-12));

    PyramidSpec desk;
    desk.tile = 256;
    g = inter_group_for(TileCoord{3072, 3072, 256}, desk, 6400);
    CHECK(g.second().tile == TileCoord{2 * 256, 2 * 256, 256});
    CHECK(g.second().footprint.top == doctest::Approx(102.4).epsilon(1e-12));
    CHECK(g.second().footprint.width == doctest::Approx(51.2).epsilon(1e-12));
    CHECK(g.third().footprint.top == doctest::Approx(122.88).epsilon(1e-12));
    CHECK(g.third().footprint.width == doctest::Approx(10.24).epsilon(1e-12));
}

TEST_CASE("no aligned anchor footprint straddles a coarser tile") {
    for (const auto& [side, tile] : {std::pair{12800, 512}, std::pair{6400, 256}}) {
        PyramidSpec spec;
        spec.tile = tile;
        for (int r = 0; r + tile <= side; r += tile)
            for (int c = 0; c + tile <= side; c += tile)
                CHECK_NOTHROW(inter_group_for(TileCoord{r, c, tile}, spec, side));
    }
}

TEST_CASE("inter group rejects mismatched or out-of-range anchors") {
    PyramidSpec spec;
    CHECK_THROWS_AS(inter_group_for(TileCoord{0, 0, 256}, spec, 12800), GeometryError);
    CHECK_THROWS_AS(inter_group_for(TileCoord{12800, 0, 512}, spec, 12800), GeometryError);
    CHECK_THROWS_AS(inter_group_for(TileCoord{-512, 0, 512}, spec, 12800), GeometryError);
}

TEST_CASE("group views crop the anchor and its covering tiles") {
    PyramidSpec spec;
    spec.tile = 20;
    spec.rates = {1, 5};
    Rng rng(41);
    const RasterGrid img = oracle::random_grid(rng, 100, 100, 1);
    const auto layers = build_pyramid(img, spec);

    const TileCoord anchor{20, 40, 20};
    const InterLayerGroup g = inter_group_for(anchor, spec, 100);
    const auto views = extract_group_views(g, layers, 20);
    REQUIRE(views.size() == 2);
    CHECK(views[0].width == 20);
    CHECK(views[1].width == 20);
    for (int r = 0; r < 20; ++r)
        for (int c = 0; c < 20; ++c) {
            CHECK(views[0].at(r, c, 0) == img.at(20 + r, 40 + c, 0));
            CHECK(views[1].at(r, c, 0) == layers[1].at(g.second().tile.row0 + r,
                                                       g.second().tile.col0 + c, 0));
        }

    CHECK_THROWS_AS(extract_group_views(g, {layers[0]}, 20), ShapeError);
}

TEST_CASE("aligning a coarse ramp footprint reproduces the closed form") {
    const int w = 64;
    const double slope = 0.004, base = 0.2;
    std::vector<double> vals(std::size_t(w) * w);
    for (int r = 0; r < w; ++r)
        for (int c = 0; c < w; ++c) vals[std::size_t(r) * w + c] = base + slope * c;
    const ConfidenceMap coarse = ConfidenceMap::from(w, w, std::move(vals));

    const FracRect region{8.0, 12.8, 12.8, 12.8};
    const ConfidenceMap up = align_confidence(coarse, region, 32);
    REQUIRE(up.width == 32);
    for (int j = 0; j < 32; ++j) {
        const double want = oracle::ramp_sample(region.left, region.width, 32, j, w, slope, base);
        CHECK(up.at(7, j) == doctest::Approx(want).epsilon(1e-12));
    }
}

TEST_CASE("overlap windows carry consistent pair rectangles") {
    const int tile = 32, s = 16;
    const IntraLayerGroup g = intra_group_sample(96, tile, 16, 32, s);

    CHECK(g.tiles[0] == TileCoord{16, 32, tile});
    CHECK(g.tiles[1] == TileCoord{16, 48, tile});
    CHECK(g.tiles[2] == TileCoord{32, 32, tile});
    CHECK(g.tiles[3] == TileCoord{32, 48, tile});

    long pixels = 0;
    for (const PairOverlap& po : g.pairs) {
        CHECK(po.i < po.j);
        CHECK(po.in_i.height == po.in_j.height);
        CHECK(po.in_i.width == po.in_j.width);
        // both local frames must name the same global rectangle
        CHECK(g.tiles[std::size_t(po.i)].row0 + po.in_i.row0 ==
              g.tiles[std::size_t(po.j)].row0 + po.in_j.row0);
        CHECK(g.tiles[std::size_t(po.i)].col0 + po.in_i.col0 ==
              g.tiles[std::size_t(po.j)].col0 + po.in_j.col0);
        pixels += long(po.in_i.height) * po.in_i.width;
    }
    // 2 side pairs of 32x16, 2 of 16x32, diag + antidiag of 16x16
    CHECK(pixels == 2 * 32 * 16 + 2 * 16 * 32 + 2 * 16 * 16);
}

TEST_CASE("overlap window geometry is validated") {
    CHECK_THROWS_AS(intra_group_sample(96, 32, 0, 0, 0), GeometryError);
    CHECK_THROWS_AS(intra_group_sample(96, 32, 0, 0, 32), GeometryError);
    CHECK_THROWS_AS(intra_group_sample(96, 32, 80, 0, 16), GeometryError);
    CHECK_THROWS_AS(intra_group_sample(96, 32, -1, 0, 16), GeometryError);
}

TEST_CASE("anchor lattice enumerates exactly the windows that fit") {
    const auto anchors = intra_anchor_lattice(96, 32, 16);
    REQUIRE(anchors.size() == 4); // rows/cols {0, 32}
    CHECK(anchors.front() == std::pair{0, 0});
    CHECK(anchors.back() == std::pair{32, 32});
    for (const auto& [r, c] : anchors) CHECK_NOTHROW(intra_group_sample(96, 32, r, c, 16));

    CHECK(intra_anchor_lattice(6400, 256, 128).size() == 24 * 24);
    CHECK_THROWS_AS(intra_anchor_lattice(96, 32, 40), GeometryError);
}

TEST_CASE("manifest-scale geometry summary matches the full dataset layout") {
    PyramidSpec spec; // tile 512, rates 1/5/25
    CHECK(12800 / spec.rates[1] == 2560);
    CHECK(12800 / spec.rates[2] == 512);

    Manifest m;
    for (int i = 0; i < 250; ++i) {
        char buf[16];
        std::snprintf(buf, sizeof buf, "img_%03d", i);
        m.entries.push_back(ManifestEntry{buf, std::string(buf) + ".png",
                                          std::string(buf) + "_m.png", 12800, 12800});
    }
    const ManifestSummary s = summarize(m, spec);
    CHECK(s.entries == 250);
    CHECK(s.total_tiles == 156250);
    CHECK(s.total_pixels == 250ull * 12800ull * 12800ull);
    CHECK(s.billions_of_pixels() == doctest::Approx(40.96).epsilon(1e-12));
    CHECK(s.misaligned_ids.empty());
}
