// Release gate: one line per criterion, nonzero exit if any fails.
// argv[1] must be the CLI binary (used by the determinism criterion).

#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "pclwater/errors.hpp"
#include "pclwater/gradcheck.hpp"
#include "pclwater/io.hpp"
#include "pclwater/manifest.hpp"
#include "pclwater/metrics.hpp"
#include "pclwater/trainer.hpp"

namespace fs = std::filesystem;
using namespace pclwater;
using Clock = std::chrono::steady_clock;

namespace {

int failures = 0;

void report(int index, const std::string& name, bool ok, const std::string& detail = "") {
    std::cout << (ok ? "PASS" : "FAIL") << " " << index << " " << name;
    if (!detail.empty()) std::cout << " (" << detail << ")";
    std::cout << "\n";
    std::cout.flush();
    if (!ok) ++failures;
}

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string run_capture(const std::string& cmd, int& exit_code) {
    std::string out;
    FILE* pipe = popen(cmd.c_str(), "r");
    if (!pipe) {
        exit_code = -1;
        return out;
    }
    char buf[4096];
    std::size_t n;
    while ((n = fread(buf, 1, sizeof buf, pipe)) > 0) out.append(buf, n);
    exit_code = pclose(pipe);
    return out;
}

fs::path tmp(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / "pclwater_acceptance";
    fs::create_directories(dir);
    return dir / name;
}

// ---- 1: geometry contract ----

void geometry_contract() {
    bool ok = true;
    std::string detail;
    try {
        PyramidSpec spec; // tile 512, rates 1/5/25
        spec.validate(12800, 12800);
        ok &= 12800 / spec.rates[0] == 12800;
        ok &= 12800 / spec.rates[1] == 2560;
        ok &= 12800 / spec.rates[2] == 512;
        ok &= tile_grid(12800, 12800, spec.tile, spec.tile).size() == 625;

        Manifest m;
        char buf[16];
        for (int i = 0; i < 250; ++i) {
            std::snprintf(buf, sizeof buf, "img_%03d", i);
            m.entries.push_back(ManifestEntry{buf, std::string(buf) + ".png",
                                              std::string(buf) + "_m.png", 12800, 12800});
        }
        const ManifestSummary s = summarize(m, spec);
        ok &= s.total_tiles == 156250;
        ok &= s.total_pixels == 250ull * 12800ull * 12800ull;
        ok &= std::abs(s.billions_of_pixels() - 40.96) < 1e-9;
        ok &= s.misaligned_ids.empty();
        detail = "sides 12800/2560/512, 625 tiles, " + std::to_string(s.total_tiles) +
                 " corpus tiles, 40.96e9 px";
    } catch (const std::exception& e) {
        ok = false;
        detail = e.what();
    }
    report(1, "geometry contract at full scale", ok, detail);
}

// ---- 2: loss kernels vs naive scalar reference ----

void loss_oracle_equivalence() {
    bool ok = true;
    std::string detail;
    try {
        Rng rng(2025);
        double worst = 0.0;
        const LossParams params;
        for (int round = 0; round < 100; ++round) {
            const int side = 16;
            const ConfidenceMap p1 = oracle::random_map(rng, side, side);
            const ConfidenceMap q2 = oracle::random_map(rng, side, side);
            const ConfidenceMap q3 = oracle::random_map(rng, side, side);
            const RasterGrid y = oracle::random_mask(rng, side, side);

            worst = std::max(worst, std::abs(bce_loss(p1, y).value - oracle::ref_bce(p1, y)));
            worst = std::max(worst, std::abs(inter_loss(p1, q2, q3, y, params).value -
                                             oracle::ref_inter(p1, q2, q3, y, params.r,
                                                               params.lambda)));

            const IntraLayerGroup g = intra_group_sample(24, 16, 0, 0, 8);
            std::array<ConfidenceMap, 4> maps;
            std::array<RasterGrid, 4> masks;
            for (int k = 0; k < 4; ++k) {
                maps[std::size_t(k)] = oracle::random_map(rng, side, side);
                masks[std::size_t(k)] = oracle::random_mask(rng, side, side);
            }
            for (IntraNorm norm : {IntraNorm::TileArea, IntraNorm::OverlapArea}) {
                const double want = oracle::ref_intra(maps, masks, g.tiles, side, params.r,
                                                      params.lambda,
                                                      norm == IntraNorm::OverlapArea);
                worst = std::max(worst,
                                 std::abs(intra_loss(maps, masks, g, params, norm).value - want));
            }
        }
        ok = worst <= 1e-10;
        char buf[64];
        std::snprintf(buf, sizeof buf, "max |diff| %.3g over 100 instances", worst);
        detail = buf;
    } catch (const std::exception& e) {
        ok = false;
        detail = e.what();
    }
    report(2, "loss kernels equal the scalar reference", ok, detail);
}

// ---- 3: gradient suite ----

void gradient_suite() {
    bool ok = true;
    std::string detail;
    const auto t0 = Clock::now();
    try {
        const GradCheckReport rep = run_gradcheck(7, 200, 8, 1e-4);
        ok = rep.pass(1e-4);
        char buf[96];
        std::snprintf(buf, sizeof buf, "max rel err %.3g over 200 seeds, %.1fs", rep.max_rel,
                      seconds_since(t0));
        detail = buf;
        ok &= seconds_since(t0) < 60.0;
    } catch (const std::exception& e) {
        ok = false;
        detail = e.what();
    }
    report(3, "finite-difference gradient suite", ok, detail);
}

// ---- 4: hand-derived scalar cases ----

void scalar_cases() {
    bool ok = true;
    std::string detail;
    try {
        const LossParams params;
        const int side = 4;
        auto cmap = [&](double v) { return ConfidenceMap::filled(side, side, v); };
        auto cmask = [&](double v) { return RasterGrid::filled(side, side, 1, v); };

        const double water =
            inter_loss(cmap(0.8), cmap(0.6), cmap(0.5), cmask(1.0), params).value;
        const double land = inter_loss(cmap(0.8), cmap(0.6), cmap(0.8), cmask(0.0), params).value;
        ok &= std::abs(water - 0.00416) <= 1e-12;
        ok &= std::abs(land - 0.00512) <= 1e-12;

        const IntraLayerGroup g = intra_group_sample(4, 2, 0, 0, 1);
        const std::array<ConfidenceMap, 4> maps = {
            ConfidenceMap::filled(2, 2, 0.9), ConfidenceMap::filled(2, 2, 0.7),
            ConfidenceMap::filled(2, 2, 0.9), ConfidenceMap::filled(2, 2, 0.9)};
        const std::array<RasterGrid, 4> masks = {
            RasterGrid::filled(2, 2, 1, 0.0), RasterGrid::filled(2, 2, 1, 0.0),
            RasterGrid::filled(2, 2, 1, 0.0), RasterGrid::filled(2, 2, 1, 0.0)};
        const double intra = intra_loss(maps, masks, g, params, IntraNorm::OverlapArea).value;
        ok &= std::abs(intra - 0.01432) <= 1e-12;

        char buf[96];
        std::snprintf(buf, sizeof buf, "inter %.5f / %.5f, intra %.5f", water, land, intra);
        detail = buf;
    } catch (const std::exception& e) {
        ok = false;
        detail = e.what();
    }
    report(4, "hand-derived scalar cases", ok, detail);
}

// ---- 5: consistency-zero identities ----

void zero_identities() {
    bool ok = true;
    std::string detail;
    try {
        Rng rng(5005);
        const int side = 12;
        const ConfidenceMap p = oracle::random_map(rng, side, side);
        const RasterGrid y = oracle::random_mask(rng, side, side);
        ok &= inter_loss(p, p, p, y, LossParams{}).value == 0.0;

        const IntraLayerGroup g = intra_group_sample(18, 12, 0, 0, 6);
        const ConfidenceMap global = oracle::random_map(rng, 18, 18);
        std::array<ConfidenceMap, 4> tiles;
        for (int k = 0; k < 4; ++k) {
            const TileCoord& t = g.tiles[std::size_t(k)];
            std::vector<double> vals;
            for (int r = 0; r < t.size; ++r)
                for (int c = 0; c < t.size; ++c) vals.push_back(global.at(t.row0 + r, t.col0 + c));
            tiles[std::size_t(k)] = ConfidenceMap::from(t.size, t.size, std::move(vals));
        }
        const std::array<RasterGrid, 4> masks = {y, y, y, y};
        ok &= intra_loss(tiles, masks, g, LossParams{}).value == 0.0;

        // zero weights: total must be the supervised result bit-for-bit
        LossParams off;
        off.alpha_inter = 0.0;
        off.alpha_intra = 0.0;
        const LossResult seg = bce_loss(p, y, "p_1st");
        const LossResult inter = inter_loss(p, oracle::random_map(rng, side, side),
                                            oracle::random_map(rng, side, side), y, off);
        const LossResult intra = intra_loss(tiles, masks, g, off);
        const LossResult total = total_loss(seg, inter, intra, off);
        ok &= total.value == seg.value;
        ok &= total.grads.size() == seg.grads.size();
        for (const auto& [key, grid] : seg.grads) {
            auto it = total.grads.find(key);
            if (it == total.grads.end()) {
                ok = false;
                break;
            }
            ok &= it->second.values == grid.values;
        }
        detail = "identical maps give 0.0; zero weights reproduce seg bitwise";
    } catch (const std::exception& e) {
        ok = false;
        detail = e.what();
    }
    report(5, "consistency-zero identities", ok, detail);
}

// ---- 6: trainer consistency effect at full scale ----

void trainer_effect() {
    bool ok = true;
    std::string detail;
    const auto t0 = Clock::now();
    try {
        TrainConfig cfg;
        cfg.spec.tile = 256;
        cfg.seed = 7;
        cfg.epochs = 20;
        cfg.samples_per_image = 12;
        cfg.batch = 4;
        cfg.learning_rate = 0.3;
        cfg.poly_schedule = true;
        cfg.heldout_eval_tiles = 48;
        cfg.loss_params.alpha_inter = 20.0;
        cfg.loss_params.alpha_intra = 20.0;

        std::cerr << "[6] generating 16 scenes at side 6400...\n";
        const std::vector<CorpusItem> corpus = synth_corpus(7, 16, 6400, cfg.spec);

        std::vector<std::string> ids;
        for (const CorpusItem& item : corpus) ids.push_back(item.id);
        const auto split = make_split(ids, 7);
        std::vector<std::string> test_ids;
        for (const std::string& id : ids) {
            if (split.at(id) == Split::Val) cfg.heldout_ids.push_back(id);
            if (split.at(id) == Split::Test) {
                cfg.heldout_ids.push_back(id);
                test_ids.push_back(id);
            }
        }

        TrainConfig bce_cfg = cfg;
        bce_cfg.use_inter = false;
        bce_cfg.use_intra = false;

        std::cerr << "[6] training with consistency terms...\n";
        const TrainOutcome pcl = train(corpus, cfg);
        std::cerr << "[6] training supervised-only...\n";
        const TrainOutcome bce = train(corpus, bce_cfg);

        const int stride = cfg.spec.tile / 2;
        const SeamReport seam_pcl =
            seam_on_items(pcl.model, corpus, test_ids, cfg.spec.tile, stride, 24, 5);
        const SeamReport seam_bce =
            seam_on_items(bce.model, corpus, test_ids, cfg.spec.tile, stride, 24, 5);

        Confusion pool_pcl, pool_bce;
        for (const CorpusItem& item : corpus) {
            if (split.at(item.id) != Split::Test) continue;
            pool_pcl.add(eval_item(pcl.model, item, cfg.spec.tile));
            pool_bce.add(eval_item(bce.model, item, cfg.spec.tile));
        }
        const double iou_pcl = iou(pool_pcl);
        const double iou_bce = iou(pool_bce);
        const double elapsed = seconds_since(t0);

        ok &= seam_pcl.mean() <= 0.8 * seam_bce.mean();
        ok &= iou_pcl >= iou_bce - 0.01;
        ok &= elapsed < 300.0;

        char buf[160];
        std::snprintf(buf, sizeof buf,
                      "seam %.5f vs %.5f (ratio %.2f), iou %.4f vs %.4f, %.0fs",
                      seam_pcl.mean(), seam_bce.mean(), seam_pcl.mean() / seam_bce.mean(),
                      iou_pcl, iou_bce, elapsed);
        detail = buf;
    } catch (const std::exception& e) {
        ok = false;
        detail = e.what();
    }
    report(6, "consistency training shrinks seams at matched accuracy", ok, detail);
}

// ---- 7: metrics identities ----

void metrics_identities() {
    bool ok = true;
    std::string detail;
    try {
        Rng rng(7007);
        for (int i = 0; i < 1000 && ok; ++i) {
            const Confusion c{rng.uniform_index(5000), rng.uniform_index(5000),
                              rng.uniform_index(5000), rng.uniform_index(5000)};
            const double r = iou(c);
            ok &= std::abs(f1(c) - 2.0 * r / (1.0 + r)) <= 1e-12;
        }

        const int side = 64, tile = 16;
        const ConfidenceMap p = oracle::random_map(rng, side, side, 0.01, 0.99);
        const RasterGrid y = oracle::random_mask(rng, side, side);
        Confusion whole, tiled;
        accumulate(p, y, 0.5, whole);
        for (const TileCoord& t : tile_grid(side, side, tile, tile)) {
            std::vector<double> vals;
            RasterGrid ty = RasterGrid::zeros(tile, tile, 1);
            for (int r = 0; r < tile; ++r)
                for (int c = 0; c < tile; ++c) {
                    vals.push_back(p.at(t.row0 + r, t.col0 + c));
                    ty.at(r, c, 0) = y.at(t.row0 + r, t.col0 + c, 0);
                }
            accumulate(ConfidenceMap::from(tile, tile, std::move(vals)), ty, 0.5, tiled);
        }
        ok &= whole.tp == tiled.tp && whole.fp == tiled.fp && whole.fn == tiled.fn &&
              whole.tn == tiled.tn;

        std::vector<std::pair<TileCoord, ConfidenceMap>> tiles;
        for (const TileCoord& t : tile_grid(side, side, tile, tile)) {
            std::vector<double> vals;
            for (int r = 0; r < tile; ++r)
                for (int c = 0; c < tile; ++c) vals.push_back(p.at(t.row0 + r, t.col0 + c));
            tiles.emplace_back(t, ConfidenceMap::from(tile, tile, std::move(vals)));
        }
        const ConfidenceMap back = stitch(tiles, side, side);
        ok &= back.values == p.values;
        detail = "f1/iou identity, partition equality, bit-exact restitch";
    } catch (const std::exception& e) {
        ok = false;
        detail = e.what();
    }
    report(7, "metrics identities", ok, detail);
}

// ---- 8: determinism, including parallel and CLI paths ----

void determinism(const std::string& cli) {
    bool ok = true;
    std::string detail;
    try {
        const CorpusItem a = synth_image(7, 0, 1600);
        const CorpusItem b = synth_image(7, 0, 1600);
        ok &= a.image.data == b.image.data && a.mask.data == b.mask.data;

        std::vector<std::string> ids;
        char buf[16];
        for (int i = 0; i < 50; ++i) {
            std::snprintf(buf, sizeof buf, "img_%03d", i);
            ids.emplace_back(buf);
        }
        ok &= make_split(ids, 13) == make_split(ids, 13);

        PyramidSpec spec;
        spec.tile = 16;
        const std::vector<CorpusItem> corpus = synth_corpus(13, 4, 400, spec);
        TrainConfig cfg;
        cfg.spec = spec;
        cfg.epochs = 2;
        cfg.samples_per_image = 4;
        cfg.seed = 13;
        const TrainOutcome t1 = train(corpus, cfg);
        TrainConfig cfg2 = cfg;
        cfg2.threads = 3;
        const TrainOutcome t2 = train(corpus, cfg2);
        ok &= t1.model.weights == t2.model.weights && t1.model.bias == t2.model.bias;

        if (cli.empty()) {
            ok = false;
            detail = "CLI path not provided";
        } else {
            int code1 = 0, code2 = 0;
            const std::string cmd = "'" + cli + "' split --n 250 --seed 7 2>/dev/null";
            const std::string out1 = run_capture(cmd, code1);
            const std::string out2 = run_capture(cmd, code2);
            ok &= code1 == 0 && code2 == 0 && !out1.empty() && out1 == out2;
            ok &= out1.find("\"train\": 200") != std::string::npos;
            ok &= out1.find("\"val\": 25") != std::string::npos;
            ok &= out1.find("\"test\": 25") != std::string::npos;
            detail = "scene/split/train runs identical; CLI split 200/25/25 twice";
        }
    } catch (const std::exception& e) {
        ok = false;
        detail = e.what();
    }
    report(8, "bit-identical reruns with fixed seeds", ok, detail);
}

// ---- 9: format conformance ----

void format_conformance() {
    bool ok = true;
    std::string detail;
    try {
        const fs::path p = tmp("acc_golden.pcm");
        write_pcm(p.string(), ConfidenceMap::from(2, 1, {0.5, 0.25}));
        std::ifstream in(p, std::ios::binary);
        std::vector<unsigned char> bytes{std::istreambuf_iterator<char>(in),
                                         std::istreambuf_iterator<char>()};
        const std::vector<unsigned char> want = {0x50, 0x43, 0x4D, 0x31, 0x02, 0x00, 0x00,
                                                 0x00, 0x01, 0x00, 0x00, 0x00, 0x00, 0x00,
                                                 0x00, 0x3F, 0x00, 0x00, 0x80, 0x3E};
        ok &= bytes == want;

        ByteRaster bad = ByteRaster::zeros(4, 4, 1);
        bad.at(2, 2) = 128;
        const fs::path q = tmp("acc_gray128.png");
        write_png_gray(q.string(), bad);
        bool rejected = false;
        try {
            read_png_mask(q.string());
        } catch (const FormatError&) {
            rejected = true;
        }
        ok &= rejected;
        detail = "golden PCM1 bytes match; non-binary mask rejected";
    } catch (const std::exception& e) {
        ok = false;
        detail = e.what();
    }
    report(9, "format conformance", ok, detail);
}

} // namespace

int main(int argc, char** argv) {
    const std::string cli = argc > 1 ? argv[1] : "";

    geometry_contract();
    loss_oracle_equivalence();
    gradient_suite();
    scalar_cases();
    zero_identities();
    trainer_effect();
    metrics_identities();
    determinism(cli);
    format_conformance();

    if (failures) {
        std::cout << failures << " criterion(s) failed\n";
        return 1;
    }
    std::cout << "all 9 criteria passed\n";
    return 0;
}
