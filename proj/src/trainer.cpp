#include "pclwater/trainer.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <set>

#include "pclwater/parallel.hpp"
#include "pclwater/rng.hpp"

namespace pclwater {

namespace {

struct ItemData {
    const CorpusItem* item = nullptr;
    std::vector<RasterGrid> uppers; // cached layer 2.. rasters (when needed)
};

struct SampleDesc {
    int item_idx = 0;
    TileCoord anchor;
    int intra_r = 0;
    int intra_c = 0;
};

struct SampleEval {
    ParamGrad grad;
    double seg = 0.0;
    double inter = 0.0;
    double intra = 0.0;
    double total = 0.0;
};

int intra_axis_count(int side, int tile, int stride) {
    const int reach = tile + stride;
    if (reach > side) return 0;
    return (side - reach) / tile + 1;
}

std::vector<SampleDesc> draw_epoch_descs(const TrainConfig& cfg, int epoch, int train_items,
                                         int side) {
    const int tile = cfg.spec.tile;
    const int lattice = side / tile;
    const int intra_axis = intra_axis_count(side, tile, cfg.stride());
    std::vector<SampleDesc> descs;
    descs.reserve(std::size_t(train_items) * std::size_t(cfg.samples_per_image));
    for (int it = 0; it < train_items; ++it) {
        Rng rng(mix_seed(mix_seed(cfg.seed, 0xD15C0000ull + std::uint64_t(epoch)),
                         std::uint64_t(it)));
        for (int k = 0; k < cfg.samples_per_image; ++k) {
            SampleDesc d;
            d.item_idx = it;
            d.anchor = TileCoord{int(rng.uniform_index(std::uint64_t(lattice))) * tile,
                                 int(rng.uniform_index(std::uint64_t(lattice))) * tile, tile};
            d.intra_r = int(rng.uniform_index(std::uint64_t(intra_axis))) * tile;
            d.intra_c = int(rng.uniform_index(std::uint64_t(intra_axis))) * tile;
            descs.push_back(d);
        }
    }
    return descs;
}

SampleEval eval_sample(const ToyModel& model, const ItemData& it, const SampleDesc& d,
                       const TrainConfig& cfg) {
    const int tile = cfg.spec.tile;
    const int side = it.item->image.width;
    LossParams eff = cfg.loss_params;
    if (!cfg.use_inter) eff.alpha_inter = 0.0;
    if (!cfg.use_intra) eff.alpha_intra = 0.0;

    // anchor tile
    RasterGrid t1 = tile_from_bytes(it.item->image, d.anchor);
    FeatureGrid f1 = featurize(t1);
    ConfidenceMap p1 = forward(model, f1);
    RasterGrid y1 = mask_tile_from_bytes(it.item->mask, d.anchor);

    // overlapping 2x2 window
    IntraLayerGroup group = intra_group_sample(side, tile, d.intra_r, d.intra_c, cfg.stride());
    std::array<FeatureGrid, 4> wf;
    std::array<ConfidenceMap, 4> wp = {ConfidenceMap::filled(1, 1, 0.5),
                                       ConfidenceMap::filled(1, 1, 0.5),
                                       ConfidenceMap::filled(1, 1, 0.5),
                                       ConfidenceMap::filled(1, 1, 0.5)};
    std::array<RasterGrid, 4> wy;
    for (int k = 0; k < 4; ++k) {
        RasterGrid tk = tile_from_bytes(it.item->image, group.tiles[std::size_t(k)]);
        wf[std::size_t(k)] = featurize(tk);
        wp[std::size_t(k)] = forward(model, wf[std::size_t(k)]);
        wy[std::size_t(k)] = mask_tile_from_bytes(it.item->mask, group.tiles[std::size_t(k)]);
    }

    // supervision: every layer-1 tile this sample touched, equally weighted
    LossResult seg;
    accumulate(seg, bce_loss(p1, y1, "p_1st"), 1.0 / 5.0);
    for (int k = 0; k < 4; ++k) {
        accumulate(seg, bce_loss(wp[std::size_t(k)], wy[std::size_t(k)], "p" + std::to_string(k + 1)),
                   1.0 / 5.0);
    }

    LossResult inter_res;
    InterLayerGroup ig;
    std::vector<FeatureGrid> uf;
    std::vector<ConfidenceMap> up;
    if (cfg.use_inter) {
        ig = inter_group_for(d.anchor, cfg.spec, side);
        uf.reserve(ig.uppers.size());
        up.reserve(ig.uppers.size());
        std::vector<ConfidenceMap> aligned;
        for (std::size_t u = 0; u < ig.uppers.size(); ++u) {
            RasterGrid tu = crop(it.uppers[u], ig.uppers[u].tile);
            uf.push_back(featurize(tu));
            up.push_back(forward(model, uf.back()));
            aligned.push_back(align_confidence(up.back(), ig.uppers[u].footprint, tile));
        }
        inter_res = inter_loss(p1, aligned[0], aligned[1], y1, eff);
    }

    LossResult intra_res;
    if (cfg.use_intra) intra_res = intra_loss(wp, wy, group, eff);

    LossResult total = total_loss(seg, inter_res, intra_res, eff);

    SampleEval out;
    out.grad = ParamGrad::zeros(model.feature_dim());
    out.seg = seg.value;
    out.inter = inter_res.value;
    out.intra = intra_res.value;
    out.total = total.value;

    auto backprop = [&](const std::string& key, const FeatureGrid& f, const ConfidenceMap& p) {
        auto itg = total.grads.find(key);
        if (itg == total.grads.end()) return;
        out.grad.add(backward(model, f, p, itg->second));
    };
    backprop("p_1st", f1, p1);
    if (cfg.use_inter) {
        const char* keys[2] = {"p2_aligned", "p3_aligned"};
        for (std::size_t u = 0; u < ig.uppers.size(); ++u) {
            auto itg = total.grads.find(keys[u]);
            if (itg == total.grads.end()) continue;
            GradGrid src_grad = GradGrid::zeros(tile, tile);
            src_grad.values = sample_bilinear_adjoint(itg->second.values, tile, tile, tile,
                                                      ig.uppers[u].footprint);
            out.grad.add(backward(model, uf[u], up[u], src_grad));
        }
    }
    for (int k = 0; k < 4; ++k) {
        backprop("p" + std::to_string(k + 1), wf[std::size_t(k)], wp[std::size_t(k)]);
    }
    return out;
}

Confusion confusion_for_tile(const ToyModel& model, const CorpusItem& item,
                             const TileCoord& coord) {
    RasterGrid t = tile_from_bytes(item.image, coord);
    ConfidenceMap p = forward(model, featurize(t));
    RasterGrid y = mask_tile_from_bytes(item.mask, coord);
    Confusion c;
    accumulate(p, y, 0.5, c);
    return c;
}

} // namespace

void TrainConfig::validate() const {
    if (!(learning_rate > 0.0)) throw ParamError("learning_rate must be > 0");
    if (epochs < 1) throw ParamError("epochs must be >= 1");
    if (batch < 1) throw ParamError("batch must be >= 1");
    if (samples_per_image < 1) throw ParamError("samples_per_image must be >= 1");
    if (!(momentum >= 0.0 && momentum < 1.0)) throw ParamError("momentum must lie in [0,1)");
    if (!(weight_decay >= 0.0)) throw ParamError("weight_decay must be >= 0");
    if (!(poly_power > 0.0)) throw ParamError("poly_power must be > 0");
    if (threads < 1) throw ParamError("threads must be >= 1");
    if (overlap_stride < 0 || overlap_stride >= spec.tile) {
        throw ParamError("overlap_stride must lie in [0, tile)");
    }
    if (heldout_eval_tiles < 1) throw ParamError("heldout_eval_tiles must be >= 1");
    loss_params.validate();
}

TrainOutcome train(const std::vector<CorpusItem>& corpus, const TrainConfig& cfg) {
    cfg.validate();
    if (corpus.empty()) throw ParamError("training corpus is empty");

    std::map<std::string, const CorpusItem*> by_id;
    for (const CorpusItem& item : corpus) {
        if (!by_id.emplace(item.id, &item).second) {
            throw ManifestError("duplicate corpus id '" + item.id + "'");
        }
    }
    std::set<std::string> heldout(cfg.heldout_ids.begin(), cfg.heldout_ids.end());
    for (const std::string& id : heldout) {
        if (!by_id.count(id)) throw ParamError("held-out id '" + id + "' not in corpus");
    }

    const int side = corpus.front().image.width;
    const int channels = corpus.front().image.channels;
    for (const CorpusItem& item : corpus) {
        if (item.image.width != item.image.height) {
            throw GeometryError("training images must be square, got " +
                                std::to_string(item.image.width) + "x" +
                                std::to_string(item.image.height));
        }
        if (item.image.width != side || item.image.channels != channels) {
            throw ShapeError("corpus images must share dimensions");
        }
        if (item.mask.width != side || item.mask.height != side || item.mask.channels != 1) {
            throw ShapeError("mask of '" + item.id + "' does not match its image");
        }
        cfg.spec.validate(item.image.width, item.image.height);
    }
    if (intra_axis_count(side, cfg.spec.tile, cfg.stride()) < 1) {
        throw GeometryError("image side too small for an overlapping 2x2 window");
    }

    std::vector<ItemData> train_items;
    std::vector<const CorpusItem*> heldout_items;
    for (const CorpusItem& item : corpus) {
        if (heldout.count(item.id)) {
            heldout_items.push_back(&item);
            continue;
        }
        ItemData data;
        data.item = &item;
        if (cfg.use_inter) {
            for (std::size_t k = 1; k < cfg.spec.rates.size(); ++k) {
                data.uppers.push_back(downsample_area_from_bytes(item.image, cfg.spec.rates[k]));
            }
        }
        train_items.push_back(std::move(data));
    }
    if (train_items.empty()) throw ParamError("every corpus item is held out");

    // fixed held-out probe tiles, shared by every epoch
    std::vector<std::pair<int, TileCoord>> probe;
    if (!heldout_items.empty()) {
        Rng rng(mix_seed(cfg.seed, 0xE7A1CA11ull));
        const int lattice = side / cfg.spec.tile;
        for (int k = 0; k < cfg.heldout_eval_tiles; ++k) {
            const int item = int(rng.uniform_index(heldout_items.size()));
            const int r = int(rng.uniform_index(std::uint64_t(lattice))) * cfg.spec.tile;
            const int c = int(rng.uniform_index(std::uint64_t(lattice))) * cfg.spec.tile;
            probe.emplace_back(item, TileCoord{r, c, cfg.spec.tile});
        }
    }

    TrainOutcome outcome;
    outcome.model = ToyModel::zeros(feature_dim_for_channels(channels));
    std::vector<double> velocity(outcome.model.weights.size(), 0.0);
    double bias_velocity = 0.0;

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        const double lr =
            cfg.poly_schedule
                ? cfg.learning_rate * std::pow(1.0 - double(epoch) / double(cfg.epochs),
                                               cfg.poly_power)
                : cfg.learning_rate;

        std::vector<SampleDesc> descs =
            draw_epoch_descs(cfg, epoch, int(train_items.size()), side);
        double seg_sum = 0.0, inter_sum = 0.0, intra_sum = 0.0, total_sum = 0.0;

        for (std::size_t start = 0; start < descs.size(); start += std::size_t(cfg.batch)) {
            const int bn = int(std::min(std::size_t(cfg.batch), descs.size() - start));
            std::vector<SampleEval> evals{std::size_t(bn)};
            parallel_for(bn, cfg.threads, [&](int k) {
                const SampleDesc& d = descs[start + std::size_t(k)];
                evals[std::size_t(k)] =
                    eval_sample(outcome.model, train_items[std::size_t(d.item_idx)], d, cfg);
            });

            ParamGrad g = ParamGrad::zeros(outcome.model.feature_dim());
            for (int k = 0; k < bn; ++k) {
                g.add(evals[std::size_t(k)].grad);
                seg_sum += evals[std::size_t(k)].seg;
                inter_sum += evals[std::size_t(k)].inter;
                intra_sum += evals[std::size_t(k)].intra;
                total_sum += evals[std::size_t(k)].total;
            }
            g.scale(1.0 / double(bn));

            for (std::size_t i = 0; i < velocity.size(); ++i) {
                velocity[i] = cfg.momentum * velocity[i] -
                              lr * (g.d_weights[i] + cfg.weight_decay * outcome.model.weights[i]);
                outcome.model.weights[i] += velocity[i];
            }
            bias_velocity = cfg.momentum * bias_velocity - lr * g.d_bias;
            outcome.model.bias += bias_velocity;
        }

        EpochStats stats;
        stats.epoch = epoch + 1;
        stats.lr = lr;
        const double inv = descs.empty() ? 0.0 : 1.0 / double(descs.size());
        stats.seg = seg_sum * inv;
        stats.inter = inter_sum * inv;
        stats.intra = intra_sum * inv;
        stats.total = total_sum * inv;
        if (probe.empty()) {
            stats.heldout_iou = std::numeric_limits<double>::quiet_NaN();
        } else {
            std::vector<Confusion> parts(probe.size());
            parallel_for(int(probe.size()), cfg.threads, [&](int k) {
                const auto& [item, coord] = probe[std::size_t(k)];
                parts[std::size_t(k)] =
                    confusion_for_tile(outcome.model, *heldout_items[std::size_t(item)], coord);
            });
            Confusion pooled;
            for (const Confusion& c : parts) pooled.add(c);
            stats.heldout_iou = iou(pooled);
        }
        outcome.history.push_back(stats);
    }
    return outcome;
}

ConfidenceMap predict_full(const ToyModel& model, const RasterGrid& image, int tile, int stride,
                           int threads) {
    const std::vector<TileCoord> coords = tile_grid(image.height, image.width, tile, stride);
    std::vector<std::pair<TileCoord, ConfidenceMap>> tiles(
        coords.size(), {TileCoord{}, ConfidenceMap::filled(1, 1, 0.5)});
    parallel_for(int(coords.size()), threads, [&](int k) {
        const TileCoord& coord = coords[std::size_t(k)];
        RasterGrid t = crop(image, coord);
        tiles[std::size_t(k)] = {coord, forward(model, featurize(t))};
    });
    return stitch(tiles, image.height, image.width);
}

ConfidenceMap predict_full(const ToyModel& model, const ByteRaster& image, int tile, int stride,
                           int threads) {
    const std::vector<TileCoord> coords = tile_grid(image.height, image.width, tile, stride);
    std::vector<std::pair<TileCoord, ConfidenceMap>> tiles(
        coords.size(), {TileCoord{}, ConfidenceMap::filled(1, 1, 0.5)});
    parallel_for(int(coords.size()), threads, [&](int k) {
        const TileCoord& coord = coords[std::size_t(k)];
        RasterGrid t = tile_from_bytes(image, coord);
        tiles[std::size_t(k)] = {coord, forward(model, featurize(t))};
    });
    return stitch(tiles, image.height, image.width);
}

Confusion eval_item(const ToyModel& model, const CorpusItem& item, int tile, int threads) {
    const std::vector<TileCoord> coords = tile_grid(item.image.height, item.image.width, tile, tile);
    std::vector<Confusion> parts(coords.size());
    parallel_for(int(coords.size()), threads, [&](int k) {
        parts[std::size_t(k)] = confusion_for_tile(model, item, coords[std::size_t(k)]);
    });
    Confusion pooled;
    for (const Confusion& c : parts) pooled.add(c);
    return pooled;
}

SeamReport seam_on_items(const ToyModel& model, const std::vector<CorpusItem>& corpus,
                         const std::vector<std::string>& ids, int tile, int overlap_stride,
                         int windows_per_image, std::uint64_t seed, int threads) {
    if (windows_per_image < 1) throw ParamError("windows_per_image must be >= 1");
    const int stride = overlap_stride > 0 ? overlap_stride : tile / 2;

    SeamReport report;
    for (std::size_t idx = 0; idx < ids.size(); ++idx) {
        const CorpusItem* item = nullptr;
        for (const CorpusItem& c : corpus) {
            if (c.id == ids[idx]) item = &c;
        }
        if (!item) throw ParamError("unknown corpus id '" + ids[idx] + "'");
        const int side = item->image.width;

        std::vector<std::pair<int, int>> lattice = intra_anchor_lattice(side, tile, stride);
        if (lattice.empty()) throw GeometryError("image too small for overlapping windows");
        Rng rng(mix_seed(seed, 0x5EA30000ull + idx));
        const std::size_t take = std::min(std::size_t(windows_per_image), lattice.size());
        for (std::size_t k = 0; k < take; ++k) {
            const std::size_t j = k + rng.uniform_index(lattice.size() - k);
            std::swap(lattice[k], lattice[j]);
        }

        std::vector<SeamStats> parts(take);
        parallel_for(int(take), threads, [&](int k) {
            const auto& [wr, wc] = lattice[std::size_t(k)];
            IntraLayerGroup group = intra_group_sample(side, tile, wr, wc, stride);
            std::vector<std::pair<TileCoord, ConfidenceMap>> tiles;
            tiles.reserve(4);
            for (const TileCoord& coord : group.tiles) {
                RasterGrid t = tile_from_bytes(item->image, coord);
                tiles.emplace_back(coord, forward(model, featurize(t)));
            }
            parts[std::size_t(k)] = seam_stats(tiles);
        });
        for (const SeamStats& s : parts) report.stats.add(s);
        report.windows += take;
    }
    if (report.windows == 0) throw DiagnosticError("no windows evaluated");
    return report;
}

void write_history_csv(std::ostream& out, const std::vector<EpochStats>& history) {
    char buf[64];
    auto fmt = [&](double v) {
        if (std::isnan(v)) return std::string();
        std::snprintf(buf, sizeof buf, "%.10g", v);
        return std::string(buf);
    };
    out << "epoch,lr,seg,inter,intra,total,heldout_iou\n";
    for (const EpochStats& e : history) {
        out << e.epoch << ',' << fmt(e.lr) << ',' << fmt(e.seg) << ',' << fmt(e.inter) << ','
            << fmt(e.intra) << ',' << fmt(e.total) << ',' << fmt(e.heldout_iou) << "\n";
    }
}

} // namespace pclwater
