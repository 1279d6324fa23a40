#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "pclwater/loss.hpp"
#include "pclwater/metrics.hpp"
#include "pclwater/model.hpp"
#include "pclwater/pyramid.hpp"
#include "pclwater/synth.hpp"

namespace pclwater {

struct TrainConfig {
    double learning_rate = 0.5;
    int epochs = 12;
    std::uint64_t seed = 7;
    LossParams loss_params;
    bool use_inter = true;
    bool use_intra = true;
    int batch = 4; // samples per parameter update

    double momentum = 0.9;
    double weight_decay = 5e-4;
    bool poly_schedule = false;
    double poly_power = 0.9;

    PyramidSpec spec;
    int overlap_stride = 0;    // 0 -> tile/2
    int samples_per_image = 8; // per epoch
    int threads = 1;

    std::vector<std::string> heldout_ids; // excluded from training, scored per epoch
    int heldout_eval_tiles = 48;

    void validate() const;
    int stride() const { return overlap_stride > 0 ? overlap_stride : spec.tile / 2; }
};

struct EpochStats {
    int epoch = 0;
    double lr = 0.0;
    double seg = 0.0;
    double inter = 0.0;
    double intra = 0.0;
    double total = 0.0;
    double heldout_iou = 0.0; // NaN when no held-out ids
};

struct TrainOutcome {
    ToyModel model;
    std::vector<EpochStats> history;
};

// Mini-batch SGD with momentum on the combined objective. Supervised BCE
// always covers the anchor tile and the four overlapping-window tiles, so
// runs that differ only in use_inter/use_intra see identical supervision.
// Sample draws do not depend on those flags either: trajectories with a
// shared seed stay comparable across ablations, and results are identical
// for any thread count.
TrainOutcome train(const std::vector<CorpusItem>& corpus, const TrainConfig& cfg);

ConfidenceMap predict_full(const ToyModel& model, const RasterGrid& image, int tile, int stride,
                           int threads = 1);
ConfidenceMap predict_full(const ToyModel& model, const ByteRaster& image, int tile, int stride,
                           int threads = 1);

// Confusion over the non-overlapping tile lattice of one item.
Confusion eval_item(const ToyModel& model, const CorpusItem& item, int tile, int threads = 1);

struct SeamReport {
    SeamStats stats;
    std::uint64_t windows = 0;
    double mean() const { return stats.mean(); }
};

// Predicts 2x2 overlapping windows on the named items and pools the
// pairwise overlap disagreement.
SeamReport seam_on_items(const ToyModel& model, const std::vector<CorpusItem>& corpus,
                         const std::vector<std::string>& ids, int tile, int overlap_stride,
                         int windows_per_image, std::uint64_t seed, int threads = 1);

void write_history_csv(std::ostream& out, const std::vector<EpochStats>& history);

} // namespace pclwater
