#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "pclwater/raster.hpp"

namespace pclwater {

struct Confusion {
    std::uint64_t tp = 0;
    std::uint64_t fp = 0;
    std::uint64_t fn = 0;
    std::uint64_t tn = 0;

    void add(const Confusion& other);
    std::uint64_t total() const { return tp + fp + fn + tn; }
};

// prediction = value >= threshold; counts add, so tiles can stream in.
void accumulate(const ConfidenceMap& conf, const RasterGrid& gt, double threshold,
                Confusion& into);
void accumulate(const RasterGrid& pred_binary, const RasterGrid& gt, Confusion& into);

// Degenerate case (no water in either prediction or truth) counts as perfect.
double iou(const Confusion& c);
double f1(const Confusion& c);

// Mean-blend overlapping tile predictions into one full-size map.
ConfidenceMap stitch(const std::vector<std::pair<TileCoord, ConfidenceMap>>& tiles, int height,
                     int width);

struct SeamStats {
    double abs_diff_sum = 0.0;
    std::uint64_t pixels = 0;

    void add(const SeamStats& other);
    double mean() const;
};

// Pairwise |p_i - p_j| totals over every overlap of every tile pair.
SeamStats seam_stats(const std::vector<std::pair<TileCoord, ConfidenceMap>>& tiles);
double seam_disagreement(const std::vector<std::pair<TileCoord, ConfidenceMap>>& tiles);

// Header name,tp,fp,fn,tn,iou,f1; one row per entry, then TOTAL (pooled
// counts) and MACRO (mean of the per-row scores, count columns blank).
void write_metrics_csv(std::ostream& out,
                       const std::vector<std::pair<std::string, Confusion>>& rows);

} // namespace pclwater
