#include "pclwater/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace pclwater {

void Confusion::add(const Confusion& other) {
    tp += other.tp;
    fp += other.fp;
    fn += other.fn;
    tn += other.tn;
}

namespace {

void require_binary_channel(const RasterGrid& g, const char* what) {
    if (g.channels != 1) throw ShapeError(std::string(what) + " must have one channel");
}

void count(bool pred, bool truth, Confusion& into) {
    if (pred && truth) ++into.tp;
    else if (pred && !truth) ++into.fp;
    else if (!pred && truth) ++into.fn;
    else ++into.tn;
}

} // namespace

void accumulate(const ConfidenceMap& conf, const RasterGrid& gt, double threshold,
                Confusion& into) {
    if (!(threshold > 0.0 && threshold < 1.0)) throw ParamError("threshold must lie in (0,1)");
    if (conf.width != gt.width || conf.height != gt.height) {
        throw ShapeError("confidence map vs ground truth shape mismatch");
    }
    require_binary_channel(gt, "ground truth");
    for (std::size_t i = 0; i < conf.values.size(); ++i) {
        count(conf.values[i] >= threshold, gt.data[i] != 0.0, into);
    }
}

void accumulate(const RasterGrid& pred_binary, const RasterGrid& gt, Confusion& into) {
    if (pred_binary.width != gt.width || pred_binary.height != gt.height) {
        throw ShapeError("prediction vs ground truth shape mismatch");
    }
    require_binary_channel(pred_binary, "prediction");
    require_binary_channel(gt, "ground truth");
    for (std::size_t i = 0; i < pred_binary.data.size(); ++i) {
        count(pred_binary.data[i] != 0.0, gt.data[i] != 0.0, into);
    }
}

double iou(const Confusion& c) {
    const std::uint64_t denom = c.tp + c.fp + c.fn;
    if (denom == 0) return 1.0;
    return double(c.tp) / double(denom);
}

double f1(const Confusion& c) {
    const std::uint64_t denom = 2 * c.tp + c.fp + c.fn;
    if (denom == 0) return 1.0;
    return 2.0 * double(c.tp) / double(denom);
}

ConfidenceMap stitch(const std::vector<std::pair<TileCoord, ConfidenceMap>>& tiles, int height,
                     int width) {
    if (height < 1 || width < 1) throw ShapeError("stitch target needs positive dimensions");
    std::vector<double> sum(std::size_t(width) * height, 0.0);
    std::vector<std::uint32_t> cnt(std::size_t(width) * height, 0);
    for (const auto& [coord, map] : tiles) {
        if (map.width != coord.size || map.height != coord.size) {
            throw ShapeError("tile map does not match its coordinate size");
        }
        if (coord.row0 < 0 || coord.col0 < 0 || coord.row0 + coord.size > height ||
            coord.col0 + coord.size > width) {
            throw GeometryError("tile at (" + std::to_string(coord.row0) + "," +
                                std::to_string(coord.col0) + ") exceeds the stitch target");
        }
        for (int r = 0; r < coord.size; ++r) {
            const std::size_t row = std::size_t(coord.row0 + r) * width + coord.col0;
            for (int c = 0; c < coord.size; ++c) {
                sum[row + c] += map.at(r, c);
                ++cnt[row + c];
            }
        }
    }
    for (std::size_t i = 0; i < cnt.size(); ++i) {
        if (cnt[i] == 0) {
            const int r = int(i / std::size_t(width));
            const int c = int(i % std::size_t(width));
            throw CoverageError("no tile covers pixel (" + std::to_string(r) + "," +
                                std::to_string(c) + ")");
        }
    }
    ConfidenceMap out = ConfidenceMap::filled(width, height, 0.5);
    for (std::size_t i = 0; i < sum.size(); ++i) out.values[i] = sum[i] / double(cnt[i]);
    return out;
}

void SeamStats::add(const SeamStats& other) {
    abs_diff_sum += other.abs_diff_sum;
    pixels += other.pixels;
}

double SeamStats::mean() const {
    if (pixels == 0) throw DiagnosticError("no overlapping tile pairs to compare");
    return abs_diff_sum / double(pixels);
}

SeamStats seam_stats(const std::vector<std::pair<TileCoord, ConfidenceMap>>& tiles) {
    SeamStats stats;
    for (std::size_t a = 0; a < tiles.size(); ++a) {
        const auto& [ca, ma] = tiles[a];
        if (ma.width != ca.size || ma.height != ca.size) {
            throw ShapeError("tile map does not match its coordinate size");
        }
        for (std::size_t b = a + 1; b < tiles.size(); ++b) {
            const auto& [cb, mb] = tiles[b];
            const int r0 = std::max(ca.row0, cb.row0);
            const int c0 = std::max(ca.col0, cb.col0);
            const int r1 = std::min(ca.row0 + ca.size, cb.row0 + cb.size);
            const int c1 = std::min(ca.col0 + ca.size, cb.col0 + cb.size);
            if (r0 >= r1 || c0 >= c1) continue;
            for (int r = r0; r < r1; ++r) {
                for (int c = c0; c < c1; ++c) {
                    stats.abs_diff_sum +=
                        std::abs(ma.at(r - ca.row0, c - ca.col0) - mb.at(r - cb.row0, c - cb.col0));
                }
            }
            stats.pixels += std::uint64_t(r1 - r0) * std::uint64_t(c1 - c0);
        }
    }
    return stats;
}

double seam_disagreement(const std::vector<std::pair<TileCoord, ConfidenceMap>>& tiles) {
    return seam_stats(tiles).mean();
}

void write_metrics_csv(std::ostream& out,
                       const std::vector<std::pair<std::string, Confusion>>& rows) {
    char buf[64];
    auto fmt = [&](double v) {
        std::snprintf(buf, sizeof buf, "%.10g", v);
        return std::string(buf);
    };
    out << "name,tp,fp,fn,tn,iou,f1\n";
    Confusion pooled;
    double iou_sum = 0.0, f1_sum = 0.0;
    for (const auto& [name, c] : rows) {
        out << name << ',' << c.tp << ',' << c.fp << ',' << c.fn << ',' << c.tn << ','
            << fmt(iou(c)) << ',' << fmt(f1(c)) << "\n";
        pooled.add(c);
        iou_sum += iou(c);
        f1_sum += f1(c);
    }
    out << "TOTAL," << pooled.tp << ',' << pooled.fp << ',' << pooled.fn << ',' << pooled.tn << ','
        << fmt(iou(pooled)) << ',' << fmt(f1(pooled)) << "\n";
    if (!rows.empty()) {
        out << "MACRO,,,,," << fmt(iou_sum / double(rows.size())) << ','
            << fmt(f1_sum / double(rows.size())) << "\n";
    }
}

} // namespace pclwater
