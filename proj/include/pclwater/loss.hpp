#pragma once

#include <map>
#include <string>
#include <vector>

#include "pclwater/pyramid.hpp"
#include "pclwater/raster.hpp"

namespace pclwater {

struct LossParams {
    double alpha_inter = 1.0;
    double alpha_intra = 1.0;
    double r = 2.0;
    double lambda = 0.2;

    void validate() const;
};

// Gradient with respect to one confidence map; same layout as the map itself.
struct GradGrid {
    int width = 0;
    int height = 0;
    std::vector<double> values;

    static GradGrid zeros(int width, int height);
    double& at(int r, int c) { return values[std::size_t(r) * width + c]; }
    double at(int r, int c) const { return values[std::size_t(r) * width + c]; }
};

// value plus gradients keyed by the identifier of each input map.
// bce_loss uses "p" (overridable); inter_loss uses "p_1st", "p2_aligned",
// "p3_aligned"; intra_loss uses "p1".."p4".
struct LossResult {
    double value = 0.0;
    std::map<std::string, GradGrid> grads;
};

// into += weight * term; gradients merged by identifier, summed on collision.
void accumulate(LossResult& into, const LossResult& term, double weight = 1.0);

LossResult bce_loss(const ConfidenceMap& p, const RasterGrid& y, const std::string& id = "p");

// One weighted squared-difference term q vs p1; grads keyed "p_1st" and q_id.
// Weighting uses p1 and y only, so the term is asymmetric by design.
LossResult inter_pair_loss(const ConfidenceMap& p1, const ConfidenceMap& q, const RasterGrid& y,
                           const LossParams& params, const std::string& q_id);

LossResult inter_loss(const ConfidenceMap& p_1st, const ConfidenceMap& p2_aligned,
                      const ConfidenceMap& p3_aligned, const RasterGrid& y_1st,
                      const LossParams& params);

enum class IntraNorm {
    TileArea,    // divide every pair's sum by tile w*h (printed form)
    OverlapArea, // divide each pair's sum by its own overlap pixel count
};

LossResult intra_loss(const std::array<ConfidenceMap, 4>& maps,
                      const std::array<RasterGrid, 4>& masks, const IntraLayerGroup& group,
                      const LossParams& params, IntraNorm norm = IntraNorm::TileArea);

// seg + alpha_inter * inter + alpha_intra * intra. Terms with a zero alpha are
// skipped outright so an ablated total is bit-identical to the surviving parts.
LossResult total_loss(const LossResult& seg, const LossResult& inter, const LossResult& intra,
                      const LossParams& params);

} // namespace pclwater
