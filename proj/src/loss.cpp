#include "pclwater/loss.hpp"

#include <cmath>

namespace pclwater {

namespace {

// x^r with fast paths for the common exponents.
double pow_r(double x, double r) {
    if (r == 2.0) return x * x;
    if (r == 1.0) return x;
    if (r == 0.0) return 1.0;
    return std::pow(x, r);
}

// d/dx x^r = r*x^(r-1); zero by convention when r == 0.
double dpow_r(double x, double r) {
    if (r == 2.0) return 2.0 * x;
    if (r == 1.0) return 1.0;
    if (r <= 0.0) return 0.0;
    return r * std::pow(x, r - 1.0);
}

void require_same_shape(int wa, int ha, int wb, int hb, const char* what) {
    if (wa != wb || ha != hb) {
        throw ShapeError(std::string(what) + ": " + std::to_string(wa) + "x" + std::to_string(ha) +
                         " vs " + std::to_string(wb) + "x" + std::to_string(hb));
    }
}

} // namespace

void LossParams::validate() const {
    if (!(alpha_inter >= 0.0)) throw ParamError("alpha_inter must be >= 0");
    if (!(alpha_intra >= 0.0)) throw ParamError("alpha_intra must be >= 0");
    if (!(r >= 0.0)) throw ParamError("focal exponent r must be >= 0");
    if (!(lambda >= 0.0 && lambda <= 1.0)) throw ParamError("lambda must lie in [0,1]");
}

GradGrid GradGrid::zeros(int width, int height) {
    if (width < 1 || height < 1) throw ShapeError("gradient grid needs positive dimensions");
    GradGrid g;
    g.width = width;
    g.height = height;
    g.values.assign(std::size_t(width) * height, 0.0);
    return g;
}

void accumulate(LossResult& into, const LossResult& term, double weight) {
    into.value += weight * term.value;
    for (const auto& [key, grad] : term.grads) {
        auto it = into.grads.find(key);
        if (it == into.grads.end()) {
            GradGrid scaled = grad;
            if (weight != 1.0) {
                for (double& v : scaled.values) v *= weight;
            }
            into.grads.emplace(key, std::move(scaled));
            continue;
        }
        GradGrid& dst = it->second;
        require_same_shape(dst.width, dst.height, grad.width, grad.height,
                           ("gradient shapes for '" + key + "' differ").c_str());
        for (std::size_t i = 0; i < dst.values.size(); ++i) dst.values[i] += weight * grad.values[i];
    }
}

LossResult bce_loss(const ConfidenceMap& p, const RasterGrid& y, const std::string& id) {
    require_same_shape(p.width, p.height, y.width, y.height, "bce inputs differ");
    if (y.channels != 1) throw ShapeError("bce mask must have one channel");

    const std::size_t n = p.values.size();
    const double inv_n = 1.0 / double(n);
    GradGrid grad = GradGrid::zeros(p.width, p.height);
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double pc = clamp_confidence(p.values[i]);
        const double yy = y.data[i];
        sum -= yy * std::log(pc) + (1.0 - yy) * std::log(1.0 - pc);
        grad.values[i] = (pc - yy) / (pc * (1.0 - pc)) * inv_n;
    }
    LossResult res;
    res.value = sum * inv_n;
    res.grads.emplace(id, std::move(grad));
    return res;
}

LossResult inter_pair_loss(const ConfidenceMap& p1, const ConfidenceMap& q, const RasterGrid& y,
                           const LossParams& params, const std::string& q_id) {
    params.validate();
    require_same_shape(p1.width, p1.height, q.width, q.height, "confidence maps differ");
    require_same_shape(p1.width, p1.height, y.width, y.height, "confidence map vs mask");
    if (y.channels != 1) throw ShapeError("mask must have one channel");

    const double r = params.r;
    const double lam = params.lambda;
    const std::size_t n = p1.values.size();
    const double inv_n = 1.0 / double(n);

    GradGrid g_p = GradGrid::zeros(p1.width, p1.height);
    GradGrid g_q = GradGrid::zeros(p1.width, p1.height);
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double p = p1.values[i];
        const double yy = y.data[i];
        const double d = p - q.values[i];
        const double d2 = d * d;
        const double w1 = pow_r(1.0 - p, r) * (1.0 - lam) * yy;
        const double w0 = lam * pow_r(p, r) * (1.0 - yy);
        sum += (w1 + w0) * d2;
        const double dw = -dpow_r(1.0 - p, r) * (1.0 - lam) * yy + lam * dpow_r(p, r) * (1.0 - yy);
        g_p.values[i] = (dw * d2 + 2.0 * (w1 + w0) * d) * inv_n;
        g_q.values[i] = -2.0 * (w1 + w0) * d * inv_n;
    }
    LossResult res;
    res.value = sum * inv_n;
    res.grads.emplace("p_1st", std::move(g_p));
    res.grads.emplace(q_id, std::move(g_q));
    return res;
}

LossResult inter_loss(const ConfidenceMap& p_1st, const ConfidenceMap& p2_aligned,
                      const ConfidenceMap& p3_aligned, const RasterGrid& y_1st,
                      const LossParams& params) {
    LossResult res = inter_pair_loss(p_1st, p2_aligned, y_1st, params, "p2_aligned");
    accumulate(res, inter_pair_loss(p_1st, p3_aligned, y_1st, params, "p3_aligned"));
    return res;
}

LossResult intra_loss(const std::array<ConfidenceMap, 4>& maps,
                      const std::array<RasterGrid, 4>& masks, const IntraLayerGroup& group,
                      const LossParams& params, IntraNorm norm) {
    params.validate();
    const int tile = group.tile_size;
    if (tile < 1) throw ShapeError("intra group has no tile size");
    for (int k = 0; k < 4; ++k) {
        require_same_shape(maps[k].width, maps[k].height, tile, tile, "intra map vs tile");
        require_same_shape(masks[k].width, masks[k].height, tile, tile, "intra mask vs tile");
        if (masks[k].channels != 1) throw ShapeError("intra masks must have one channel");
    }

    const double r = params.r;
    const double lam = params.lambda;
    const double tile_area = double(tile) * tile;

    std::array<GradGrid, 4> grads = {GradGrid::zeros(tile, tile), GradGrid::zeros(tile, tile),
                                     GradGrid::zeros(tile, tile), GradGrid::zeros(tile, tile)};
    double value = 0.0;
    for (const PairOverlap& po : group.pairs) {
        const IntRect& ri = po.in_i;
        const IntRect& rj = po.in_j;
        const double area =
            norm == IntraNorm::TileArea ? tile_area : double(ri.height) * ri.width;
        const double inv = 1.0 / area;
        const ConfidenceMap& pi = maps[po.i];
        const ConfidenceMap& pj = maps[po.j];
        const RasterGrid& yi = masks[po.i];
        GradGrid& gi = grads[po.i];
        GradGrid& gj = grads[po.j];
        double pair_sum = 0.0;
        for (int rr = 0; rr < ri.height; ++rr) {
            for (int cc = 0; cc < ri.width; ++cc) {
                const double p = pi.at(ri.row0 + rr, ri.col0 + cc);
                const double yy = yi.at(ri.row0 + rr, ri.col0 + cc);
                const double d = p - pj.at(rj.row0 + rr, rj.col0 + cc);
                const double d2 = d * d;
                const double w1 = pow_r(1.0 - p, r) * (1.0 - lam) * yy;
                const double w0 = lam * pow_r(p, r) * (1.0 - yy);
                pair_sum += (w1 + w0) * d2;
                const double dw =
                    -dpow_r(1.0 - p, r) * (1.0 - lam) * yy + lam * dpow_r(p, r) * (1.0 - yy);
                gi.at(ri.row0 + rr, ri.col0 + cc) += (dw * d2 + 2.0 * (w1 + w0) * d) * inv;
                gj.at(rj.row0 + rr, rj.col0 + cc) += -2.0 * (w1 + w0) * d * inv;
            }
        }
        value += pair_sum * inv;
    }

    LossResult res;
    res.value = value;
    for (int k = 0; k < 4; ++k) {
        res.grads.emplace("p" + std::to_string(k + 1), std::move(grads[k]));
    }
    return res;
}

LossResult total_loss(const LossResult& seg, const LossResult& inter, const LossResult& intra,
                      const LossParams& params) {
    params.validate();
    LossResult res = seg;
    if (params.alpha_inter != 0.0) accumulate(res, inter, params.alpha_inter);
    if (params.alpha_intra != 0.0) accumulate(res, intra, params.alpha_intra);
    return res;
}

} // namespace pclwater
