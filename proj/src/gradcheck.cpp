#include "pclwater/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "pclwater/loss.hpp"
#include "pclwater/model.hpp"
#include "pclwater/pyramid.hpp"
#include "pclwater/rng.hpp"

namespace pclwater {

namespace {

double rel_error(const std::vector<double>& analytic, const std::vector<double>& fd) {
    double max_diff = 0.0, max_a = 0.0, max_f = 0.0;
    for (std::size_t i = 0; i < analytic.size(); ++i) {
        max_diff = std::max(max_diff, std::abs(analytic[i] - fd[i]));
        max_a = std::max(max_a, std::abs(analytic[i]));
        max_f = std::max(max_f, std::abs(fd[i]));
    }
    return max_diff / std::max({1e-12, max_a, max_f});
}

// Central differences with the effective step (hi - lo) in the divisor.
template <class F>
std::vector<double> central_fd(std::vector<double>& x, double h, F&& eval) {
    std::vector<double> g(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double orig = x[i];
        const double hi = orig + h;
        const double lo = orig - h;
        x[i] = hi;
        const double fh = eval();
        x[i] = lo;
        const double fl = eval();
        x[i] = orig;
        g[i] = (fh - fl) / (hi - lo);
    }
    return g;
}

ConfidenceMap random_map(Rng& rng, int size) {
    ConfidenceMap m = ConfidenceMap::filled(size, size, 0.5);
    for (double& v : m.values) v = rng.uniform(0.1, 0.9);
    return m;
}

RasterGrid random_mask(Rng& rng, int size) {
    RasterGrid y = RasterGrid::zeros(size, size, 1);
    for (double& v : y.data) v = double(rng.uniform_index(2));
    return y;
}

struct Collector {
    std::map<std::string, double> worst;
    void note(const std::string& name, double rel) {
        auto [it, inserted] = worst.emplace(name, rel);
        if (!inserted) it->second = std::max(it->second, rel);
    }
};

} // namespace

GradCheckReport run_gradcheck(std::uint64_t seed, int rounds, int size, double step) {
    if (rounds < 1) throw ParamError("gradcheck needs at least one round");
    if (size < 4 || size % 2 != 0) throw ParamError("gradcheck map size must be even and >= 4");
    if (!(step > 0.0)) throw ParamError("finite-difference step must be > 0");

    Collector collect;
    static const double kExponents[4] = {2.0, 0.0, 1.0, 3.0};

    for (int round = 0; round < rounds; ++round) {
        Rng rng(mix_seed(seed, std::uint64_t(round)));
        LossParams params;
        params.r = kExponents[round % 4];

        // bce
        {
            ConfidenceMap p = random_map(rng, size);
            RasterGrid y = random_mask(rng, size);
            const std::vector<double> analytic = bce_loss(p, y).grads.at("p").values;
            const std::vector<double> fd =
                central_fd(p.values, step, [&] { return bce_loss(p, y).value; });
            collect.note("bce_p", rel_error(analytic, fd));
        }

        // pairwise and two-layer weighted consistency
        {
            ConfidenceMap p1 = random_map(rng, size);
            ConfidenceMap q2 = random_map(rng, size);
            ConfidenceMap q3 = random_map(rng, size);
            RasterGrid y = random_mask(rng, size);
            LossResult res = inter_loss(p1, q2, q3, y, params);
            auto value = [&] { return inter_loss(p1, q2, q3, y, params).value; };
            collect.note("inter_p1st",
                         rel_error(res.grads.at("p_1st").values, central_fd(p1.values, step, value)));
            collect.note("inter_p2", rel_error(res.grads.at("p2_aligned").values,
                                               central_fd(q2.values, step, value)));
            collect.note("inter_p3", rel_error(res.grads.at("p3_aligned").values,
                                               central_fd(q3.values, step, value)));
        }

        // four-tile overlap consistency
        {
            const int side = 2 * size;
            IntraLayerGroup group = intra_group_sample(side, size, 0, 0, size / 2);
            std::array<ConfidenceMap, 4> maps = {random_map(rng, size), random_map(rng, size),
                                                 random_map(rng, size), random_map(rng, size)};
            std::array<RasterGrid, 4> masks = {random_mask(rng, size), random_mask(rng, size),
                                               random_mask(rng, size), random_mask(rng, size)};
            LossResult res = intra_loss(maps, masks, group, params);
            auto value = [&] { return intra_loss(maps, masks, group, params).value; };
            for (int k = 0; k < 4; ++k) {
                const std::string key = "p" + std::to_string(k + 1);
                collect.note("intra_" + key,
                             rel_error(res.grads.at(key).values,
                                       central_fd(maps[std::size_t(k)].values, step, value)));
            }
        }

        // classifier parameters
        {
            RasterGrid tile = RasterGrid::zeros(size, size, 2);
            for (double& v : tile.data) v = rng.uniform(0.0, 1.0);
            FeatureGrid f = featurize(tile);
            ToyModel model = ToyModel::zeros(f.dim);
            for (double& w : model.weights) w = rng.uniform(-1.0, 1.0);
            model.bias = rng.uniform(-1.0, 1.0);
            GradGrid upstream = GradGrid::zeros(size, size);
            for (double& v : upstream.values) v = rng.uniform(-1.0, 1.0);

            auto value = [&] {
                const ConfidenceMap p = forward(model, f);
                double sum = 0.0;
                for (std::size_t i = 0; i < p.values.size(); ++i) {
                    sum += upstream.values[i] * p.values[i];
                }
                return sum;
            };
            ParamGrad analytic = backward(model, f, forward(model, f), upstream);
            std::vector<double> fd_w = central_fd(model.weights, step, value);
            collect.note("model_weights", rel_error(analytic.d_weights, fd_w));
            std::vector<double> bias_slot = {model.bias};
            std::vector<double> fd_b = central_fd(bias_slot, step, [&] {
                model.bias = bias_slot[0];
                const double v = value();
                return v;
            });
            model.bias = bias_slot[0];
            collect.note("model_bias", rel_error({analytic.d_bias}, fd_b));
        }

        // resampler adjoint, alone and chained into the pairwise loss
        {
            ConfidenceMap src = random_map(rng, size);
            const double span = rng.uniform(2.0, double(size) - 0.5);
            FracRect region{rng.uniform(0.0, double(size) - span),
                            rng.uniform(0.0, double(size) - span), span, span};
            GradGrid upstream = GradGrid::zeros(size, size);
            for (double& v : upstream.values) v = rng.uniform(-1.0, 1.0);

            auto value = [&] {
                const ConfidenceMap out = sample_bilinear(src, region, size);
                double sum = 0.0;
                for (std::size_t i = 0; i < out.values.size(); ++i) {
                    sum += upstream.values[i] * out.values[i];
                }
                return sum;
            };
            const std::vector<double> analytic =
                sample_bilinear_adjoint(upstream.values, size, size, size, region);
            collect.note("align_adjoint",
                         rel_error(analytic, central_fd(src.values, step, value)));

            ConfidenceMap p1 = random_map(rng, size);
            RasterGrid y = random_mask(rng, size);
            auto chained = [&] {
                const ConfidenceMap aligned = sample_bilinear(src, region, size);
                return inter_pair_loss(p1, aligned, y, params, "q").value;
            };
            const ConfidenceMap aligned = sample_bilinear(src, region, size);
            LossResult res = inter_pair_loss(p1, aligned, y, params, "q");
            const std::vector<double> chain_analytic =
                sample_bilinear_adjoint(res.grads.at("q").values, size, size, size, region);
            collect.note("inter_through_align",
                         rel_error(chain_analytic, central_fd(src.values, step, chained)));
        }
    }

    GradCheckReport report;
    for (const auto& [name, rel] : collect.worst) {
        report.checks.push_back(GradCheck{name, rel});
        report.max_rel = std::max(report.max_rel, rel);
    }
    return report;
}

} // namespace pclwater
