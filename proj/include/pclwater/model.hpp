#pragma once

#include <string>
#include <vector>

#include "pclwater/loss.hpp"
#include "pclwater/raster.hpp"

namespace pclwater {

// Per-pixel feature vectors, row-major pixels with contiguous features.
struct FeatureGrid {
    int width = 0;
    int height = 0;
    int dim = 0;
    std::vector<double> values;

    const double* pixel(int r, int c) const {
        return values.data() + (std::size_t(r) * width + c) * dim;
    }
    std::size_t pixel_count() const { return std::size_t(width) * height; }
};

// Pixelwise logistic classifier. Feature count is fixed at construction.
struct ToyModel {
    std::vector<double> weights;
    double bias = 0.0;

    static ToyModel zeros(int feature_dim);
    int feature_dim() const { return int(weights.size()); }
};

// Gradient of a scalar loss with respect to the model parameters.
struct ParamGrad {
    std::vector<double> d_weights;
    double d_bias = 0.0;

    static ParamGrad zeros(int feature_dim);
    void add(const ParamGrad& other);
    void scale(double s);
};

// Features per channel: raw value, value minus tile mean, tile mean, tile
// standard deviation. The mean/std features depend on the whole tile, so the
// same ground pixel featurizes differently in different windows.
FeatureGrid featurize(const RasterGrid& tile);

int feature_dim_for_channels(int channels);

ConfidenceMap forward(const ToyModel& model, const FeatureGrid& features);

// Chain rule from dL/dp through the sigmoid into the parameters.
// p must be the map produced by forward() on the same features.
ParamGrad backward(const ToyModel& model, const FeatureGrid& features, const ConfidenceMap& p,
                   const GradGrid& dldp);

void save_checkpoint(const ToyModel& model, const std::string& path);
ToyModel load_checkpoint(const std::string& path);

} // namespace pclwater
