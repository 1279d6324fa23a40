#include "pclwater/model.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace pclwater {

ToyModel ToyModel::zeros(int feature_dim) {
    if (feature_dim < 1) throw ParamError("model needs at least one feature");
    ToyModel m;
    m.weights.assign(std::size_t(feature_dim), 0.0);
    return m;
}

ParamGrad ParamGrad::zeros(int feature_dim) {
    ParamGrad g;
    g.d_weights.assign(std::size_t(feature_dim), 0.0);
    return g;
}

void ParamGrad::add(const ParamGrad& other) {
    if (other.d_weights.size() != d_weights.size()) throw ShapeError("parameter grad size mismatch");
    for (std::size_t i = 0; i < d_weights.size(); ++i) d_weights[i] += other.d_weights[i];
    d_bias += other.d_bias;
}

void ParamGrad::scale(double s) {
    for (double& v : d_weights) v *= s;
    d_bias *= s;
}

int feature_dim_for_channels(int channels) { return 4 * channels; }

FeatureGrid featurize(const RasterGrid& tile) {
    if (tile.width < 1 || tile.height < 1 || tile.channels < 1) {
        throw ShapeError("cannot featurize an empty tile");
    }
    const int ch = tile.channels;
    const std::size_t n = tile.pixel_count();
    const double inv_n = 1.0 / double(n);

    std::vector<double> mean(ch, 0.0), stdev(ch, 0.0);
    for (int k = 0; k < ch; ++k) {
        double sum = 0.0, sum2 = 0.0;
        for (int r = 0; r < tile.height; ++r) {
            for (int c = 0; c < tile.width; ++c) {
                const double v = tile.at(r, c, k);
                sum += v;
                sum2 += v * v;
            }
        }
        mean[k] = sum * inv_n;
        const double var = sum2 * inv_n - mean[k] * mean[k];
        stdev[k] = var > 0.0 ? std::sqrt(var) : 0.0;
    }

    FeatureGrid f;
    f.width = tile.width;
    f.height = tile.height;
    f.dim = feature_dim_for_channels(ch);
    f.values.resize(n * std::size_t(f.dim));
    std::size_t pos = 0;
    for (int r = 0; r < tile.height; ++r) {
        for (int c = 0; c < tile.width; ++c) {
            for (int k = 0; k < ch; ++k) f.values[pos++] = tile.at(r, c, k);
            for (int k = 0; k < ch; ++k) f.values[pos++] = tile.at(r, c, k) - mean[k];
            for (int k = 0; k < ch; ++k) f.values[pos++] = mean[k];
            for (int k = 0; k < ch; ++k) f.values[pos++] = stdev[k];
        }
    }
    return f;
}

ConfidenceMap forward(const ToyModel& model, const FeatureGrid& features) {
    if (model.feature_dim() != features.dim) {
        throw ShapeError("model expects " + std::to_string(model.feature_dim()) +
                         " features, grid has " + std::to_string(features.dim));
    }
    ConfidenceMap out = ConfidenceMap::filled(features.width, features.height, 0.5);
    const int dim = features.dim;
    for (std::size_t i = 0; i < out.values.size(); ++i) {
        const double* f = features.values.data() + i * std::size_t(dim);
        double z = model.bias;
        for (int k = 0; k < dim; ++k) z += model.weights[std::size_t(k)] * f[k];
        out.values[i] = clamp_confidence(1.0 / (1.0 + std::exp(-z)));
    }
    return out;
}

ParamGrad backward(const ToyModel& model, const FeatureGrid& features, const ConfidenceMap& p,
                   const GradGrid& dldp) {
    if (model.feature_dim() != features.dim) throw ShapeError("model vs feature dim mismatch");
    if (p.width != features.width || p.height != features.height || dldp.width != p.width ||
        dldp.height != p.height) {
        throw ShapeError("backward shapes mismatch");
    }
    ParamGrad g = ParamGrad::zeros(features.dim);
    const int dim = features.dim;
    for (std::size_t i = 0; i < p.values.size(); ++i) {
        const double pv = p.values[i];
        const double dz = dldp.values[i] * pv * (1.0 - pv);
        if (dz == 0.0) continue;
        const double* f = features.values.data() + i * std::size_t(dim);
        for (int k = 0; k < dim; ++k) g.d_weights[std::size_t(k)] += dz * f[k];
        g.d_bias += dz;
    }
    return g;
}

void save_checkpoint(const ToyModel& model, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw FormatError("cannot open checkpoint for writing: " + path);
    out << "PCLTOY v1\n" << model.feature_dim() << "\n";
    char buf[64];
    for (double w : model.weights) {
        std::snprintf(buf, sizeof buf, "%.17g", w);
        out << buf << "\n";
    }
    std::snprintf(buf, sizeof buf, "%.17g", model.bias);
    out << buf << "\n";
    if (!out) throw FormatError("failed writing checkpoint: " + path);
}

ToyModel load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open checkpoint: " + path);
    std::string line;
    if (!std::getline(in, line) || line != "PCLTOY v1") {
        throw FormatError("checkpoint missing 'PCLTOY v1' header: " + path);
    }
    if (!std::getline(in, line)) throw FormatError("checkpoint missing feature count: " + path);
    int dim = 0;
    try {
        dim = std::stoi(line);
    } catch (const std::exception&) {
        throw FormatError("bad feature count '" + line + "' in " + path);
    }
    if (dim < 1) throw FormatError("bad feature count in " + path);

    ToyModel m = ToyModel::zeros(dim);
    auto read_param = [&](const char* what) {
        if (!std::getline(in, line)) {
            throw FormatError("checkpoint truncated at " + std::string(what) + ": " + path);
        }
        char* end = nullptr;
        const double v = std::strtod(line.c_str(), &end);
        if (end == line.c_str()) throw FormatError("bad numeric line '" + line + "' in " + path);
        return v;
    };
    for (int k = 0; k < dim; ++k) m.weights[std::size_t(k)] = read_param("weight");
    m.bias = read_param("bias");
    return m;
}

} // namespace pclwater
