#include "pclwater/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "pclwater/rng.hpp"

namespace pclwater {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Paints a filled disc; returns how many pixels flipped from land to water.
std::int64_t stamp_disc(ByteRaster& mask, double cx, double cy, double radius) {
    const int side = mask.width;
    const int r0 = std::max(0, int(std::floor(cy - radius)));
    const int r1 = std::min(side - 1, int(std::ceil(cy + radius)));
    const int c0 = std::max(0, int(std::floor(cx - radius)));
    const int c1 = std::min(side - 1, int(std::ceil(cx + radius)));
    const double rr = radius * radius;
    std::int64_t added = 0;
    for (int r = r0; r <= r1; ++r) {
        for (int c = c0; c <= c1; ++c) {
            const double dx = c - cx;
            const double dy = r - cy;
            if (dx * dx + dy * dy > rr) continue;
            std::uint8_t& px = mask.data[std::size_t(r) * side + c];
            added += px == 0;
            px = 1;
        }
    }
    return added;
}

std::int64_t draw_river(ByteRaster& mask, Rng& rng, int side) {
    const double s = side;
    const double radius = s * rng.uniform(0.006, 0.014);
    const double step = std::max(1.0, radius * 0.5);

    double x = 0.0, y = 0.0, heading = 0.0;
    switch (rng.uniform_index(4)) {
    case 0: // top edge, heading downward
        x = rng.uniform(0.0, s);
        y = 0.0;
        heading = rng.uniform(0.25 * kPi, 0.75 * kPi);
        break;
    case 1: // bottom edge
        x = rng.uniform(0.0, s);
        y = s - 1.0;
        heading = rng.uniform(-0.75 * kPi, -0.25 * kPi);
        break;
    case 2: // left edge
        x = 0.0;
        y = rng.uniform(0.0, s);
        heading = rng.uniform(-0.25 * kPi, 0.25 * kPi);
        break;
    default: // right edge
        x = s - 1.0;
        y = rng.uniform(0.0, s);
        heading = rng.uniform(0.75 * kPi, 1.25 * kPi);
        break;
    }

    const double width_phase = rng.uniform(0.0, 2.0 * kPi);
    const int max_steps = int(3.0 * s / step);
    std::int64_t added = 0;
    for (int i = 0; i < max_steps; ++i) {
        const double rt = radius * (1.0 + 0.25 * std::sin(0.02 * i + width_phase));
        added += stamp_disc(mask, x, y, rt);
        heading += rng.uniform(-0.2, 0.2);
        x += step * std::cos(heading);
        y += step * std::sin(heading);
        if (x < -2.0 * radius || x > s + 2.0 * radius || y < -2.0 * radius ||
            y > s + 2.0 * radius) {
            break;
        }
    }
    return added;
}

std::int64_t draw_lake(ByteRaster& mask, Rng& rng, int side) {
    const double s = side;
    const double cx = rng.uniform(0.1 * s, 0.9 * s);
    const double cy = rng.uniform(0.1 * s, 0.9 * s);
    const double a = s * rng.uniform(0.04, 0.13);
    const double b = s * rng.uniform(0.04, 0.13);
    const double theta = rng.uniform(0.0, kPi);
    const double w1 = rng.uniform(0.0, 0.15);
    const double w2 = rng.uniform(0.0, 0.15);
    const double ph1 = rng.uniform(0.0, 2.0 * kPi);
    const double ph2 = rng.uniform(0.0, 2.0 * kPi);

    const double reach = std::max(a, b) * 1.35;
    const int r0 = std::max(0, int(std::floor(cy - reach)));
    const int r1 = std::min(side - 1, int(std::ceil(cy + reach)));
    const int c0 = std::max(0, int(std::floor(cx - reach)));
    const int c1 = std::min(side - 1, int(std::ceil(cx + reach)));
    const double ct = std::cos(theta), st = std::sin(theta);
    std::int64_t added = 0;
    for (int r = r0; r <= r1; ++r) {
        for (int c = c0; c <= c1; ++c) {
            const double dx = c - cx;
            const double dy = r - cy;
            const double u = (ct * dx + st * dy) / a;
            const double v = (-st * dx + ct * dy) / b;
            const double rho = std::sqrt(u * u + v * v);
            if (rho > 1.3) continue;
            const double phi = std::atan2(v, u);
            const double edge = 1.0 + w1 * std::sin(3.0 * phi + ph1) + w2 * std::sin(5.0 * phi + ph2);
            if (rho > edge) continue;
            std::uint8_t& px = mask.data[std::size_t(r) * side + c];
            added += px == 0;
            px = 1;
        }
    }
    return added;
}

std::int64_t draw_pond_cluster(ByteRaster& mask, Rng& rng, int side) {
    const double s = side;
    const double cx = rng.uniform(0.08 * s, 0.92 * s);
    const double cy = rng.uniform(0.08 * s, 0.92 * s);
    const int ponds = rng.uniform_int(3, 10);
    std::int64_t added = 0;
    for (int k = 0; k < ponds; ++k) {
        const double px = cx + rng.uniform(-0.04 * s, 0.04 * s);
        const double py = cy + rng.uniform(-0.04 * s, 0.04 * s);
        const double radius = s * rng.uniform(0.003, 0.01);
        added += stamp_disc(mask, px, py, radius);
    }
    return added;
}

// Coarse random lattice, bilinearly interpolated per pixel.
struct LowFreqField {
    int nodes = 0;
    double cell = 0.0;
    std::vector<double> values;

    static LowFreqField make(Rng& rng, int side, int cells, double lo, double hi) {
        LowFreqField f;
        f.nodes = cells + 1;
        f.cell = double(side) / cells;
        f.values.resize(std::size_t(f.nodes) * f.nodes);
        for (double& v : f.values) v = rng.uniform(lo, hi);
        return f;
    }

    double at(int r, int c) const {
        const double y = r / cell;
        const double x = c / cell;
        const int iy = std::min(nodes - 2, int(y));
        const int ix = std::min(nodes - 2, int(x));
        const double fy = y - iy;
        const double fx = x - ix;
        const double* row0 = values.data() + std::size_t(iy) * nodes + ix;
        const double* row1 = row0 + nodes;
        return row0[0] * (1 - fy) * (1 - fx) + row0[1] * (1 - fy) * fx + row1[0] * fy * (1 - fx) +
               row1[1] * fy * fx;
    }
};

std::uint8_t to_byte(double v) {
    return std::uint8_t(std::lround(std::min(255.0, std::max(0.0, v))));
}

} // namespace

CorpusItem synth_image(std::uint64_t seed, int index, int side) {
    if (side < 64) throw ParamError("synthetic scenes need side >= 64");
    Rng rng(mix_seed(seed, std::uint64_t(index) + 1));

    CorpusItem item;
    char idbuf[16];
    std::snprintf(idbuf, sizeof idbuf, "img_%03d", index);
    item.id = idbuf;

    // water layout
    item.mask = ByteRaster::zeros(side, side, 1);
    std::int64_t water = 0;
    const int rivers = rng.uniform_int(1, 3);
    for (int k = 0; k < rivers; ++k) water += draw_river(item.mask, rng, side);
    const int lakes = rng.uniform_int(2, 6);
    for (int k = 0; k < lakes; ++k) water += draw_lake(item.mask, rng, side);
    const int clusters = rng.uniform_int(1, 3);
    for (int k = 0; k < clusters; ++k) water += draw_pond_cluster(item.mask, rng, side);
    const std::int64_t min_water = std::int64_t(0.08 * double(side) * side);
    while (water < min_water) water += draw_lake(item.mask, rng, side);

    // coloring
    const double bg_base[3] = {92.0, 106.0, 72.0};
    const double water_base[3] = {38.0, 64.0, 100.0};
    LowFreqField bg_field[3] = {LowFreqField::make(rng, side, 32, -18.0, 18.0),
                                LowFreqField::make(rng, side, 32, -18.0, 18.0),
                                LowFreqField::make(rng, side, 32, -18.0, 18.0)};
    LowFreqField depth_field = LowFreqField::make(rng, side, 32, -10.0, 10.0);

    item.image = ByteRaster::zeros(side, side, 3);
    std::size_t pos = 0;
    for (int r = 0; r < side; ++r) {
        for (int c = 0; c < side; ++c) {
            if (item.mask.data[std::size_t(r) * side + c]) {
                const double depth = depth_field.at(r, c);
                for (int ch = 0; ch < 3; ++ch) {
                    item.image.data[pos++] =
                        to_byte(water_base[ch] + depth + rng.uniform(-12.0, 12.0));
                }
            } else {
                for (int ch = 0; ch < 3; ++ch) {
                    item.image.data[pos++] =
                        to_byte(bg_base[ch] + bg_field[ch].at(r, c) + rng.uniform(-12.0, 12.0));
                }
            }
        }
    }
    return item;
}

std::vector<CorpusItem> synth_corpus(std::uint64_t seed, int count, int side,
                                     const PyramidSpec& spec) {
    if (count < 1) throw ParamError("corpus needs at least one image");
    spec.validate(side, side);
    std::vector<CorpusItem> items;
    items.reserve(std::size_t(count));
    for (int i = 0; i < count; ++i) items.push_back(synth_image(seed, i, side));
    return items;
}

double water_fraction(const ByteRaster& mask01) {
    if (mask01.channels != 1) throw ShapeError("water fraction needs a single-channel mask");
    std::int64_t n = 0;
    for (std::uint8_t v : mask01.data) n += v != 0;
    return double(n) / double(mask01.data.size());
}

} // namespace pclwater
