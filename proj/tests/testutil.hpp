#pragma once

#include <cmath>
#include <random>
#include <vector>

#include "talkdet/image.hpp"

// Shared fixture generators for the test suites. Everything here is
// deliberately simple and independent of the library's own filtering code.

namespace testutil {

// Smooth periodic texture: seeded white noise blurred with a circular
// Gaussian, then min-max rescaled to [0, 1].
inline talkdet::GrayFrame periodic_texture(int w, int h, uint32_t seed, double sigma = 1.5) {
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    talkdet::GrayFrame noise(w, h);
    for (double& v : noise.data) v = uni(rng);

    int radius = static_cast<int>(std::ceil(3.0 * sigma));
    std::vector<double> g(2 * radius + 1);
    double sum = 0.0;
    for (int k = -radius; k <= radius; ++k) {
        g[k + radius] = std::exp(-0.5 * k * k / (sigma * sigma));
        sum += g[k + radius];
    }
    for (double& v : g) v /= sum;

    talkdet::GrayFrame tmp(w, h), out(w, h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            double acc = 0.0;
            for (int k = -radius; k <= radius; ++k) acc += g[k + radius] * noise.at(((x + k) % w + w) % w, y);
            tmp.at(x, y) = acc;
        }
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            double acc = 0.0;
            for (int k = -radius; k <= radius; ++k) acc += g[k + radius] * tmp.at(x, ((y + k) % h + h) % h);
            out.at(x, y) = acc;
        }
    double lo = out.data[0], hi = out.data[0];
    for (double v : out.data) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    for (double& v : out.data) v = (v - lo) / (hi - lo);
    return out;
}

// Integer circular shift: content moves by (sx, sy).
inline talkdet::GrayFrame shift_wrap(const talkdet::GrayFrame& src, int sx, int sy) {
    talkdet::GrayFrame out(src.width, src.height);
    for (int y = 0; y < src.height; ++y)
        for (int x = 0; x < src.width; ++x)
            out.at(x, y) = src.at(((x - sx) % src.width + src.width) % src.width,
                                  ((y - sy) % src.height + src.height) % src.height);
    return out;
}

// Rotate content by `deg` about the image center, bilinear, clamped edges.
inline talkdet::GrayFrame rotate_about_center(const talkdet::GrayFrame& src, double deg) {
    const double th = deg * 3.14159265358979323846 / 180.0;
    const double cx = (src.width - 1) / 2.0, cy = (src.height - 1) / 2.0;
    talkdet::GrayFrame out(src.width, src.height);
    for (int y = 0; y < src.height; ++y)
        for (int x = 0; x < src.width; ++x) {
            // backward map by the inverse rotation
            double rx = x - cx, ry = y - cy;
            double sx = cx + std::cos(th) * rx + std::sin(th) * ry;
            double sy = cy - std::sin(th) * rx + std::cos(th) * ry;
            out.at(x, y) = talkdet::sample_bilinear(src, sx, sy);
        }
    return out;
}

} // namespace testutil
