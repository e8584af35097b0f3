#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "talkdet/error.hpp"

namespace talkdet {

// Row-major 2-D array. (x, y) = (column, row), origin top-left.
template <typename T>
struct Image {
    int width = 0;
    int height = 0;
    std::vector<T> data;

    Image() = default;
    Image(int w, int h, T fill = T{}) : width(w), height(h), data(static_cast<size_t>(w) * h, fill) {}

    T& at(int x, int y) { return data[static_cast<size_t>(y) * width + x]; }
    const T& at(int x, int y) const { return data[static_cast<size_t>(y) * width + x]; }

    size_t size() const { return data.size(); }
    bool same_size(const Image& other) const { return width == other.width && height == other.height; }
};

struct Rgb {
    uint8_t r = 0, g = 0, b = 0;
    bool operator==(const Rgb&) const = default;
};

// Scalar intensity field, values in [0, 1].
using GrayFrame = Image<double>;
using RgbFrame = Image<Rgb>;

// One per-frame, per-person box. Coordinates are frame pixels, top-left anchored.
struct BoxAnnotation {
    int frame_index = 0;
    std::string person_id;
    int x = 0, y = 0;
    int w = 0, h = 0;
    std::string kind = "head"; // "face" or "head"
};

// Clamp a box to the frame, preserving as much area as possible.
inline BoxAnnotation clamp_box(const BoxAnnotation& box, int frame_w, int frame_h) {
    BoxAnnotation out = box;
    out.x = std::clamp(box.x, 0, frame_w);
    out.y = std::clamp(box.y, 0, frame_h);
    int x1 = std::clamp(box.x + box.w, 0, frame_w);
    int y1 = std::clamp(box.y + box.h, 0, frame_h);
    out.w = x1 - out.x;
    out.h = y1 - out.y;
    return out;
}

// Reflect an out-of-range index back into [0, n). Mirror without repeating
// the edge sample (…, 2, 1 | 0, 1, 2, …). Used by all separable correlations.
inline int reflect_index(int i, int n) {
    if (n == 1) return 0;
    while (i < 0 || i >= n) {
        if (i < 0) i = -i;
        if (i >= n) i = 2 * (n - 1) - i;
    }
    return i;
}

// Bilinear sample with edge clamping, pixel-center convention.
inline double sample_bilinear(const GrayFrame& img, double sx, double sy) {
    sx = std::clamp(sx, 0.0, static_cast<double>(img.width - 1));
    sy = std::clamp(sy, 0.0, static_cast<double>(img.height - 1));
    int x0 = static_cast<int>(std::floor(sx));
    int y0 = static_cast<int>(std::floor(sy));
    int x1 = std::min(x0 + 1, img.width - 1);
    int y1 = std::min(y0 + 1, img.height - 1);
    double fx = sx - x0;
    double fy = sy - y0;
    double top = img.at(x0, y0) * (1.0 - fx) + img.at(x1, y0) * fx;
    double bot = img.at(x0, y1) * (1.0 - fx) + img.at(x1, y1) * fx;
    return top * (1.0 - fy) + bot * fy;
}

// Resample a full frame to out_w x out_h (align-corners-false).
inline GrayFrame resize_bilinear(const GrayFrame& src, int out_w, int out_h) {
    if (out_w <= 0 || out_h <= 0) throw DimensionError("resize_bilinear: non-positive output size");
    GrayFrame out(out_w, out_h);
    const double sx_scale = static_cast<double>(src.width) / out_w;
    const double sy_scale = static_cast<double>(src.height) / out_h;
    for (int y = 0; y < out_h; ++y) {
        double sy = (y + 0.5) * sy_scale - 0.5;
        for (int x = 0; x < out_w; ++x) {
            double sx = (x + 0.5) * sx_scale - 0.5;
            out.at(x, y) = sample_bilinear(src, sx, sy);
        }
    }
    return out;
}

} // namespace talkdet
