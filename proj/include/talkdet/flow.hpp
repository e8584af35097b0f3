#pragma once

#include <array>
#include <cmath>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "talkdet/error.hpp"
#include "talkdet/image.hpp"

// Dense optical flow via Farnebäck polynomial expansion: each frame is
// locally fitted with f(x) ~ x'Ax + b'x + c under a Gaussian-weighted
// window, and displacement follows from the coefficient differences,
// estimated coarse-to-fine over an image pyramid.

namespace talkdet::flow {

struct FlowParams {
    int pyramid_levels = 3;
    double pyramid_scale = 0.5;
    int window_size = 15;
    int iterations_per_level = 3;
    int poly_n = 5;
    double poly_sigma = 1.1;

    void validate() const {
        if (pyramid_levels < 1) throw ValidationError("FlowParams: pyramid_levels must be >= 1");
        if (!(pyramid_scale > 0.0 && pyramid_scale < 1.0)) throw ValidationError("FlowParams: pyramid_scale must be in (0,1)");
        if (window_size < 3 || window_size % 2 == 0) throw ValidationError("FlowParams: window_size must be odd and >= 3");
        if (iterations_per_level < 1) throw ValidationError("FlowParams: iterations_per_level must be >= 1");
        if (poly_n != 5 && poly_n != 7) throw ValidationError("FlowParams: poly_n must be 5 or 7");
        if (!(poly_sigma > 0.0)) throw ValidationError("FlowParams: poly_sigma must be > 0");
    }
};

struct FlowField {
    int width = 0;
    int height = 0;
    std::vector<double> u; // horizontal displacement, pixels/frame
    std::vector<double> v; // vertical displacement, pixels/frame

    FlowField() = default;
    FlowField(int w, int h) : width(w), height(h), u(static_cast<size_t>(w) * h, 0.0), v(static_cast<size_t>(w) * h, 0.0) {}
};

struct MagnitudeField {
    int width = 0;
    int height = 0;
    std::vector<double> mag;
};

// Per-pixel quadratic coefficients: f ~ a11 x^2 + 2 a12 xy + a22 y^2 + b1 x + b2 y + c
// with x to the right and y down, offsets relative to the pixel.
struct PolyExpansion {
    int width = 0;
    int height = 0;
    std::vector<double> a11, a12, a22, b1, b2, c;

    PolyExpansion() = default;
    PolyExpansion(int w, int h)
        : width(w), height(h), a11(static_cast<size_t>(w) * h), a12(a11), a22(a11), b1(a11), b2(a11), c(a11) {}
};

namespace detail {

// Correlate rows (horizontal=true) or columns with a centered kernel of
// radius n, reflecting indices at the borders.
inline void correlate_1d(const std::vector<double>& src, int w, int h, const std::vector<double>& kern, int radius,
                         bool horizontal, std::vector<double>& dst) {
    dst.resize(src.size());
    if (horizontal) {
        for (int y = 0; y < h; ++y) {
            const double* row = src.data() + static_cast<size_t>(y) * w;
            double* out = dst.data() + static_cast<size_t>(y) * w;
            for (int x = 0; x < w; ++x) {
                double acc = 0.0;
                for (int k = -radius; k <= radius; ++k) acc += kern[k + radius] * row[reflect_index(x + k, w)];
                out[x] = acc;
            }
        }
    } else {
        for (int y = 0; y < h; ++y) {
            double* out = dst.data() + static_cast<size_t>(y) * w;
            for (int x = 0; x < w; ++x) {
                double acc = 0.0;
                for (int k = -radius; k <= radius; ++k)
                    acc += kern[k + radius] * src[static_cast<size_t>(reflect_index(y + k, h)) * w + x];
                out[x] = acc;
            }
        }
    }
}

// Box average of width `win` along one axis (running sum, reflected borders).
inline void box_1d(const std::vector<double>& src, int w, int h, int win, bool horizontal, std::vector<double>& dst) {
    dst.resize(src.size());
    const int r = win / 2;
    const double inv = 1.0 / win;
    if (horizontal) {
        for (int y = 0; y < h; ++y) {
            const double* row = src.data() + static_cast<size_t>(y) * w;
            double* out = dst.data() + static_cast<size_t>(y) * w;
            double acc = 0.0;
            for (int k = -r; k <= r; ++k) acc += row[reflect_index(k, w)];
            out[0] = acc * inv;
            for (int x = 1; x < w; ++x) {
                acc += row[reflect_index(x + r, w)] - row[reflect_index(x - 1 - r, w)];
                out[x] = acc * inv;
            }
        }
    } else {
        std::vector<double> acc(static_cast<size_t>(w), 0.0);
        for (int k = -r; k <= r; ++k) {
            const double* row = src.data() + static_cast<size_t>(reflect_index(k, h)) * w;
            for (int x = 0; x < w; ++x) acc[x] += row[x];
        }
        for (int x = 0; x < w; ++x) dst[x] = acc[x] * inv;
        for (int y = 1; y < h; ++y) {
            const double* add = src.data() + static_cast<size_t>(reflect_index(y + r, h)) * w;
            const double* sub = src.data() + static_cast<size_t>(reflect_index(y - 1 - r, h)) * w;
            double* out = dst.data() + static_cast<size_t>(y) * w;
            for (int x = 0; x < w; ++x) {
                acc[x] += add[x] - sub[x];
                out[x] = acc[x] * inv;
            }
        }
    }
}

inline std::vector<double> gaussian_kernel(double sigma, int radius) {
    std::vector<double> g(2 * radius + 1);
    double sum = 0.0;
    for (int k = -radius; k <= radius; ++k) {
        g[k + radius] = std::exp(-0.5 * k * k / (sigma * sigma));
        sum += g[k + radius];
    }
    for (double& v : g) v /= sum;
    return g;
}

inline void gaussian_smooth(GrayFrame& img, double sigma) {
    if (sigma <= 0.0) return;
    int radius = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
    std::vector<double> g = gaussian_kernel(sigma, radius);
    std::vector<double> tmp;
    correlate_1d(img.data, img.width, img.height, g, radius, true, tmp);
    correlate_1d(tmp, img.width, img.height, g, radius, false, img.data);
}

// 3x3 symmetric-system inverse for the (1, x^2, y^2) coefficient block.
struct GramInverse {
    double inv_c[3][3];  // block {1, x2, y2}
    double inv_b;        // 1/sigma2 for x and y
    double inv_xy;       // 1/sigma2^2 for xy
};

inline GramInverse gram_inverse(const std::vector<double>& g, int radius) {
    double s2 = 0.0, s4 = 0.0;
    for (int k = -radius; k <= radius; ++k) {
        s2 += g[k + radius] * k * k;
        s4 += g[k + radius] * k * k * k * k;
    }
    // Gram matrix of (1, x^2, y^2) under the separable weight (sigma0 = 1).
    double m[3][3] = {{1.0, s2, s2}, {s2, s4, s2 * s2}, {s2, s2 * s2, s4}};
    // Direct 3x3 inverse via adjugate.
    double det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
                 m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
    GramInverse gi{};
    double adj[3][3] = {
        {m[1][1] * m[2][2] - m[1][2] * m[2][1], m[0][2] * m[2][1] - m[0][1] * m[2][2], m[0][1] * m[1][2] - m[0][2] * m[1][1]},
        {m[1][2] * m[2][0] - m[1][0] * m[2][2], m[0][0] * m[2][2] - m[0][2] * m[2][0], m[0][2] * m[1][0] - m[0][0] * m[1][2]},
        {m[1][0] * m[2][1] - m[1][1] * m[2][0], m[0][1] * m[2][0] - m[0][0] * m[2][1], m[0][0] * m[1][1] - m[0][1] * m[1][0]}};
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) gi.inv_c[i][j] = adj[i][j] / det;
    gi.inv_b = 1.0 / s2;
    gi.inv_xy = 1.0 / (s2 * s2);
    return gi;
}

} // namespace detail

// Weighted least-squares quadratic fit around every pixel, computed with
// separable correlations against {g, x g, x^2 g}.
inline PolyExpansion poly_expansion(const GrayFrame& frame, int poly_n, double poly_sigma) {
    if (poly_n != 5 && poly_n != 7) throw ValidationError("poly_expansion: poly_n must be 5 or 7");
    if (frame.width < poly_n || frame.height < poly_n)
        throw DimensionError("poly_expansion: frame smaller than the fit neighborhood");
    const int radius = poly_n / 2;
    std::vector<double> g0 = detail::gaussian_kernel(poly_sigma, radius);
    std::vector<double> g1(g0.size()), g2(g0.size());
    for (int k = -radius; k <= radius; ++k) {
        g1[k + radius] = g0[k + radius] * k;
        g2[k + radius] = g0[k + radius] * k * k;
    }
    const int w = frame.width, h = frame.height;
    // vertical pass: moments in y
    std::vector<double> t0, t1, t2;
    detail::correlate_1d(frame.data, w, h, g0, radius, false, t0);
    detail::correlate_1d(frame.data, w, h, g1, radius, false, t1);
    detail::correlate_1d(frame.data, w, h, g2, radius, false, t2);
    // horizontal pass: the six projections s_ab = sum w x^a y^b f
    std::vector<double> s00, s10, s20, s01, s11, s02;
    detail::correlate_1d(t0, w, h, g0, radius, true, s00);
    detail::correlate_1d(t0, w, h, g1, radius, true, s10);
    detail::correlate_1d(t0, w, h, g2, radius, true, s20);
    detail::correlate_1d(t1, w, h, g0, radius, true, s01);
    detail::correlate_1d(t1, w, h, g1, radius, true, s11);
    detail::correlate_1d(t2, w, h, g0, radius, true, s02);

    detail::GramInverse gi = detail::gram_inverse(g0, radius);
    PolyExpansion out(w, h);
    for (size_t i = 0; i < out.a11.size(); ++i) {
        // solve the coupled {c, x^2, y^2} block, then the diagonal terms
        double c0 = s00[i], cx = s20[i], cy = s02[i];
        out.c[i] = gi.inv_c[0][0] * c0 + gi.inv_c[0][1] * cx + gi.inv_c[0][2] * cy;
        out.a11[i] = gi.inv_c[1][0] * c0 + gi.inv_c[1][1] * cx + gi.inv_c[1][2] * cy;
        out.a22[i] = gi.inv_c[2][0] * c0 + gi.inv_c[2][1] * cx + gi.inv_c[2][2] * cy;
        out.b1[i] = s10[i] * gi.inv_b;
        out.b2[i] = s01[i] * gi.inv_b;
        out.a12[i] = 0.5 * s11[i] * gi.inv_xy; // xy coefficient split across the symmetric A
    }
    return out;
}

namespace detail {

// Fetch one coefficient plane of the warped expansion with bilinear
// interpolation, clamped to the image.
inline double fetch_warped(const std::vector<double>& plane, int w, int h, double sx, double sy) {
    sx = std::clamp(sx, 0.0, static_cast<double>(w - 1));
    sy = std::clamp(sy, 0.0, static_cast<double>(h - 1));
    const int x0 = static_cast<int>(sx), y0 = static_cast<int>(sy);
    const int x1 = std::min(x0 + 1, w - 1), y1 = std::min(y0 + 1, h - 1);
    const double fx = sx - x0, fy = sy - y0;
    const double top = plane[static_cast<size_t>(y0) * w + x0] * (1.0 - fx) + plane[static_cast<size_t>(y0) * w + x1] * fx;
    const double bot = plane[static_cast<size_t>(y1) * w + x0] * (1.0 - fx) + plane[static_cast<size_t>(y1) * w + x1] * fx;
    return top * (1.0 - fy) + bot * fy;
}

// One displacement refinement: build the per-pixel normal equations from the
// two expansions and the current estimate, box-average them, solve 2x2.
inline void update_flow(const PolyExpansion& e1, const PolyExpansion& e2, FlowField& flow, int window_size) {
    const int w = e1.width, h = e1.height;
    const size_t npix = static_cast<size_t>(w) * h;
    std::vector<double> m11(npix), m12(npix), m22(npix), h1(npix), h2(npix);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const size_t i = static_cast<size_t>(y) * w + x;
            const double dx = flow.u[i], dy = flow.v[i];
            const double sx = x + dx, sy = y + dy;
            const double a11 = 0.5 * (e1.a11[i] + fetch_warped(e2.a11, w, h, sx, sy));
            const double a12 = 0.5 * (e1.a12[i] + fetch_warped(e2.a12, w, h, sx, sy));
            const double a22 = 0.5 * (e1.a22[i] + fetch_warped(e2.a22, w, h, sx, sy));
            // db = -(b2 - b1)/2 + A d~, so the solved d is the total displacement
            const double db1 = -0.5 * (fetch_warped(e2.b1, w, h, sx, sy) - e1.b1[i]) + a11 * dx + a12 * dy;
            const double db2 = -0.5 * (fetch_warped(e2.b2, w, h, sx, sy) - e1.b2[i]) + a12 * dx + a22 * dy;
            // normal equations for min ||A d - db||^2
            m11[i] = a11 * a11 + a12 * a12;
            m12[i] = a12 * (a11 + a22);
            m22[i] = a12 * a12 + a22 * a22;
            h1[i] = a11 * db1 + a12 * db2;
            h2[i] = a12 * db1 + a22 * db2;
        }
    }
    std::vector<double> tmp;
    for (std::vector<double>* f : {&m11, &m12, &m22, &h1, &h2}) {
        box_1d(*f, w, h, window_size, true, tmp);
        box_1d(tmp, w, h, window_size, false, *f);
    }
    constexpr double kDiagReg = 1e-6;
    for (size_t i = 0; i < npix; ++i) {
        const double g11 = m11[i] + kDiagReg, g22 = m22[i] + kDiagReg, g12 = m12[i];
        const double det = g11 * g22 - g12 * g12;
        if (!(det > 1e-15)) {
            flow.u[i] = 0.0;
            flow.v[i] = 0.0;
            continue;
        }
        flow.u[i] = (g22 * h1[i] - g12 * h2[i]) / det;
        flow.v[i] = (g11 * h2[i] - g12 * h1[i]) / det;
    }
}

} // namespace detail

inline FlowField farneback_flow(const GrayFrame& prev, const GrayFrame& next, const FlowParams& params) {
    params.validate();
    if (!prev.same_size(next)) throw DimensionError("farneback_flow: frame dimensions differ");
    if (prev.width < params.poly_n || prev.height < params.poly_n)
        throw DimensionError("farneback_flow: frame smaller than poly_n");

    // Keep only pyramid levels whose coarsest side still fits the fit window.
    int levels = params.pyramid_levels;
    while (levels > 1) {
        double factor = std::pow(params.pyramid_scale, levels - 1);
        if (std::lround(std::min(prev.width, prev.height) * factor) >= params.poly_n) break;
        --levels;
    }

    FlowField flow;
    for (int level = levels - 1; level >= 0; --level) {
        const double factor = std::pow(params.pyramid_scale, level);
        const int lw = std::max(params.poly_n, static_cast<int>(std::lround(prev.width * factor)));
        const int lh = std::max(params.poly_n, static_cast<int>(std::lround(prev.height * factor)));

        GrayFrame p = prev, n = next;
        if (level > 0) {
            const double sigma = (1.0 / factor - 1.0) * 0.5;
            detail::gaussian_smooth(p, sigma);
            detail::gaussian_smooth(n, sigma);
            p = resize_bilinear(p, lw, lh);
            n = resize_bilinear(n, lw, lh);
        }

        if (flow.width == 0) {
            flow = FlowField(lw, lh);
        } else {
            // upsample the coarser estimate and rescale displacements
            FlowField up(lw, lh);
            GrayFrame uimg{flow.width, flow.height};
            uimg.data = flow.u;
            GrayFrame vimg{flow.width, flow.height};
            vimg.data = flow.v;
            GrayFrame ur = resize_bilinear(uimg, lw, lh);
            GrayFrame vr = resize_bilinear(vimg, lw, lh);
            const double su = static_cast<double>(lw) / flow.width;
            const double sv = static_cast<double>(lh) / flow.height;
            for (size_t i = 0; i < ur.data.size(); ++i) {
                up.u[i] = ur.data[i] * su;
                up.v[i] = vr.data[i] * sv;
            }
            flow = std::move(up);
        }

        PolyExpansion e1 = poly_expansion(p, params.poly_n, params.poly_sigma);
        PolyExpansion e2 = poly_expansion(n, params.poly_n, params.poly_sigma);
        for (int it = 0; it < params.iterations_per_level; ++it)
            detail::update_flow(e1, e2, flow, params.window_size);
    }
    return flow;
}

inline MagnitudeField flow_magnitude(const FlowField& field) {
    MagnitudeField out;
    out.width = field.width;
    out.height = field.height;
    out.mag.resize(field.u.size());
    for (size_t i = 0; i < field.u.size(); ++i) out.mag[i] = std::hypot(field.u[i], field.v[i]);
    return out;
}

// Debug dump: magic "FLO1", little-endian int32 width/height, then
// interleaved float32 (u, v) row-major.
inline void write_flo(const FlowField& field, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path);
    out.write("FLO1", 4);
    int32_t wh[2] = {field.width, field.height};
    out.write(reinterpret_cast<const char*>(wh), sizeof(wh));
    std::vector<float> buf(field.u.size() * 2);
    for (size_t i = 0; i < field.u.size(); ++i) {
        buf[2 * i] = static_cast<float>(field.u[i]);
        buf[2 * i + 1] = static_cast<float>(field.v[i]);
    }
    out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size() * sizeof(float)));
}

inline FlowField read_flo(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    char magic[4];
    in.read(magic, 4);
    if (in.gcount() != 4 || std::memcmp(magic, "FLO1", 4) != 0) throw CorruptError("bad FLO1 magic in " + path);
    int32_t wh[2];
    in.read(reinterpret_cast<char*>(wh), sizeof(wh));
    if (in.gcount() != sizeof(wh) || wh[0] <= 0 || wh[1] <= 0) throw CorruptError("bad FLO1 header in " + path);
    FlowField f(wh[0], wh[1]);
    std::vector<float> buf(f.u.size() * 2);
    in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size() * sizeof(float)));
    if (in.gcount() != static_cast<std::streamsize>(buf.size() * sizeof(float))) throw CorruptError("truncated FLO1 raster in " + path);
    for (size_t i = 0; i < f.u.size(); ++i) {
        f.u[i] = buf[2 * i];
        f.v[i] = buf[2 * i + 1];
    }
    return f;
}

} // namespace talkdet::flow
