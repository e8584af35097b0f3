#pragma once

#include <cmath>
#include <complex>
#include <string>
#include <vector>

#include <json.hpp>

#include "talkdet/error.hpp"
#include "talkdet/fft.hpp"
#include "talkdet/image.hpp"
#include "talkdet/netpbm.hpp"

// Multichannel Gabor AM-FM decomposition with dominant component analysis.
// Channels are Gaussian in log-radial frequency and in orientation, kept
// single-sided so each response is an analytic (complex) signal; the
// per-pixel winner supplies instantaneous amplitude and frequency. Distant
// heads image at finer spatial scales, so a high dominant frequency inside
// a box marks a background person.

namespace talkdet::amfm {

inline constexpr double kPi = 3.14159265358979323846;

struct FilterbankConfig {
    int num_scales = 6;
    int num_orientations = 9;
    std::vector<double> center_frequencies; // rad/px, strictly increasing; default geometric
    double bandwidth_octaves = 1.0;

    std::vector<double> effective_centers() const {
        if (!center_frequencies.empty()) return center_frequencies;
        // geometric ladder, one octave apart, topping out at pi/2
        std::vector<double> c(num_scales);
        for (int k = 0; k < num_scales; ++k) c[num_scales - 1 - k] = kPi / 2.0 / std::pow(2.0, k);
        return c;
    }

    void validate() const {
        if (num_scales < 1 || num_orientations < 1) throw ValidationError("FilterbankConfig: need >= 1 scale and orientation");
        if (!(bandwidth_octaves > 0.0)) throw ValidationError("FilterbankConfig: bandwidth must be > 0");
        std::vector<double> c = effective_centers();
        if (static_cast<int>(c.size()) != num_scales)
            throw ValidationError("FilterbankConfig: center frequency count must equal num_scales");
        for (size_t i = 0; i < c.size(); ++i) {
            if (!(c[i] > 0.0 && c[i] < kPi)) throw ValidationError("FilterbankConfig: center frequencies must lie in (0, pi)");
            if (i > 0 && c[i] <= c[i - 1]) throw ValidationError("FilterbankConfig: center frequencies must increase");
        }
    }
};

struct GaborChannel {
    double center_freq = 0.0;  // rad/px
    double orientation = 0.0;  // radians, in [0, pi)
    double sigma_ln = 0.0;     // radial spread in log-frequency (nats)
    double sigma_theta = 0.0;  // angular spread (radians)

    // Transfer-function gain at an absolute frequency (wx, wy). Single-sided:
    // zero on the half-plane opposite the channel orientation, zero at DC;
    // unity by construction at (center_freq, orientation).
    double gain(double wx, double wy) const {
        const double w = std::hypot(wx, wy);
        if (w <= 0.0) return 0.0;
        double dtheta = std::atan2(wy, wx) - orientation;
        while (dtheta > kPi) dtheta -= 2.0 * kPi;
        while (dtheta < -kPi) dtheta += 2.0 * kPi;
        if (std::abs(dtheta) >= kPi / 2.0) return 0.0;
        const double lr = std::log(w / center_freq);
        return std::exp(-0.5 * lr * lr / (sigma_ln * sigma_ln)) * std::exp(-0.5 * dtheta * dtheta / (sigma_theta * sigma_theta));
    }
};

struct Filterbank {
    int width = 0;
    int height = 0;
    std::vector<GaborChannel> channels;
    std::vector<std::vector<double>> transfer; // per channel, sampled on the DFT grid

    int channel_count() const { return static_cast<int>(channels.size()); }
};

namespace detail {

inline double dft_frequency(int k, int n) {
    return 2.0 * kPi * (k <= n / 2 ? k : k - n) / n;
}

} // namespace detail

inline Filterbank build_filterbank(const FilterbankConfig& config, int width, int height) {
    config.validate();
    if (width <= 0 || height <= 0) throw DimensionError("build_filterbank: non-positive size");
    Filterbank fb;
    fb.width = width;
    fb.height = height;
    const std::vector<double> centers = config.effective_centers();
    // half-octave half-max points: sigma_ln = B * ln2 / (2 sqrt(2 ln 2))
    const double sigma_ln = config.bandwidth_octaves * std::log(2.0) / (2.0 * std::sqrt(2.0 * std::log(2.0)));
    const double sigma_theta = kPi / config.num_orientations;
    for (double w0 : centers) {
        for (int j = 0; j < config.num_orientations; ++j) {
            GaborChannel ch;
            ch.center_freq = w0;
            ch.orientation = j * kPi / config.num_orientations;
            ch.sigma_ln = sigma_ln;
            ch.sigma_theta = sigma_theta;
            fb.channels.push_back(ch);
        }
    }
    fb.transfer.resize(fb.channels.size());
    for (size_t c = 0; c < fb.channels.size(); ++c) {
        std::vector<double>& t = fb.transfer[c];
        t.resize(static_cast<size_t>(width) * height);
        for (int ky = 0; ky < height; ++ky) {
            const double wy = detail::dft_frequency(ky, height);
            for (int kx = 0; kx < width; ++kx) {
                const double wx = detail::dft_frequency(kx, width);
                t[static_cast<size_t>(ky) * width + kx] = fb.channels[c].gain(wx, wy);
            }
        }
    }
    return fb;
}

struct AmFmMap {
    int width = 0;
    int height = 0;
    std::vector<double> ia;      // instantaneous amplitude, >= 0
    std::vector<double> if_mag;  // |phase gradient| of the winning channel, rad/px
    std::vector<int> channel;    // winning channel index
};

namespace detail {

inline double wrap_phase(double d) {
    while (d > kPi) d -= 2.0 * kPi;
    while (d < -kPi) d += 2.0 * kPi;
    return d;
}

} // namespace detail

inline AmFmMap amfm_decompose(const GrayFrame& frame, const Filterbank& fb) {
    if (frame.width != fb.width || frame.height != fb.height)
        throw DimensionError("amfm_decompose: frame does not match filterbank dimensions");
    const int w = frame.width, h = frame.height;
    const size_t npix = static_cast<size_t>(w) * h;

    fft::Plan2d plan(w, h);
    const std::vector<fft::cd> spectrum = plan.forward_real(frame);

    // filter every channel, tracking the per-pixel winner by |response|
    AmFmMap map;
    map.width = w;
    map.height = h;
    map.ia.assign(npix, 0.0);
    map.if_mag.assign(npix, 0.0);
    map.channel.assign(npix, 0);
    std::vector<std::complex<double>> winner(npix, {0.0, 0.0});
    std::vector<fft::cd> buf(npix);
    std::vector<std::vector<std::complex<double>>> responses(fb.channels.size());
    for (size_t c = 0; c < fb.channels.size(); ++c) {
        const std::vector<double>& t = fb.transfer[c];
        for (size_t i = 0; i < npix; ++i) buf[i] = spectrum[i] * t[i];
        plan.inverse(buf);
        responses[c] = buf;
        for (size_t i = 0; i < npix; ++i) {
            const double mag = std::abs(buf[i]);
            if (mag > map.ia[i]) {
                map.ia[i] = mag;
                map.channel[i] = static_cast<int>(c);
            }
        }
    }
    for (size_t i = 0; i < npix; ++i) winner[i] = responses[map.channel[i]][i];

    // instantaneous frequency: centered differences of the winner's phase,
    // each one-pixel step unwrapped into (-pi, pi]
    constexpr double kAmplitudeFloor = 1e-6;
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const size_t i = static_cast<size_t>(y) * w + x;
            if (map.ia[i] < kAmplitudeFloor) {
                map.if_mag[i] = 0.0;
                continue;
            }
            const std::vector<std::complex<double>>& resp = responses[map.channel[i]];
            auto phase_at = [&](int px, int py) { return std::arg(resp[static_cast<size_t>(py) * w + px]); };
            const double ph = phase_at(x, y);
            double dx;
            if (x == 0)
                dx = detail::wrap_phase(phase_at(1, y) - ph);
            else if (x == w - 1)
                dx = detail::wrap_phase(ph - phase_at(w - 2, y));
            else
                dx = 0.5 * (detail::wrap_phase(phase_at(x + 1, y) - ph) + detail::wrap_phase(ph - phase_at(x - 1, y)));
            double dy;
            if (y == 0)
                dy = detail::wrap_phase(phase_at(x, 1) - ph);
            else if (y == h - 1)
                dy = detail::wrap_phase(ph - phase_at(x, h - 2));
            else
                dy = 0.5 * (detail::wrap_phase(phase_at(x, y + 1) - ph) + detail::wrap_phase(ph - phase_at(x, y - 1)));
            map.if_mag[i] = std::min(std::hypot(dx, dy), kPi * std::sqrt(2.0));
        }
    }
    return map;
}

enum class BackgroundDecision { keep, reject };

// Amplitude-weighted mean dominant frequency over the box; boxes dominated
// by fine scales (above `threshold` rad/px) are rejected as background.
// Zero total amplitude keeps the box: no evidence either way.
inline BackgroundDecision reject_background(const BoxAnnotation& box, const AmFmMap& map, double threshold) {
    BoxAnnotation b = clamp_box(box, map.width, map.height);
    if (b.w <= 0 || b.h <= 0) throw ValidationError("reject_background: box outside map bounds");
    double wsum = 0.0, acc = 0.0;
    for (int y = b.y; y < b.y + b.h; ++y)
        for (int x = b.x; x < b.x + b.w; ++x) {
            const size_t i = static_cast<size_t>(y) * map.width + x;
            wsum += map.ia[i];
            acc += map.ia[i] * map.if_mag[i];
        }
    if (wsum <= 0.0) return BackgroundDecision::keep;
    return acc / wsum > threshold ? BackgroundDecision::reject : BackgroundDecision::keep;
}

inline double box_mean_frequency(const BoxAnnotation& box, const AmFmMap& map) {
    BoxAnnotation b = clamp_box(box, map.width, map.height);
    if (b.w <= 0 || b.h <= 0) throw ValidationError("box_mean_frequency: box outside map bounds");
    double wsum = 0.0, acc = 0.0;
    for (int y = b.y; y < b.y + b.h; ++y)
        for (int x = b.x; x < b.x + b.w; ++x) {
            const size_t i = static_cast<size_t>(y) * map.width + x;
            wsum += map.ia[i];
            acc += map.ia[i] * map.if_mag[i];
        }
    return wsum > 0.0 ? acc / wsum : 0.0;
}

// Debug dump: IA and IF layers as 16-bit PGM with a JSON sidecar noting the
// affine scales.
inline void write_amfm_map(const AmFmMap& map, const std::string& prefix) {
    auto dump_layer = [&](const std::vector<double>& layer, const std::string& path, double& lo, double& hi) {
        lo = layer[0];
        hi = layer[0];
        for (double v : layer) {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        const double span = hi - lo > 0.0 ? hi - lo : 1.0;
        Image<uint16_t> img(map.width, map.height);
        for (size_t i = 0; i < layer.size(); ++i)
            img.data[i] = static_cast<uint16_t>(std::lround((layer[i] - lo) / span * 65535.0));
        netpbm::write_pgm16(img, path);
    };
    double ia_lo, ia_hi, if_lo, if_hi;
    dump_layer(map.ia, prefix + "_ia.pgm", ia_lo, ia_hi);
    dump_layer(map.if_mag, prefix + "_if.pgm", if_lo, if_hi);
    nlohmann::json sidecar{{"ia", {{"min", ia_lo}, {"max", ia_hi}}},
                           {"if_mag", {{"min", if_lo}, {"max", if_hi}}},
                           {"encoding", "value = min + sample/65535 * (max - min)"}};
    std::ofstream out(prefix + "_scale.json");
    if (!out) throw IoError("cannot write " + prefix + "_scale.json");
    out << sidecar.dump(2) << "\n";
}

} // namespace talkdet::amfm
