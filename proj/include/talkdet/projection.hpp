#pragma once

#include <cmath>
#include <string>
#include <vector>

#include <json.hpp>

#include "talkdet/error.hpp"
#include "talkdet/flow.hpp"
#include "talkdet/image.hpp"
#include "talkdet/netpbm.hpp"

// Collapse a clip's flow magnitudes into one motion-projection image:
// p(i,j) = sum over flow fields of ln(mag(i,j) + 0.01). Sustained motion
// shows up bright; static regions sit at F*ln(0.01).

namespace talkdet::projection {

struct ProjectionImage {
    int width = 0;
    int height = 0;
    int field_count = 0;           // F, number of accumulated flow fields
    std::vector<double> p;         // nats

    double floor_value() const { return field_count * std::log(0.01); }
};

struct FeatureVector {
    int grid_w = 0;
    int grid_h = 0;
    std::vector<double> values; // in [0, 1]
};

inline ProjectionImage project_log_magnitude(const std::vector<flow::MagnitudeField>& mags) {
    if (mags.empty()) throw ValidationError("project_log_magnitude: need at least one magnitude field");
    ProjectionImage out;
    out.width = mags.front().width;
    out.height = mags.front().height;
    out.field_count = static_cast<int>(mags.size());
    out.p.assign(static_cast<size_t>(out.width) * out.height, 0.0);
    for (const flow::MagnitudeField& m : mags) {
        if (m.width != out.width || m.height != out.height)
            throw DimensionError("project_log_magnitude: magnitude field dimensions differ");
        for (size_t i = 0; i < out.p.size(); ++i) out.p[i] += std::log(m.mag[i] + 0.01);
    }
    return out;
}

// Average-pool onto a grid_w x grid_h grid (ceiling-sized cells, clamped at
// the image edge), then min-max normalize to [0, 1]. A flat projection maps
// to all 0.5.
inline FeatureVector pool_features(const ProjectionImage& proj, int grid_w, int grid_h) {
    if (grid_w <= 0 || grid_h <= 0) throw ValidationError("pool_features: non-positive grid");
    if (grid_w > proj.width || grid_h > proj.height)
        throw ValidationError("pool_features: grid exceeds image size");
    const int cw = (proj.width + grid_w - 1) / grid_w;
    const int ch = (proj.height + grid_h - 1) / grid_h;
    FeatureVector out;
    out.grid_w = grid_w;
    out.grid_h = grid_h;
    out.values.resize(static_cast<size_t>(grid_w) * grid_h);
    for (int gy = 0; gy < grid_h; ++gy) {
        int y0 = std::min(gy * ch, proj.height - 1);
        int y1 = std::max(std::min((gy + 1) * ch, proj.height), y0 + 1);
        for (int gx = 0; gx < grid_w; ++gx) {
            int x0 = std::min(gx * cw, proj.width - 1);
            int x1 = std::max(std::min((gx + 1) * cw, proj.width), x0 + 1);
            double acc = 0.0;
            for (int y = y0; y < y1; ++y)
                for (int x = x0; x < x1; ++x) acc += proj.p[static_cast<size_t>(y) * proj.width + x];
            out.values[static_cast<size_t>(gy) * grid_w + gx] = acc / ((y1 - y0) * (x1 - x0));
        }
    }
    double lo = out.values[0], hi = out.values[0];
    for (double v : out.values) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    if (hi - lo <= 0.0) {
        for (double& v : out.values) v = 0.5;
    } else {
        for (double& v : out.values) v = (v - lo) / (hi - lo);
    }
    return out;
}

// Debug dump as 16-bit PGM plus a JSON sidecar holding the affine scale
// needed to recover the raw values.
inline void write_projection(const ProjectionImage& proj, const std::string& pgm_path, const std::string& json_path,
                             const nlohmann::json& extra_meta = {}) {
    double lo = proj.p[0], hi = proj.p[0];
    for (double v : proj.p) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    const double span = hi - lo > 0.0 ? hi - lo : 1.0;
    Image<uint16_t> img(proj.width, proj.height);
    for (size_t i = 0; i < proj.p.size(); ++i)
        img.data[i] = static_cast<uint16_t>(std::lround((proj.p[i] - lo) / span * 65535.0));
    netpbm::write_pgm16(img, pgm_path);
    nlohmann::json sidecar{{"min", lo}, {"max", hi}, {"field_count", proj.field_count},
                           {"encoding", "value = min + sample/65535 * (max - min)"}};
    if (!extra_meta.is_null() && !extra_meta.empty()) sidecar["meta"] = extra_meta;
    std::ofstream out(json_path);
    if (!out) throw IoError("cannot write " + json_path);
    out << sidecar.dump(2) << "\n";
}

} // namespace talkdet::projection
