#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "talkdet/error.hpp"
#include "talkdet/image.hpp"
#include "talkdet/netpbm.hpp"

// Frame-sequence ingestion and basic image ops. Frames live on disk as
// binary PGM/PPM files named frame_%06d.pgm|.ppm under the manifest's
// root_path; one JSON manifest describes the sequence.

namespace talkdet::media {

enum class ColorMode { gray8, rgb24 };

struct FrameManifest {
    std::string root_path; // resolved to an absolute/cwd-relative directory
    int width = 0;
    int height = 0;
    int frame_count = 0;
    int fps = 0;
    ColorMode color = ColorMode::gray8;

    std::string frame_path(int index) const {
        char name[32];
        std::snprintf(name, sizeof(name), "frame_%06d", index);
        std::string ext = color == ColorMode::gray8 ? ".pgm" : ".ppm";
        return (std::filesystem::path(root_path) / (std::string(name) + ext)).string();
    }
};

// Rec.601 luma, output in [0, 1].
inline GrayFrame to_grayscale(const RgbFrame& frame) {
    GrayFrame out(frame.width, frame.height);
    for (size_t i = 0; i < frame.size(); ++i) {
        const Rgb& p = frame.data[i];
        out.data[i] = (0.299 * p.r + 0.587 * p.g + 0.114 * p.b) / 255.0;
    }
    return out;
}

inline FrameManifest load_frame_sequence(const std::string& manifest_path) {
    std::ifstream in(manifest_path);
    if (!in) throw IoError("cannot open manifest " + manifest_path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError("malformed JSON in manifest " + manifest_path + ": " + e.what());
    }
    FrameManifest m;
    try {
        m.root_path = j.at("root_path").get<std::string>();
        m.width = j.at("width").get<int>();
        m.height = j.at("height").get<int>();
        m.frame_count = j.at("frame_count").get<int>();
        m.fps = j.at("fps").get<int>();
        std::string color = j.at("color").get<std::string>();
        if (color == "gray8")
            m.color = ColorMode::gray8;
        else if (color == "rgb24")
            m.color = ColorMode::rgb24;
        else
            throw ValidationError("manifest " + manifest_path + ": unknown color mode '" + color + "'");
    } catch (const nlohmann::json::exception& e) {
        throw ParseError("manifest " + manifest_path + " missing or mistyped field: " + e.what());
    }
    if (m.width <= 0 || m.height <= 0) throw ValidationError("manifest " + manifest_path + ": non-positive frame size");
    if (m.frame_count < 1) throw ValidationError("manifest " + manifest_path + ": frame_count must be >= 1");
    if (m.fps <= 0) throw ValidationError("manifest " + manifest_path + ": fps must be > 0");
    // root_path is taken relative to the manifest's own directory.
    std::filesystem::path root(m.root_path);
    if (root.is_relative()) root = std::filesystem::path(manifest_path).parent_path() / root;
    m.root_path = root.string();
    return m;
}

// Read frame `index` as grayscale, verifying on-disk dimensions.
inline GrayFrame read_frame_gray(const FrameManifest& m, int index) {
    if (index < 0 || index >= m.frame_count)
        throw ValidationError("frame index " + std::to_string(index) + " out of range");
    std::string path = m.frame_path(index);
    GrayFrame g;
    if (m.color == ColorMode::gray8) {
        g = netpbm::read_pgm8(path);
    } else {
        g = to_grayscale(netpbm::read_ppm8(path));
    }
    if (g.width != m.width || g.height != m.height)
        throw ValidationError("size mismatch in " + path + ": got " + std::to_string(g.width) + "x" +
                              std::to_string(g.height) + ", manifest says " + std::to_string(m.width) + "x" +
                              std::to_string(m.height));
    return g;
}

inline RgbFrame read_frame_rgb(const FrameManifest& m, int index) {
    if (index < 0 || index >= m.frame_count)
        throw ValidationError("frame index " + std::to_string(index) + " out of range");
    std::string path = m.frame_path(index);
    RgbFrame f;
    if (m.color == ColorMode::rgb24) {
        f = netpbm::read_ppm8(path);
    } else {
        GrayFrame g = netpbm::read_pgm8(path);
        f = RgbFrame(g.width, g.height);
        for (size_t i = 0; i < g.size(); ++i) {
            uint8_t v = static_cast<uint8_t>(std::lround(std::clamp(g.data[i], 0.0, 1.0) * 255.0));
            f.data[i] = {v, v, v};
        }
    }
    if (f.width != m.width || f.height != m.height)
        throw ValidationError("size mismatch in " + path + ": got " + std::to_string(f.width) + "x" +
                              std::to_string(f.height) + ", manifest says " + std::to_string(m.width) + "x" +
                              std::to_string(m.height));
    return f;
}

// Eagerly check that every referenced frame exists and has the declared size.
inline void validate_all_frames(const FrameManifest& m) {
    for (int i = 0; i < m.frame_count; ++i) {
        std::string path = m.frame_path(i);
        netpbm::PnmInfo info;
        try {
            info = netpbm::peek_info(path);
        } catch (const IoError&) {
            throw IoError("missing frame file " + path + " (frame " + std::to_string(i) + ")");
        }
        if (info.width != m.width || info.height != m.height)
            throw ValidationError("size mismatch in frame " + std::to_string(i) + " (" + path + "): got " +
                                  std::to_string(info.width) + "x" + std::to_string(info.height) +
                                  ", manifest says " + std::to_string(m.width) + "x" + std::to_string(m.height));
        char want = m.color == ColorMode::gray8 ? '5' : '6';
        if (info.magic != want)
            throw ValidationError("color mode mismatch in frame " + std::to_string(i) + " (" + path + ")");
    }
}

// Crop `box` (clamped to the frame) and resample to out_w x out_h with
// bilinear interpolation, pixel-center convention, taps clamped to the box.
inline GrayFrame crop_resize(const GrayFrame& frame, const BoxAnnotation& box, int out_w, int out_h) {
    BoxAnnotation b = clamp_box(box, frame.width, frame.height);
    if (b.w <= 0 || b.h <= 0)
        throw ValidationError("crop_resize: box for '" + box.person_id + "' has zero area after clamping");
    if (out_w <= 0 || out_h <= 0) throw DimensionError("crop_resize: non-positive output size");
    GrayFrame out(out_w, out_h);
    const double sx_scale = static_cast<double>(b.w) / out_w;
    const double sy_scale = static_cast<double>(b.h) / out_h;
    const double x_lo = b.x, x_hi = b.x + b.w - 1.0;
    const double y_lo = b.y, y_hi = b.y + b.h - 1.0;
    for (int y = 0; y < out_h; ++y) {
        double sy = std::clamp(b.y + (y + 0.5) * sy_scale - 0.5, y_lo, y_hi);
        for (int x = 0; x < out_w; ++x) {
            double sx = std::clamp(b.x + (x + 0.5) * sx_scale - 0.5, x_lo, x_hi);
            out.at(x, y) = sample_bilinear(frame, sx, sy);
        }
    }
    return out;
}

// Per-clip verdict for overlay rendering.
struct Verdict {
    BoxAnnotation box;
    bool talking = false;
};

// Draw a 2-px border just inside each box; green for talking, red for
// not-talking. Later list entries win on shared pixels.
inline RgbFrame render_overlay(const RgbFrame& frame, const std::vector<Verdict>& verdicts) {
    RgbFrame out = frame;
    for (const Verdict& v : verdicts) {
        BoxAnnotation b = clamp_box(v.box, frame.width, frame.height);
        if (b.w <= 0 || b.h <= 0) continue;
        Rgb color = v.talking ? Rgb{0, 255, 0} : Rgb{255, 0, 0};
        for (int y = b.y; y < b.y + b.h; ++y) {
            for (int x = b.x; x < b.x + b.w; ++x) {
                bool border = (x - b.x < 2) || (b.x + b.w - 1 - x < 2) || (y - b.y < 2) || (b.y + b.h - 1 - y < 2);
                if (border) out.at(x, y) = color;
            }
        }
    }
    return out;
}

// --- annotation I/O (JSON-lines, one BoxAnnotation per line) ---

inline BoxAnnotation parse_annotation_line(const std::string& line, int line_no) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(line);
        BoxAnnotation a;
        a.frame_index = j.at("frame_index").get<int>();
        a.person_id = j.at("person_id").get<std::string>();
        a.x = j.at("x").get<int>();
        a.y = j.at("y").get<int>();
        a.w = j.at("w").get<int>();
        a.h = j.at("h").get<int>();
        a.kind = j.value("kind", "head");
        if (a.frame_index < 0) throw ValidationError("annotation line " + std::to_string(line_no) + ": negative frame_index");
        if (a.w <= 0 || a.h <= 0) throw ValidationError("annotation line " + std::to_string(line_no) + ": non-positive box size");
        return a;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError("malformed annotation at line " + std::to_string(line_no) + ": " + e.what());
    }
}

inline std::vector<BoxAnnotation> load_annotations(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open annotations " + path);
    std::vector<BoxAnnotation> out;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        // A leading meta record ({"meta": ...}) is tolerated and skipped.
        if (line.find("\"meta\"") != std::string::npos && line.find("person_id") == std::string::npos) continue;
        out.push_back(parse_annotation_line(line, line_no));
    }
    return out;
}

inline nlohmann::json annotation_to_json(const BoxAnnotation& a) {
    return nlohmann::json{{"frame_index", a.frame_index}, {"person_id", a.person_id}, {"x", a.x},
                          {"y", a.y},                     {"w", a.w},                 {"h", a.h},
                          {"kind", a.kind}};
}

} // namespace talkdet::media
