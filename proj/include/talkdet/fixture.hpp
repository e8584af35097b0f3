#pragma once

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "talkdet/image.hpp"
#include "talkdet/learn/dataset.hpp"
#include "talkdet/media.hpp"
#include "talkdet/netpbm.hpp"

// Synthetic clip generator: textured "faces" with an elliptical "mouth"
// patch whose content oscillates vertically while talking, plus a slight
// whole-head sway. Substitutes for real classroom footage in tests and in
// the bundled end-to-end fixtures.

namespace talkdet::fixture {

struct PersonSpec {
    std::string person_id;
    int box_x = 0, box_y = 0, box_size = 100;
    // per-window talking schedule; window w talks iff talking[w]
    std::vector<bool> talking;
    double mouth_amp = 2.0;     // peak content displacement, source px
    double mouth_freq = 4.0;    // Hz
    double texture_sigma = 3.0; // face texture smoothness; small = fine scale
    uint64_t texture_seed = 1;
};

struct SceneSpec {
    int frame_w = 240, frame_h = 140;
    int fps = 30;
    int frame_count = 180;
    double sway_amp = 0.25;
    std::vector<PersonSpec> persons;
};

// Smooth tileable texture from seeded noise (circular Gaussian blur).
inline GrayFrame smooth_texture(int w, int h, uint64_t seed, double sigma) {
    learn::SplitMix64 rng(seed);
    GrayFrame noise(w, h);
    for (double& v : noise.data) v = rng.uniform01();
    const int radius = static_cast<int>(std::ceil(3.0 * sigma));
    std::vector<double> g(2 * radius + 1);
    double sum = 0.0;
    for (int k = -radius; k <= radius; ++k) {
        g[k + radius] = std::exp(-0.5 * k * k / (sigma * sigma));
        sum += g[k + radius];
    }
    for (double& v : g) v /= sum;
    GrayFrame tmp(w, h), out(w, h);
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
    for (double& v : out.data) v = 0.08 + 0.84 * (v - lo) / (hi - lo);
    return out;
}

// Render frame `t` of the scene. Each person's box samples their own
// texture through the sway+mouth displacement field (backward warp).
inline GrayFrame render_frame(const SceneSpec& scene, const std::vector<GrayFrame>& textures,
                              const GrayFrame& background, int t) {
    GrayFrame frame = background;
    const int win = 3 * scene.fps;
    for (size_t p = 0; p < scene.persons.size(); ++p) {
        const PersonSpec& person = scene.persons[p];
        const int window = t / win;
        const bool talking = window < static_cast<int>(person.talking.size()) && person.talking[window];
        const double phase = 0.7 * static_cast<double>(p);
        const double time = static_cast<double>(t) / scene.fps;
        const double sway_x = scene.sway_amp * std::sin(2.0 * M_PI * 0.31 * time + phase);
        const double sway_y = scene.sway_amp * std::cos(2.0 * M_PI * 0.23 * time + phase);
        const double s = person.box_size;
        const double mouth_cx = 0.50 * s, mouth_cy = 0.68 * s;
        const double mouth_rx = 0.22 * s, mouth_ry = 0.13 * s;
        const double mouth_d = talking ? person.mouth_amp * std::sin(2.0 * M_PI * person.mouth_freq * time) : 0.0;
        const GrayFrame& tex = textures[p];
        for (int y = 0; y < person.box_size; ++y) {
            for (int x = 0; x < person.box_size; ++x) {
                double dx = sway_x, dy = sway_y;
                const double ex = (x - mouth_cx) / mouth_rx, ey = (y - mouth_cy) / mouth_ry;
                const double r2 = ex * ex + ey * ey;
                if (r2 < 1.0) {
                    const double falloff = (1.0 - r2) * (1.0 - r2);
                    dy += mouth_d * falloff;
                }
                frame.at(person.box_x + x, person.box_y + y) = sample_bilinear(tex, x - dx, y - dy);
            }
        }
    }
    return frame;
}

struct GeneratedFixture {
    std::string manifest_path;
    std::string annotations_path;
    std::string truth_path;
};

// Write the scene to disk: PGM frames + manifest + per-frame annotations +
// per-window truth labels.
inline GeneratedFixture write_scene(const SceneSpec& scene, const std::string& out_dir) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);
    std::vector<GrayFrame> textures;
    for (const PersonSpec& p : scene.persons)
        textures.push_back(smooth_texture(p.box_size, p.box_size, p.texture_seed, p.texture_sigma));
    GrayFrame background = smooth_texture(scene.frame_w, scene.frame_h, 977, 5.0);

    for (int t = 0; t < scene.frame_count; ++t) {
        GrayFrame frame = render_frame(scene, textures, background, t);
        char name[32];
        std::snprintf(name, sizeof(name), "frame_%06d.pgm", t);
        netpbm::write_pgm8(frame, (fs::path(out_dir) / name).string());
    }

    GeneratedFixture out;
    out.manifest_path = (fs::path(out_dir) / "manifest.json").string();
    {
        nlohmann::json j{{"root_path", "."},          {"width", scene.frame_w}, {"height", scene.frame_h},
                         {"frame_count", scene.frame_count}, {"fps", scene.fps},      {"color", "gray8"}};
        std::ofstream f(out.manifest_path);
        f << j.dump(2) << "\n";
    }
    out.annotations_path = (fs::path(out_dir) / "annotations.jsonl").string();
    {
        std::ofstream f(out.annotations_path);
        for (int t = 0; t < scene.frame_count; ++t)
            for (const PersonSpec& p : scene.persons) {
                BoxAnnotation a{t, p.person_id, p.box_x, p.box_y, p.box_size, p.box_size, "head"};
                f << media::annotation_to_json(a).dump() << "\n";
            }
    }
    out.truth_path = (fs::path(out_dir) / "truth.jsonl").string();
    {
        std::ofstream f(out.truth_path);
        const int win = 3 * scene.fps;
        for (const PersonSpec& p : scene.persons)
            for (size_t w = 0; w < p.talking.size(); ++w) {
                if (static_cast<int>((w + 1) * win) > scene.frame_count) break;
                nlohmann::json j{{"person_id", p.person_id},
                                 {"start_frame", static_cast<int>(w * win)},
                                 {"end_frame", static_cast<int>((w + 1) * win - 1)},
                                 {"label", p.talking[w] ? "talking" : "not_talking"}};
                f << j.dump() << "\n";
            }
    }
    return out;
}

// The bundled two-person detect fixture: person A talks in every window,
// person B never does. 6 seconds at 30 fps -> two windows each.
inline SceneSpec detect_scene(uint64_t seed) {
    SceneSpec scene;
    scene.frame_w = 240;
    scene.frame_h = 140;
    scene.fps = 30;
    scene.frame_count = 180;
    PersonSpec a;
    a.person_id = "personA";
    a.box_x = 10;
    a.box_y = 20;
    a.box_size = 100;
    a.talking = {true, true};
    a.mouth_amp = 2.0;
    a.mouth_freq = 4.0;
    a.texture_seed = seed * 2 + 1;
    PersonSpec b = a;
    b.person_id = "personB";
    b.box_x = 130;
    b.talking = {false, false};
    b.texture_seed = seed * 2 + 2;
    scene.persons = {a, b};
    return scene;
}

// Training scene: four persons on a grid, `clips` windows split between
// them, each window independently talking or not. 10 fps keeps the frame
// count manageable; boxes are 56 px so the pipeline's 100x100 resample is
// exercised too.
inline SceneSpec train_scene(int clips, uint64_t seed) {
    if (clips < 8) throw ValidationError("train fixture needs at least 8 clips");
    SceneSpec scene;
    scene.fps = 10;
    const int persons = 4;
    const int base = clips / persons, rem = clips % persons;
    scene.frame_count = (base + (rem > 0 ? 1 : 0)) * 3 * scene.fps;
    const int box = 56, margin = 12;
    scene.frame_w = margin + 2 * (box + margin);
    scene.frame_h = margin + 2 * (box + margin);
    learn::SplitMix64 rng(seed ^ 0x5eedf1c5u);
    for (int p = 0; p < persons; ++p) {
        PersonSpec ps;
        ps.person_id = "train" + std::to_string(p);
        ps.box_x = margin + (p % 2) * (box + margin);
        ps.box_y = margin + (p / 2) * (box + margin);
        ps.box_size = box;
        ps.texture_seed = seed * 131 + p;
        ps.mouth_amp = 1.0 + 0.8 * rng.uniform01();
        ps.mouth_freq = 1.0 + 1.5 * rng.uniform01();
        const int my_windows = base + (p < rem ? 1 : 0);
        for (int w = 0; w < my_windows; ++w) ps.talking.push_back(rng.next() % 2 == 0);
        scene.persons.push_back(std::move(ps));
    }
    return scene;
}

} // namespace talkdet::fixture
