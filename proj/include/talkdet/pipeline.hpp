#pragma once

#include <atomic>
#include <cstdio>
#include <fstream>
#include <map>
#include <mutex>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "talkdet/amfm.hpp"
#include "talkdet/ensemble.hpp"
#include "talkdet/fixture.hpp"
#include "talkdet/flow.hpp"
#include "talkdet/media.hpp"
#include "talkdet/projection.hpp"
#include "talkdet/proposals.hpp"

// Pipeline wiring: configuration, per-proposal feature extraction
// (crop -> flow -> projection -> pooled features), background rejection and
// the detect loop, parallel across proposals with deterministic output.

namespace talkdet::pipeline {

inline constexpr const char* kToolVersion = "talkdet 0.1.0";

struct PipelineConfig {
    flow::FlowParams flow_params;
    amfm::FilterbankConfig filterbank;
    double background_threshold = 0.9; // rad/px
    int pooling_w = 20;
    int pooling_h = 20;
    nlohmann::json classifier_hyper = nlohmann::json::object(); // per-kind records
    uint64_t seed = 1;

    nlohmann::json to_json() const {
        nlohmann::json fb{{"num_scales", filterbank.num_scales},
                          {"num_orientations", filterbank.num_orientations},
                          {"bandwidth_octaves", filterbank.bandwidth_octaves}};
        if (!filterbank.center_frequencies.empty()) fb["center_frequencies"] = filterbank.center_frequencies;
        return nlohmann::json{
            {"flow",
             {{"pyramid_levels", flow_params.pyramid_levels},
              {"pyramid_scale", flow_params.pyramid_scale},
              {"window_size", flow_params.window_size},
              {"iterations_per_level", flow_params.iterations_per_level},
              {"poly_n", flow_params.poly_n},
              {"poly_sigma", flow_params.poly_sigma}}},
            {"filterbank", fb},
            {"background_threshold", background_threshold},
            {"pooling_grid", {{"w", pooling_w}, {"h", pooling_h}}},
            {"classifier_hyper", classifier_hyper},
            {"seed", seed}};
    }

    static PipelineConfig from_json(const nlohmann::json& j) {
        PipelineConfig c;
        if (j.contains("flow")) {
            const nlohmann::json& f = j.at("flow");
            c.flow_params.pyramid_levels = f.value("pyramid_levels", c.flow_params.pyramid_levels);
            c.flow_params.pyramid_scale = f.value("pyramid_scale", c.flow_params.pyramid_scale);
            c.flow_params.window_size = f.value("window_size", c.flow_params.window_size);
            c.flow_params.iterations_per_level = f.value("iterations_per_level", c.flow_params.iterations_per_level);
            c.flow_params.poly_n = f.value("poly_n", c.flow_params.poly_n);
            c.flow_params.poly_sigma = f.value("poly_sigma", c.flow_params.poly_sigma);
        }
        if (j.contains("filterbank")) {
            const nlohmann::json& f = j.at("filterbank");
            c.filterbank.num_scales = f.value("num_scales", c.filterbank.num_scales);
            c.filterbank.num_orientations = f.value("num_orientations", c.filterbank.num_orientations);
            c.filterbank.bandwidth_octaves = f.value("bandwidth_octaves", c.filterbank.bandwidth_octaves);
            if (f.contains("center_frequencies"))
                c.filterbank.center_frequencies = f.at("center_frequencies").get<std::vector<double>>();
        }
        c.background_threshold = j.value("background_threshold", c.background_threshold);
        if (j.contains("pooling_grid")) {
            c.pooling_w = j.at("pooling_grid").value("w", c.pooling_w);
            c.pooling_h = j.at("pooling_grid").value("h", c.pooling_h);
        }
        if (j.contains("classifier_hyper")) c.classifier_hyper = j.at("classifier_hyper");
        c.seed = j.value("seed", c.seed);
        c.flow_params.validate();
        c.filterbank.validate();
        if (c.pooling_w <= 0 || c.pooling_h <= 0) throw ValidationError("config: pooling grid must be positive");
        if (!(c.background_threshold > 0.0)) throw ValidationError("config: background_threshold must be > 0");
        return c;
    }

    static PipelineConfig load(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw IoError("cannot open config " + path);
        nlohmann::json j;
        try {
            in >> j;
        } catch (const nlohmann::json::exception& e) {
            throw ParseError("malformed config " + path + ": " + e.what());
        }
        return from_json(j);
    }

    // FNV-1a over the canonical dump (nlohmann sorts object keys).
    std::string config_hash() const {
        const std::string dump = to_json().dump();
        uint64_t h = 1469598103934665603ull;
        for (unsigned char ch : dump) {
            h ^= ch;
            h *= 1099511628211ull;
        }
        char buf[17];
        std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
        return buf;
    }

    nlohmann::json output_meta() const {
        return nlohmann::json{{"tool_version", kToolVersion}, {"config_hash", config_hash()}, {"seed", seed}};
    }

    nlohmann::json hyper_for(learn::ModelKind kind) const {
        const std::string key = learn::to_string(kind);
        if (classifier_hyper.is_object() && classifier_hyper.contains(key)) return classifier_hyper.at(key);
        return nlohmann::json::object();
    }
};

// crop stack -> consecutive-pair flow -> log-magnitude projection
inline projection::ProjectionImage proposal_projection(const media::FrameManifest& manifest,
                                                       const proposals::ClipProposal& proposal,
                                                       const PipelineConfig& config) {
    proposals::ClipStack stack = proposals::extract_clip(manifest, proposal);
    std::vector<flow::MagnitudeField> mags;
    mags.reserve(stack.frames.size() - 1);
    for (size_t f = 0; f + 1 < stack.frames.size(); ++f)
        mags.push_back(flow::flow_magnitude(flow::farneback_flow(stack.frames[f], stack.frames[f + 1], config.flow_params)));
    return projection::project_log_magnitude(mags);
}

inline projection::FeatureVector proposal_features(const media::FrameManifest& manifest,
                                                   const proposals::ClipProposal& proposal,
                                                   const PipelineConfig& config) {
    return projection::pool_features(proposal_projection(manifest, proposal, config), config.pooling_w, config.pooling_h);
}

// AM-FM maps for the start frames of a proposal set, computed once per
// distinct frame index.
class BackgroundRejector {
public:
    BackgroundRejector(const media::FrameManifest& manifest, const PipelineConfig& config,
                       const std::vector<proposals::ClipProposal>& proposal_list)
        : manifest_(manifest), config_(config) {
        std::set<int> frames;
        for (const proposals::ClipProposal& p : proposal_list) frames.insert(p.start_frame);
        if (frames.empty()) return;
        filterbank_ = amfm::build_filterbank(config.filterbank, manifest.width, manifest.height);
        for (int f : frames) maps_.emplace(f, amfm::amfm_decompose(media::read_frame_gray(manifest, f), filterbank_));
    }

    bool rejects(const proposals::ClipProposal& p) const {
        const amfm::AmFmMap& map = maps_.at(p.start_frame);
        return amfm::reject_background(p.crop_box, map, config_.background_threshold) ==
               amfm::BackgroundDecision::reject;
    }

private:
    const media::FrameManifest& manifest_;
    const PipelineConfig& config_;
    amfm::Filterbank filterbank_;
    std::map<int, amfm::AmFmMap> maps_;
};

struct DetectionRecord {
    std::string person_id;
    int start_frame = 0;
    int end_frame = 0;
    BoxAnnotation crop_box;
    std::string label; // talking | not_talking | rejected_background
    std::array<std::string, 3> member_ids{};
    std::array<std::string, 3> member_votes{};
    std::array<double, 3> member_scores{};
};

inline std::vector<proposals::ClipProposal> proposals_from_annotations(const media::FrameManifest& manifest,
                                                                       const std::vector<BoxAnnotation>& annotations) {
    std::vector<proposals::ClipProposal> out;
    for (const proposals::PersonTrack& track : proposals::group_tracks(annotations))
        for (proposals::ClipProposal& p : proposals::window_clips(track, manifest.fps)) out.push_back(std::move(p));
    // already grouped by person and ordered by start; keep the contract explicit
    std::stable_sort(out.begin(), out.end(), [](const proposals::ClipProposal& a, const proposals::ClipProposal& b) {
        if (a.person_id != b.person_id) return a.person_id < b.person_id;
        return a.start_frame < b.start_frame;
    });
    return out;
}

// Run `fn(i)` over [0, n) on `workers` threads. Each index is independent;
// outputs land in pre-sized slots, so scheduling cannot affect results.
template <typename Fn>
inline void parallel_for(int n, int workers, Fn&& fn) {
    workers = std::max(1, workers);
    if (workers == 1 || n <= 1) {
        for (int i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    std::exception_ptr error;
    std::mutex error_mutex;
    for (int w = 0; w < std::min(workers, n); ++w)
        pool.emplace_back([&]() {
            for (;;) {
                const int i = next.fetch_add(1);
                if (i >= n) return;
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (!error) error = std::current_exception();
                    return;
                }
            }
        });
    for (std::thread& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

inline std::vector<DetectionRecord> detect(const media::FrameManifest& manifest,
                                           const std::vector<BoxAnnotation>& annotations,
                                           const ensemble::EnsembleModel& ens, const PipelineConfig& config,
                                           int workers) {
    std::vector<proposals::ClipProposal> props = proposals_from_annotations(manifest, annotations);
    std::vector<DetectionRecord> records(props.size());
    BackgroundRejector rejector(manifest, config, props);

    parallel_for(static_cast<int>(props.size()), workers, [&](int i) {
        const proposals::ClipProposal& p = props[i];
        DetectionRecord& rec = records[i];
        rec.person_id = p.person_id;
        rec.start_frame = p.start_frame;
        rec.end_frame = p.end_frame;
        rec.crop_box = p.crop_box;
        rec.member_ids = ens.member_ids;
        try {
            if (rejector.rejects(p)) {
                rec.label = "rejected_background";
                return;
            }
            projection::FeatureVector features = proposal_features(manifest, p, config);
            ensemble::EnsemblePrediction pred = ensemble::ensemble_predict(ens, features.values);
            rec.label = learn::to_string(pred.label);
            for (int m = 0; m < 3; ++m) {
                rec.member_votes[m] = learn::to_string(pred.member_votes[m]);
                rec.member_scores[m] = pred.member_scores[m];
            }
        } catch (const Error& e) {
            throw Error("proposal " + p.person_id + "@" + std::to_string(p.start_frame) + ": " + e.what());
        }
    });
    return records;
}

struct FeatureRecord {
    std::string person_id;
    int start_frame = 0;
    int end_frame = 0;
    projection::FeatureVector features;
};

inline std::vector<FeatureRecord> project_features(const media::FrameManifest& manifest,
                                                   const std::vector<BoxAnnotation>& annotations,
                                                   const PipelineConfig& config, int workers) {
    std::vector<proposals::ClipProposal> props = proposals_from_annotations(manifest, annotations);
    std::vector<FeatureRecord> records(props.size());
    parallel_for(static_cast<int>(props.size()), workers, [&](int i) {
        const proposals::ClipProposal& p = props[i];
        FeatureRecord& rec = records[i];
        rec.person_id = p.person_id;
        rec.start_frame = p.start_frame;
        rec.end_frame = p.end_frame;
        try {
            rec.features = proposal_features(manifest, p, config);
        } catch (const Error& e) {
            throw Error("proposal " + p.person_id + "@" + std::to_string(p.start_frame) + ": " + e.what());
        }
    });
    return records;
}

} // namespace talkdet::pipeline
