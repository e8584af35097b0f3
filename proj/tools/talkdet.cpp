// talkdet: detect talking activity in frame sequences by classifying
// log-magnitude optical-flow projections over annotated head regions.
//
// Subcommands: ingest | project | train | select | detect | eval | overlay | fixture

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "talkdet/ensemble.hpp"
#include "talkdet/eval.hpp"
#include "talkdet/fixture.hpp"
#include "talkdet/learn/model_io.hpp"
#include "talkdet/pipeline.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace talkdet;

namespace {

pipeline::PipelineConfig load_config(const std::string& config_path, uint64_t seed_flag, bool seed_set) {
    pipeline::PipelineConfig config;
    if (!config_path.empty()) config = pipeline::PipelineConfig::load(config_path);
    if (seed_set) config.seed = seed_flag;
    return config;
}

void write_meta_line(std::ostream& out, const pipeline::PipelineConfig& config) {
    out << json{{"meta", config.output_meta()}}.dump() << "\n";
}

struct TruthKey {
    std::string person_id;
    int start_frame;
    bool operator<(const TruthKey& o) const {
        if (person_id != o.person_id) return person_id < o.person_id;
        return start_frame < o.start_frame;
    }
};

std::map<TruthKey, std::string> load_truth(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    std::map<TruthKey, std::string> out;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::exception& e) {
            throw ParseError(path + " line " + std::to_string(line_no) + ": " + e.what());
        }
        if (j.contains("meta")) continue;
        TruthKey key{j.at("person_id").get<std::string>(), j.at("start_frame").get<int>()};
        if (!out.emplace(key, j.at("label").get<std::string>()).second)
            throw ValidationError(path + ": duplicate entry for " + key.person_id + "@" +
                                  std::to_string(key.start_frame));
    }
    return out;
}

json detection_record_json(const pipeline::DetectionRecord& r) {
    json j{{"person_id", r.person_id},
           {"start_frame", r.start_frame},
           {"end_frame", r.end_frame},
           {"box", {{"x", r.crop_box.x}, {"y", r.crop_box.y}, {"w", r.crop_box.w}, {"h", r.crop_box.h}}},
           {"label", r.label}};
    if (r.label == "talking" || r.label == "not_talking") {
        j["member_ids"] = r.member_ids;
        j["member_votes"] = r.member_votes;
        j["member_scores"] = r.member_scores;
    }
    return j;
}

// --- subcommand bodies ---

int cmd_ingest(const std::string& manifest_path, const std::string& annotations_path, const std::string& out_path,
               const std::string& proposals_out, const pipeline::PipelineConfig& config) {
    media::FrameManifest manifest = media::load_frame_sequence(manifest_path);
    media::validate_all_frames(manifest);
    json summary{{"manifest", manifest_path},
                 {"width", manifest.width},
                 {"height", manifest.height},
                 {"frame_count", manifest.frame_count},
                 {"fps", manifest.fps},
                 {"window_frames", 3 * manifest.fps}};
    if (!annotations_path.empty()) {
        std::vector<BoxAnnotation> annotations = media::load_annotations(annotations_path);
        std::vector<proposals::ClipProposal> props = pipeline::proposals_from_annotations(manifest, annotations);
        std::set<std::string> persons;
        for (const BoxAnnotation& a : annotations) persons.insert(a.person_id);
        summary["annotations"] = annotations_path;
        summary["annotation_count"] = annotations.size();
        summary["person_count"] = persons.size();
        summary["proposal_count"] = props.size();
        if (!proposals_out.empty()) {
            std::ofstream out(proposals_out);
            if (!out) throw IoError("cannot write " + proposals_out);
            write_meta_line(out, config);
            for (const proposals::ClipProposal& p : props)
                out << json{{"person_id", p.person_id},
                            {"start_frame", p.start_frame},
                            {"end_frame", p.end_frame},
                            {"fps", p.fps},
                            {"crop_box",
                             {{"x", p.crop_box.x}, {"y", p.crop_box.y}, {"w", p.crop_box.w}, {"h", p.crop_box.h}}}}
                           .dump()
                    << "\n";
        }
    } else if (!proposals_out.empty()) {
        throw ValidationError("ingest: --proposals-out requires --annotations");
    }
    summary["valid"] = true;
    const std::string text = summary.dump(2) + "\n";
    if (out_path.empty()) {
        std::cout << text;
    } else {
        std::ofstream out(out_path);
        if (!out) throw IoError("cannot write " + out_path);
        out << text;
    }
    return 0;
}

int cmd_fixture(const std::string& out_dir, const std::string& mode, int clips, uint64_t seed) {
    fixture::SceneSpec scene = mode == "train" ? fixture::train_scene(clips, seed) : fixture::detect_scene(seed);
    fixture::GeneratedFixture out = fixture::write_scene(scene, out_dir);
    {
        std::ofstream meta((fs::path(out_dir) / "fixture_meta.json").string());
        if (meta)
            meta << json{{"tool_version", pipeline::kToolVersion}, {"seed", seed}, {"mode", mode}, {"clips", clips}}.dump(2)
                 << "\n";
    }
    json j{{"manifest", out.manifest_path},
           {"annotations", out.annotations_path},
           {"truth", out.truth_path},
           {"mode", mode},
           {"fps", scene.fps},
           {"frame_count", scene.frame_count},
           {"persons", scene.persons.size()}};
    std::cout << j.dump(2) << "\n";
    return 0;
}

int cmd_project(const std::string& manifest_path, const std::string& annotations_path, const std::string& config_path,
                uint64_t seed_flag, bool seed_set, const std::string& truth_path, const std::string& dataset_out,
                const std::string& features_out, const std::string& dump_dir, int workers) {
    if (dataset_out.empty() && features_out.empty() && dump_dir.empty())
        throw ValidationError("project: pass at least one of --dataset-out, --features-out, --dump-dir");
    if (!dataset_out.empty() && truth_path.empty())
        throw ValidationError("project: --dataset-out requires --truth");
    pipeline::PipelineConfig config = load_config(config_path, seed_flag, seed_set);
    media::FrameManifest manifest = media::load_frame_sequence(manifest_path);
    std::vector<BoxAnnotation> annotations = media::load_annotations(annotations_path);

    std::vector<pipeline::FeatureRecord> records;
    if (!dump_dir.empty()) {
        // keep the projections around for dumping
        fs::create_directories(dump_dir);
        std::vector<proposals::ClipProposal> props = pipeline::proposals_from_annotations(manifest, annotations);
        records.resize(props.size());
        std::vector<projection::ProjectionImage> projections(props.size());
        pipeline::parallel_for(static_cast<int>(props.size()), workers, [&](int i) {
            projections[i] = pipeline::proposal_projection(manifest, props[i], config);
            records[i] = {props[i].person_id, props[i].start_frame, props[i].end_frame,
                          projection::pool_features(projections[i], config.pooling_w, config.pooling_h)};
        });
        for (size_t i = 0; i < props.size(); ++i) {
            const std::string stem = props[i].person_id + "_" + std::to_string(props[i].start_frame);
            projection::write_projection(projections[i], (fs::path(dump_dir) / (stem + ".pgm")).string(),
                                         (fs::path(dump_dir) / (stem + ".json")).string(), config.output_meta());
        }
    } else {
        records = pipeline::project_features(manifest, annotations, config, workers);
    }

    if (!features_out.empty()) {
        std::ofstream out(features_out);
        if (!out) throw IoError("cannot write " + features_out);
        write_meta_line(out, config);
        for (const pipeline::FeatureRecord& r : records)
            out << json{{"person_id", r.person_id},
                        {"start_frame", r.start_frame},
                        {"end_frame", r.end_frame},
                        {"features", r.features.values}}
                       .dump()
                << "\n";
    }
    if (!dataset_out.empty()) {
        std::map<TruthKey, std::string> truth = load_truth(truth_path);
        learn::Dataset dataset;
        int skipped = 0;
        for (const pipeline::FeatureRecord& r : records) {
            auto it = truth.find(TruthKey{r.person_id, r.start_frame});
            if (it == truth.end()) {
                ++skipped;
                continue;
            }
            learn::LabeledExample ex;
            ex.features = r.features.values;
            ex.label = learn::label_from_string(it->second);
            ex.clip_ref = r.person_id + "@" + std::to_string(r.start_frame);
            dataset.push_back(std::move(ex));
        }
        learn::save_dataset(dataset, dataset_out, config.output_meta());
        std::cerr << "project: wrote " << dataset.size() << " labeled clips";
        if (skipped > 0) std::cerr << " (" << skipped << " proposals without truth skipped)";
        std::cerr << "\n";
    }
    std::cerr << "project: " << records.size() << " proposals\n";
    return 0;
}

int cmd_train(const std::string& dataset_path, const std::string& out_dir, const std::string& config_path,
              uint64_t seed_flag, bool seed_set, const std::string& kinds_csv) {
    pipeline::PipelineConfig config = load_config(config_path, seed_flag, seed_set);
    learn::Dataset dataset = learn::load_dataset(dataset_path);
    fs::create_directories(out_dir);

    std::vector<learn::ModelKind> kinds;
    if (kinds_csv.empty() || kinds_csv == "all") {
        kinds = learn::all_model_kinds();
    } else {
        std::stringstream ss(kinds_csv);
        std::string item;
        while (std::getline(ss, item, ',')) kinds.push_back(learn::model_kind_from_string(item));
    }
    json run{{"meta", config.output_meta()}, {"dataset", dataset_path}, {"models", json::object()}};
    for (learn::ModelKind kind : kinds) {
        learn::TrainedModel model = learn::train(kind, dataset, config.hyper_for(kind), config.seed);
        int hit = 0;
        for (const learn::LabeledExample& e : dataset) hit += learn::predict(model, e.features) == e.label ? 1 : 0;
        const std::string path = (fs::path(out_dir) / (learn::to_string(kind) + ".json")).string();
        learn::save_model(model, path);
        const double acc = static_cast<double>(hit) / dataset.size();
        run["models"][learn::to_string(kind)] = {{"path", path}, {"train_accuracy", acc}};
        std::cout << learn::to_string(kind) << ": train_accuracy=" << acc << " -> " << path << "\n";
    }
    {
        std::ofstream out((fs::path(out_dir) / "train_run.json").string());
        if (!out) throw IoError("cannot write train_run.json");
        out << run.dump(2) << "\n";
    }
    return 0;
}

std::vector<ensemble::MetricRow> rows_from_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    std::string line;
    if (!std::getline(in, line)) throw ParseError(path + ": empty CSV");
    auto split = [](const std::string& s) {
        std::vector<std::string> out;
        std::stringstream ss(s);
        std::string item;
        while (std::getline(ss, item, ',')) {
            while (!item.empty() && std::isspace(item.front())) item.erase(item.begin());
            while (!item.empty() && std::isspace(item.back())) item.pop_back();
            out.push_back(item);
        }
        return out;
    };
    std::vector<std::string> header = split(line);
    int col_id = -1, col_acc = -1, col_auc = -1, col_f1 = -1;
    for (size_t i = 0; i < header.size(); ++i) {
        if (header[i] == "model_id") col_id = static_cast<int>(i);
        if (header[i] == "accuracy") col_acc = static_cast<int>(i);
        if (header[i] == "auc") col_auc = static_cast<int>(i);
        if (header[i] == "f1") col_f1 = static_cast<int>(i);
    }
    if (col_id < 0 || col_acc < 0 || col_auc < 0 || col_f1 < 0)
        throw ParseError(path + ": header must name model_id, accuracy, auc, f1");
    std::vector<ensemble::MetricRow> rows;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::vector<std::string> cells = split(line);
        if (static_cast<int>(cells.size()) <= std::max({col_id, col_acc, col_auc, col_f1}))
            throw ParseError(path + " line " + std::to_string(line_no) + ": too few columns");
        try {
            rows.push_back({cells[col_id], std::stod(cells[col_acc]), std::stod(cells[col_auc]),
                            std::stod(cells[col_f1])});
        } catch (const std::exception&) {
            throw ParseError(path + " line " + std::to_string(line_no) + ": bad number");
        }
    }
    return rows;
}

int cmd_select(const std::string& metrics_csv, const std::string& validation_path, const std::string& models_dir,
               const std::string& out_path, const std::string& config_path, uint64_t seed_flag, bool seed_set) {
    pipeline::PipelineConfig config = load_config(config_path, seed_flag, seed_set);
    if (metrics_csv.empty() == validation_path.empty())
        throw ValidationError("select: pass exactly one of --metrics or --validation");

    std::map<std::string, std::string> model_paths; // id -> path on disk
    if (!models_dir.empty()) {
        for (const fs::directory_entry& entry : fs::directory_iterator(models_dir)) {
            if (entry.path().extension() != ".json") continue;
            // only files with the model signature; run manifests etc. live alongside
            std::ifstream probe(entry.path());
            json j;
            try {
                probe >> j;
            } catch (const json::exception&) {
                continue;
            }
            if (!j.is_object() || !j.contains("kind") || !j.contains("params")) continue;
            model_paths[entry.path().stem().string()] = entry.path().string();
        }
    }

    std::vector<ensemble::MetricRow> rows;
    if (!metrics_csv.empty()) {
        rows = rows_from_csv(metrics_csv);
    } else {
        if (model_paths.empty()) throw ValidationError("select: --validation requires --models-dir with model files");
        learn::Dataset validation = learn::load_dataset(validation_path);
        for (const auto& [id, path] : model_paths) {
            learn::TrainedModel model = learn::load_model(path);
            std::vector<learn::Label> preds, truth;
            std::vector<double> scores;
            for (const learn::LabeledExample& e : validation) {
                preds.push_back(learn::predict(model, e.features));
                scores.push_back(learn::score(model, e.features));
                truth.push_back(e.label);
            }
            eval::ConfusionMatrix cm = eval::confusion(preds, truth);
            eval::Metrics m = eval::metrics_from_confusion(cm);
            rows.push_back({id, m.accuracy.value_or(0.0), eval::auc(scores, truth), m.f1.value_or(0.0)});
        }
    }

    ensemble::SelectionResult result = ensemble::select_top3(rows);

    json rows_json = json::array();
    for (size_t i = 0; i < rows.size(); ++i)
        rows_json.push_back({{"model_id", rows[i].model_id},
                             {"accuracy", rows[i].accuracy},
                             {"auc", rows[i].auc},
                             {"f1", rows[i].f1},
                             {"mean_rank", result.mean_ranks[i]}});
    json selection_meta{{"rows", rows_json}, {"selected", result.selected}, {"meta", config.output_meta()}};

    std::array<std::string, 3> ids;
    std::array<std::string, 3> paths;
    const fs::path out_base = fs::path(out_path).parent_path();
    for (int i = 0; i < 3; ++i) {
        ids[i] = result.selected[i];
        auto it = model_paths.find(ids[i]);
        if (it != model_paths.end()) {
            std::error_code ec;
            fs::path rel = fs::relative(it->second, out_base.empty() ? "." : out_base, ec);
            paths[i] = ec ? it->second : rel.string();
        } else {
            paths[i] = ids[i] + ".json"; // unresolved reference; detect will fail loudly if missing
        }
    }
    ensemble::save_ensemble_file(ids, paths, selection_meta, out_path);
    std::cout << "selected: " << ids[0] << ", " << ids[1] << ", " << ids[2] << " -> " << out_path << "\n";
    return 0;
}

int cmd_detect(const std::string& manifest_path, const std::string& annotations_path, const std::string& ensemble_path,
               const std::string& out_path, const std::string& config_path, uint64_t seed_flag, bool seed_set,
               int workers) {
    pipeline::PipelineConfig config = load_config(config_path, seed_flag, seed_set);
    media::FrameManifest manifest = media::load_frame_sequence(manifest_path);
    std::vector<BoxAnnotation> annotations = media::load_annotations(annotations_path);
    ensemble::EnsembleModel ens = ensemble::load_ensemble(ensemble_path);
    const int grid_dim = config.pooling_w * config.pooling_h;
    for (const learn::TrainedModel& m : ens.members)
        if (m.dim != grid_dim)
            throw DimensionError("detect: ensemble member dim " + std::to_string(m.dim) +
                                 " does not match pooling grid " + std::to_string(grid_dim));

    std::vector<pipeline::DetectionRecord> records = pipeline::detect(manifest, annotations, ens, config, workers);
    std::ofstream out(out_path);
    if (!out) throw IoError("cannot write " + out_path);
    write_meta_line(out, config);
    for (const pipeline::DetectionRecord& r : records) out << detection_record_json(r).dump() << "\n";
    std::cerr << "detect: " << records.size() << " records -> " << out_path << "\n";
    return 0;
}

int cmd_eval(const std::string& detections_path, const std::string& truth_path, const std::string& out_path,
             const std::string& config_path, uint64_t seed_flag, bool seed_set) {
    pipeline::PipelineConfig config = load_config(config_path, seed_flag, seed_set);
    std::map<TruthKey, std::string> truth = load_truth(truth_path);
    std::ifstream in(detections_path);
    if (!in) throw IoError("cannot open " + detections_path);

    std::vector<learn::Label> preds, truths;
    int rejected = 0, unmatched_detections = 0;
    std::set<TruthKey> seen;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::exception& e) {
            throw ParseError(detections_path + " line " + std::to_string(line_no) + ": " + e.what());
        }
        if (j.contains("meta")) continue;
        const std::string label = j.at("label").get<std::string>();
        TruthKey key{j.at("person_id").get<std::string>(), j.at("start_frame").get<int>()};
        if (label == "rejected_background") {
            ++rejected;
            seen.insert(key);
            continue;
        }
        auto it = truth.find(key);
        if (it == truth.end()) {
            ++unmatched_detections;
            continue;
        }
        seen.insert(key);
        preds.push_back(learn::label_from_string(label));
        truths.push_back(learn::label_from_string(it->second));
    }
    int unmatched_truth = 0;
    for (const auto& [key, label] : truth)
        if (!seen.count(key)) ++unmatched_truth;

    json report;
    if (!preds.empty()) {
        report = eval::report_json(eval::confusion(preds, truths));
    } else {
        report = json{{"total", 0}};
    }
    report["rejected_background"] = rejected;
    report["unmatched_detections"] = unmatched_detections;
    report["unmatched_truth"] = unmatched_truth;
    report["meta"] = config.output_meta();
    const std::string text = report.dump(2) + "\n";
    if (out_path.empty()) {
        std::cout << text;
    } else {
        std::ofstream out(out_path);
        if (!out) throw IoError("cannot write " + out_path);
        out << text;
    }
    return 0;
}

int cmd_overlay(const std::string& manifest_path, const std::string& detections_path, const std::string& out_dir,
                int start, int count, const pipeline::PipelineConfig& config) {
    media::FrameManifest manifest = media::load_frame_sequence(manifest_path);
    std::ifstream in(detections_path);
    if (!in) throw IoError("cannot open " + detections_path);
    struct Span {
        int start, end;
        BoxAnnotation box;
        bool talking;
    };
    std::vector<Span> spans;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        json j = json::parse(line);
        if (j.contains("meta")) continue;
        const std::string label = j.at("label").get<std::string>();
        if (label != "talking" && label != "not_talking") continue;
        Span s;
        s.start = j.at("start_frame").get<int>();
        s.end = j.at("end_frame").get<int>();
        s.box.person_id = j.at("person_id").get<std::string>();
        s.box.x = j.at("box").at("x").get<int>();
        s.box.y = j.at("box").at("y").get<int>();
        s.box.w = j.at("box").at("w").get<int>();
        s.box.h = j.at("box").at("h").get<int>();
        s.talking = label == "talking";
        spans.push_back(s);
    }
    fs::create_directories(out_dir);
    const int last = count > 0 ? std::min(start + count, manifest.frame_count) : manifest.frame_count;
    for (int f = std::max(0, start); f < last; ++f) {
        std::vector<media::Verdict> verdicts;
        for (const Span& s : spans)
            if (s.start <= f && f <= s.end) verdicts.push_back({s.box, s.talking});
        RgbFrame frame = media::read_frame_rgb(manifest, f);
        RgbFrame rendered = media::render_overlay(frame, verdicts);
        char name[32];
        std::snprintf(name, sizeof(name), "frame_%06d.ppm", f);
        netpbm::write_ppm8(rendered, (fs::path(out_dir) / name).string());
    }
    {
        std::ofstream meta((fs::path(out_dir) / "overlay_meta.json").string());
        if (meta)
            meta << json{{"meta", config.output_meta()},
                         {"detections", detections_path},
                         {"first_frame", std::max(0, start)},
                         {"last_frame", last - 1}}
                        .dump(2)
                 << "\n";
    }
    std::cerr << "overlay: frames " << std::max(0, start) << ".." << last - 1 << " -> " << out_dir << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"talking-activity detection over annotated head regions"};
    app.require_subcommand(1);
    app.fallthrough(); // global flags (--config/--seed/--workers) may follow the subcommand

    std::string config_path;
    uint64_t seed_flag = 0;
    bool seed_set = false;
    int workers = 1;
    app.add_option("--config", config_path, "pipeline config JSON")->check(CLI::ExistingFile);
    auto* seed_opt = app.add_option("--seed", seed_flag, "seed recorded in outputs and used for training");
    app.add_option("--workers", workers, "worker threads for proposal-parallel stages")->check(CLI::PositiveNumber);

    // ingest
    auto* ingest = app.add_subcommand("ingest", "validate a manifest (and annotations) and print a summary");
    std::string in_manifest, in_annotations, in_out;
    std::string in_proposals;
    ingest->add_option("--manifest", in_manifest)->required()->check(CLI::ExistingFile);
    ingest->add_option("--annotations", in_annotations)->check(CLI::ExistingFile);
    ingest->add_option("--out", in_out);
    ingest->add_option("--proposals-out", in_proposals, "audit dump of clip proposals as JSONL");

    // fixture
    auto* fixture_cmd = app.add_subcommand("fixture", "generate a synthetic scene with annotations and truth");
    std::string fx_out, fx_mode = "detect";
    int fx_clips = 200;
    fixture_cmd->add_option("--out-dir", fx_out)->required();
    fixture_cmd->add_option("--mode", fx_mode)->check(CLI::IsMember({"detect", "train"}));
    fixture_cmd->add_option("--clips", fx_clips, "clip count for --mode train");

    // project
    auto* project = app.add_subcommand("project", "compute motion projections / feature vectors per proposal");
    std::string pr_manifest, pr_annotations, pr_truth, pr_dataset, pr_features, pr_dump;
    project->add_option("--manifest", pr_manifest)->required()->check(CLI::ExistingFile);
    project->add_option("--annotations", pr_annotations)->required()->check(CLI::ExistingFile);
    project->add_option("--truth", pr_truth)->check(CLI::ExistingFile);
    project->add_option("--dataset-out", pr_dataset, "labeled dataset JSONL (needs --truth)");
    project->add_option("--features-out", pr_features, "unlabeled feature JSONL");
    project->add_option("--dump-dir", pr_dump, "write projection images as PGM-16 + sidecars");

    // train
    auto* train_cmd = app.add_subcommand("train", "train classifiers on a labeled dataset");
    std::string tr_dataset, tr_out_dir, tr_kinds;
    train_cmd->add_option("--dataset", tr_dataset)->required()->check(CLI::ExistingFile);
    train_cmd->add_option("--out-dir", tr_out_dir)->required();
    train_cmd->add_option("--kinds", tr_kinds, "comma list (default: all of knn,dtree,adaboost,rforest,gbt,qda)");

    // select
    auto* select = app.add_subcommand("select", "pick the top-3 classifiers and write an ensemble file");
    std::string se_metrics, se_validation, se_models, se_out;
    select->add_option("--metrics", se_metrics, "CSV with model_id,accuracy,auc,f1")->check(CLI::ExistingFile);
    select->add_option("--validation", se_validation, "labeled dataset JSONL to score models on")->check(CLI::ExistingFile);
    select->add_option("--models-dir", se_models)->check(CLI::ExistingDirectory);
    select->add_option("--out", se_out)->required();

    // detect
    auto* detect = app.add_subcommand("detect", "classify every clip proposal with a trained ensemble");
    std::string de_manifest, de_annotations, de_ensemble, de_out;
    detect->add_option("--manifest", de_manifest)->required()->check(CLI::ExistingFile);
    detect->add_option("--annotations", de_annotations)->required()->check(CLI::ExistingFile);
    detect->add_option("--ensemble", de_ensemble)->required()->check(CLI::ExistingFile);
    detect->add_option("--out", de_out)->required();

    // eval
    auto* eval_cmd = app.add_subcommand("eval", "score detections against truth labels");
    std::string ev_detections, ev_truth, ev_out;
    eval_cmd->add_option("--detections", ev_detections)->required()->check(CLI::ExistingFile);
    eval_cmd->add_option("--truth", ev_truth)->required()->check(CLI::ExistingFile);
    eval_cmd->add_option("--out", ev_out);

    // overlay
    auto* overlay = app.add_subcommand("overlay", "render detection boxes onto frames as PPM files");
    std::string ov_manifest, ov_detections, ov_out;
    int ov_start = 0, ov_count = 0;
    overlay->add_option("--manifest", ov_manifest)->required()->check(CLI::ExistingFile);
    overlay->add_option("--detections", ov_detections)->required()->check(CLI::ExistingFile);
    overlay->add_option("--out-dir", ov_out)->required();
    overlay->add_option("--start", ov_start, "first frame to render");
    overlay->add_option("--count", ov_count, "number of frames to render (0 = all)");

    CLI11_PARSE(app, argc, argv);
    seed_set = seed_opt->count() > 0;

    try {
        if (*ingest)
            return cmd_ingest(in_manifest, in_annotations, in_out, in_proposals,
                              load_config(config_path, seed_flag, seed_set));
        if (*fixture_cmd) return cmd_fixture(fx_out, fx_mode, fx_clips, seed_set ? seed_flag : 1);
        if (*project)
            return cmd_project(pr_manifest, pr_annotations, config_path, seed_flag, seed_set, pr_truth, pr_dataset,
                               pr_features, pr_dump, workers);
        if (*train_cmd) return cmd_train(tr_dataset, tr_out_dir, config_path, seed_flag, seed_set, tr_kinds);
        if (*select) return cmd_select(se_metrics, se_validation, se_models, se_out, config_path, seed_flag, seed_set);
        if (*detect)
            return cmd_detect(de_manifest, de_annotations, de_ensemble, de_out, config_path, seed_flag, seed_set,
                              workers);
        if (*eval_cmd) return cmd_eval(ev_detections, ev_truth, ev_out, config_path, seed_flag, seed_set);
        if (*overlay)
            return cmd_overlay(ov_manifest, ov_detections, ov_out, ov_start, ov_count,
                               load_config(config_path, seed_flag, seed_set));
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
