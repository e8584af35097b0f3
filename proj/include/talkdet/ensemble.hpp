#pragma once

#include <algorithm>
#include <array>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <string>
#include <vector>

#include <json.hpp>

#include "talkdet/error.hpp"
#include "talkdet/learn/model.hpp"
#include "talkdet/learn/model_io.hpp"

// Pick the three classifiers with the best mean rank across accuracy, AUC
// and F1, and combine their predictions with a simple majority vote.

namespace talkdet::ensemble {

struct MetricRow {
    std::string model_id;
    double accuracy = 0.0;
    double auc = 0.0;
    double f1 = 0.0;
};

namespace detail {

// rank 1 = best (largest); ties share the mean of the tied ranks
inline std::vector<double> fractional_ranks_desc(const std::vector<double>& vals) {
    const int n = static_cast<int>(vals.size());
    std::vector<int> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) { return vals[a] > vals[b]; });
    std::vector<double> ranks(n, 0.0);
    int i = 0;
    while (i < n) {
        int j = i;
        while (j + 1 < n && vals[idx[j + 1]] == vals[idx[i]]) ++j;
        const double mean_rank = (i + 1 + j + 1) / 2.0;
        for (int k = i; k <= j; ++k) ranks[idx[k]] = mean_rank;
        i = j + 1;
    }
    return ranks;
}

} // namespace detail

struct SelectionResult {
    std::vector<std::string> selected; // 3 model ids, best mean rank first
    std::vector<double> mean_ranks;    // parallel to the input rows
};

inline SelectionResult select_top3(const std::vector<MetricRow>& rows) {
    if (rows.size() < 3) throw ValidationError("select_top3: need at least 3 metric rows");
    for (size_t i = 0; i < rows.size(); ++i) {
        const MetricRow& r = rows[i];
        for (double v : {r.accuracy, r.auc, r.f1})
            if (!(v >= 0.0 && v <= 1.0))
                throw ValidationError("select_top3: metrics for '" + r.model_id + "' must lie in [0, 1]");
        for (size_t j = i + 1; j < rows.size(); ++j)
            if (rows[j].model_id == r.model_id)
                throw ValidationError("select_top3: duplicate model_id '" + r.model_id + "'");
    }
    std::vector<double> acc, auc, f1;
    for (const MetricRow& r : rows) {
        acc.push_back(r.accuracy);
        auc.push_back(r.auc);
        f1.push_back(r.f1);
    }
    const std::vector<double> ra = detail::fractional_ranks_desc(acc);
    const std::vector<double> ru = detail::fractional_ranks_desc(auc);
    const std::vector<double> rf = detail::fractional_ranks_desc(f1);

    SelectionResult result;
    result.mean_ranks.resize(rows.size());
    std::vector<int> order(rows.size());
    std::iota(order.begin(), order.end(), 0);
    for (size_t i = 0; i < rows.size(); ++i) result.mean_ranks[i] = (ra[i] + ru[i] + rf[i]) / 3.0;
    // mean rank, then higher accuracy, then lexicographic id
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        if (result.mean_ranks[a] != result.mean_ranks[b]) return result.mean_ranks[a] < result.mean_ranks[b];
        if (rows[a].accuracy != rows[b].accuracy) return rows[a].accuracy > rows[b].accuracy;
        return rows[a].model_id < rows[b].model_id;
    });
    for (int i = 0; i < 3; ++i) result.selected.push_back(rows[order[i]].model_id);
    return result;
}

inline learn::Label majority_vote(const std::array<learn::Label, 3>& labels) {
    int talking = 0;
    for (learn::Label l : labels) talking += l == learn::Label::talking ? 1 : 0;
    return talking >= 2 ? learn::Label::talking : learn::Label::not_talking;
}

struct EnsembleModel {
    std::array<std::string, 3> member_ids;
    std::array<learn::TrainedModel, 3> members;
    nlohmann::json selection_meta;
};

struct EnsemblePrediction {
    learn::Label label = learn::Label::not_talking;
    std::array<learn::Label, 3> member_votes{};
    std::array<double, 3> member_scores{};
};

inline EnsemblePrediction ensemble_predict(const EnsembleModel& ens, const std::vector<double>& x) {
    EnsemblePrediction out;
    for (int i = 0; i < 3; ++i) {
        out.member_scores[i] = learn::score(ens.members[i], x);
        out.member_votes[i] = out.member_scores[i] > 0.5 ? learn::Label::talking : learn::Label::not_talking;
    }
    out.label = majority_vote(out.member_votes);
    return out;
}

inline constexpr int kEnsembleFormatVersion = 1;

// Ensemble file: member model files by reference (relative to the ensemble
// file's directory) plus the metric rows and ranks behind the selection.
inline void save_ensemble_file(const std::array<std::string, 3>& member_ids,
                               const std::array<std::string, 3>& member_paths, const nlohmann::json& selection_meta,
                               const std::string& path) {
    nlohmann::json members = nlohmann::json::array();
    for (int i = 0; i < 3; ++i) members.push_back({{"model_id", member_ids[i]}, {"path", member_paths[i]}});
    nlohmann::json j{{"format_version", kEnsembleFormatVersion}, {"members", members}, {"selection_meta", selection_meta}};
    std::ofstream out(path);
    if (!out) throw IoError("cannot write ensemble " + path);
    out << j.dump(2) << "\n";
}

inline EnsembleModel load_ensemble(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open ensemble " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw CorruptError("ensemble file " + path + " is not valid JSON: " + e.what());
    }
    if (!j.contains("format_version")) throw CorruptError("ensemble file " + path + " lacks format_version");
    const int version = j.at("format_version").get<int>();
    if (version != kEnsembleFormatVersion)
        throw VersionError("ensemble file " + path + " has format_version " + std::to_string(version));
    const nlohmann::json& members = j.at("members");
    if (members.size() != 3) throw ValidationError("ensemble file " + path + " must reference exactly 3 members");
    EnsembleModel ens;
    const std::filesystem::path base = std::filesystem::path(path).parent_path();
    for (int i = 0; i < 3; ++i) {
        ens.member_ids[i] = members[i].at("model_id").get<std::string>();
        std::filesystem::path mp(members[i].at("path").get<std::string>());
        if (mp.is_relative()) mp = base / mp;
        ens.members[i] = learn::load_model(mp.string());
    }
    if (ens.member_ids[0] == ens.member_ids[1] || ens.member_ids[0] == ens.member_ids[2] ||
        ens.member_ids[1] == ens.member_ids[2])
        throw ValidationError("ensemble file " + path + " has duplicate members");
    ens.selection_meta = j.value("selection_meta", nlohmann::json::object());
    return ens;
}

} // namespace talkdet::ensemble
