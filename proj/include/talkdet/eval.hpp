#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "talkdet/error.hpp"
#include "talkdet/image.hpp"
#include "talkdet/learn/dataset.hpp"

// Metric arithmetic: confusion matrices, accuracy/precision/recall/F1,
// Mann-Whitney AUC with tie correction, and greedy IoU detection matching.

namespace talkdet::eval {

// Layout [tn fp; fn tp], talking = positive class.
struct ConfusionMatrix {
    long long tn = 0, fp = 0, fn = 0, tp = 0;

    long long total() const { return tn + fp + fn + tp; }
};

struct Metrics {
    std::optional<double> accuracy;
    std::optional<double> precision;
    std::optional<double> recall;
    std::optional<double> f1;
};

inline ConfusionMatrix confusion(const std::vector<learn::Label>& preds, const std::vector<learn::Label>& truth) {
    if (preds.size() != truth.size() || preds.empty())
        throw DimensionError("confusion: prediction/truth lengths differ or are empty");
    ConfusionMatrix cm;
    for (size_t i = 0; i < preds.size(); ++i) {
        const bool p = preds[i] == learn::Label::talking;
        const bool t = truth[i] == learn::Label::talking;
        if (p && t)
            ++cm.tp;
        else if (p && !t)
            ++cm.fp;
        else if (!p && t)
            ++cm.fn;
        else
            ++cm.tn;
    }
    return cm;
}

// Zero denominators yield unset metrics rather than exceptions.
inline Metrics metrics_from_confusion(const ConfusionMatrix& cm) {
    if (cm.total() <= 0) throw ValidationError("metrics_from_confusion: empty matrix");
    Metrics m;
    m.accuracy = static_cast<double>(cm.tp + cm.tn) / cm.total();
    if (cm.tp + cm.fp > 0) m.precision = static_cast<double>(cm.tp) / (cm.tp + cm.fp);
    if (cm.tp + cm.fn > 0) m.recall = static_cast<double>(cm.tp) / (cm.tp + cm.fn);
    if (m.precision && m.recall && *m.precision + *m.recall > 0.0)
        m.f1 = 2.0 * *m.precision * *m.recall / (*m.precision + *m.recall);
    return m;
}

// Render a ratio as an integer percent string, round half up ("0.675" -> "68%").
inline std::string percent_string(double v) {
    return std::to_string(static_cast<long long>(std::floor(v * 100.0 + 0.5))) + "%";
}

// Mann-Whitney AUC by rank sum with average ranks for ties.
inline double auc(const std::vector<double>& scores, const std::vector<learn::Label>& truth) {
    if (scores.size() != truth.size() || scores.empty()) throw DimensionError("auc: score/truth lengths differ or are empty");
    long long n_pos = 0;
    for (learn::Label l : truth) n_pos += l == learn::Label::talking ? 1 : 0;
    const long long n_neg = static_cast<long long>(truth.size()) - n_pos;
    if (n_pos == 0 || n_neg == 0) throw ValidationError("auc: both classes must be present");

    const int n = static_cast<int>(scores.size());
    std::vector<int> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) { return scores[a] < scores[b]; });
    double rank_pos_sum = 0.0;
    int i = 0;
    while (i < n) {
        int j = i;
        while (j + 1 < n && scores[idx[j + 1]] == scores[idx[i]]) ++j;
        const double mean_rank = (i + 1 + j + 1) / 2.0;
        for (int k = i; k <= j; ++k)
            if (truth[idx[k]] == learn::Label::talking) rank_pos_sum += mean_rank;
        i = j + 1;
    }
    return (rank_pos_sum - static_cast<double>(n_pos) * (n_pos + 1) / 2.0) / (static_cast<double>(n_pos) * n_neg);
}

struct DetectionCounts {
    long long tp = 0, fp = 0, fn = 0;
};

inline double iou(const BoxAnnotation& a, const BoxAnnotation& b) {
    const long long x0 = std::max(a.x, b.x), y0 = std::max(a.y, b.y);
    const long long x1 = std::min(a.x + a.w, b.x + b.w), y1 = std::min(a.y + a.h, b.y + b.h);
    const long long iw = std::max(0ll, x1 - x0), ih = std::max(0ll, y1 - y0);
    const long long inter = iw * ih;
    const long long uni = static_cast<long long>(a.w) * a.h + static_cast<long long>(b.w) * b.h - inter;
    return uni > 0 ? static_cast<double>(inter) / uni : 0.0;
}

// Per-frame greedy matching in descending IoU order; pairs below the
// threshold never match; each box used at most once.
inline DetectionCounts match_detections(const std::vector<BoxAnnotation>& gt, const std::vector<BoxAnnotation>& det,
                                        double iou_threshold) {
    if (!(iou_threshold > 0.0 && iou_threshold <= 1.0))
        throw ValidationError("match_detections: iou_threshold must be in (0, 1]");
    std::map<int, std::pair<std::vector<const BoxAnnotation*>, std::vector<const BoxAnnotation*>>> frames;
    for (const BoxAnnotation& g : gt) frames[g.frame_index].first.push_back(&g);
    for (const BoxAnnotation& d : det) frames[d.frame_index].second.push_back(&d);

    DetectionCounts counts;
    struct Pair {
        double iou;
        int gi, di;
    };
    for (auto& [frame, lists] : frames) {
        const auto& gts = lists.first;
        const auto& dets = lists.second;
        std::vector<Pair> pairs;
        for (size_t gi = 0; gi < gts.size(); ++gi)
            for (size_t di = 0; di < dets.size(); ++di) {
                const double v = iou(*gts[gi], *dets[di]);
                if (v >= iou_threshold) pairs.push_back({v, static_cast<int>(gi), static_cast<int>(di)});
            }
        std::sort(pairs.begin(), pairs.end(), [](const Pair& a, const Pair& b) {
            if (a.iou != b.iou) return a.iou > b.iou;
            if (a.gi != b.gi) return a.gi < b.gi;
            return a.di < b.di;
        });
        std::vector<bool> gt_used(gts.size(), false), det_used(dets.size(), false);
        long long matched = 0;
        for (const Pair& p : pairs) {
            if (gt_used[p.gi] || det_used[p.di]) continue;
            gt_used[p.gi] = true;
            det_used[p.di] = true;
            ++matched;
        }
        counts.tp += matched;
        counts.fp += static_cast<long long>(dets.size()) - matched;
        counts.fn += static_cast<long long>(gts.size()) - matched;
    }
    return counts;
}

inline std::optional<double> f1_from_counts(const DetectionCounts& c) {
    if (c.tp + c.fp <= 0 || c.tp + c.fn <= 0) return std::nullopt;
    return 2.0 * c.tp / static_cast<double>(2 * c.tp + c.fp + c.fn);
}

// Render-ready report for a label-level evaluation.
inline nlohmann::json report_json(const ConfusionMatrix& cm) {
    const Metrics m = metrics_from_confusion(cm);
    nlohmann::json j{{"confusion", {{"tn", cm.tn}, {"fp", cm.fp}, {"fn", cm.fn}, {"tp", cm.tp}}},
                     {"total", cm.total()}};
    auto put = [&](const char* name, const std::optional<double>& v) {
        if (v)
            j[name] = *v;
        else
            j[name] = "undefined";
    };
    put("accuracy", m.accuracy);
    put("precision", m.precision);
    put("recall", m.recall);
    put("f1", m.f1);
    if (m.accuracy) j["accuracy_percent"] = percent_string(*m.accuracy);
    return j;
}

// Detection-table checker: reports raw sums and flags rows whose published
// aggregate counts disagree with TP/FP/FN arithmetic.
inline nlohmann::json detection_row_report(long long labeled, long long detected, const DetectionCounts& c) {
    nlohmann::json j{{"labeled", labeled},       {"detected", detected}, {"tp", c.tp},
                     {"fp", c.fp},               {"fn", c.fn},           {"tp_plus_fn", c.tp + c.fn},
                     {"tp_plus_fp", c.tp + c.fp}};
    const std::optional<double> f1 = f1_from_counts(c);
    if (f1)
        j["f1"] = *f1;
    else
        j["f1"] = "undefined";
    j["labeled_consistent"] = labeled == c.tp + c.fn;
    j["detected_consistent"] = detected == c.tp + c.fp;
    return j;
}

} // namespace talkdet::eval
