#pragma once

#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "talkdet/learn/adaboost.hpp"
#include "talkdet/learn/dataset.hpp"
#include "talkdet/learn/gbt.hpp"
#include "talkdet/learn/knn.hpp"
#include "talkdet/learn/qda.hpp"
#include "talkdet/learn/tree.hpp"

namespace talkdet::learn {

enum class ModelKind { knn, dtree, adaboost, rforest, gbt, qda };

inline std::string to_string(ModelKind k) {
    switch (k) {
        case ModelKind::knn: return "knn";
        case ModelKind::dtree: return "dtree";
        case ModelKind::adaboost: return "adaboost";
        case ModelKind::rforest: return "rforest";
        case ModelKind::gbt: return "gbt";
        case ModelKind::qda: return "qda";
    }
    return "?";
}

inline ModelKind model_kind_from_string(const std::string& s) {
    if (s == "knn") return ModelKind::knn;
    if (s == "dtree") return ModelKind::dtree;
    if (s == "adaboost") return ModelKind::adaboost;
    if (s == "rforest") return ModelKind::rforest;
    if (s == "gbt") return ModelKind::gbt;
    if (s == "qda") return ModelKind::qda;
    throw ParseError("unknown model kind '" + s + "'");
}

inline const std::vector<ModelKind>& all_model_kinds() {
    static const std::vector<ModelKind> kinds{ModelKind::knn,     ModelKind::dtree, ModelKind::adaboost,
                                              ModelKind::rforest, ModelKind::gbt,   ModelKind::qda};
    return kinds;
}

struct DtreeModel {
    Tree tree;
};

struct ForestModel {
    std::vector<Tree> trees;
};

struct TrainMeta {
    uint64_t seed = 0;
    nlohmann::json hyperparameters;
    std::string dataset_fingerprint;
};

struct TrainedModel {
    ModelKind kind = ModelKind::knn;
    int dim = 0;
    std::variant<KnnModel, DtreeModel, AdaBoostModel, ForestModel, GbtModel, QdaModel> params;
    TrainMeta meta;
};

namespace detail {

inline ForestModel train_forest(const Dataset& data, int trees, int max_depth, int min_leaf, int dim, uint64_t seed) {
    ForestModel model;
    const int n = static_cast<int>(data.size());
    const int per_node = std::max(1, static_cast<int>(std::lround(std::sqrt(static_cast<double>(dim)))));
    SplitMix64 master(seed);
    for (int t = 0; t < trees; ++t) {
        SplitMix64 tree_rng(master.next());
        std::vector<int> bootstrap(n);
        for (int i = 0; i < n; ++i) bootstrap[i] = static_cast<int>(tree_rng.below(static_cast<uint64_t>(n)));
        CartParams params{max_depth, min_leaf, per_node};
        model.trees.push_back(build_gini_tree(data, std::move(bootstrap), params, dim, &tree_rng));
    }
    return model;
}

} // namespace detail

// Train one classifier. `hyper` is a per-kind JSON record; unknown keys are
// rejected nowhere, defaults fill the gaps. Deterministic for a fixed
// (dataset order, hyper, seed).
inline TrainedModel train(ModelKind kind, const Dataset& data, const nlohmann::json& hyper_in, uint64_t seed) {
    if (data.size() < 2) throw ValidationError("train: need at least 2 examples");
    const int dim = dataset_dim(data);
    require_both_classes(data);
    const nlohmann::json hyper = hyper_in.is_null() ? nlohmann::json::object() : hyper_in;

    TrainedModel model;
    model.kind = kind;
    model.dim = dim;
    model.meta.seed = seed;
    model.meta.dataset_fingerprint = dataset_fingerprint(data);

    nlohmann::json eff; // effective hyperparameters, recorded in train_meta
    switch (kind) {
        case ModelKind::knn: {
            const int k = hyper.value("k", 5);
            eff = {{"k", k}};
            model.params = train_knn(data, k);
            break;
        }
        case ModelKind::dtree: {
            const int max_depth = hyper.value("max_depth", 8);
            const int min_leaf = hyper.value("min_leaf", 5);
            if (max_depth < 1 || min_leaf < 1) throw ValidationError("dtree: max_depth and min_leaf must be >= 1");
            eff = {{"max_depth", max_depth}, {"min_leaf", min_leaf}};
            std::vector<int> all(data.size());
            for (size_t i = 0; i < data.size(); ++i) all[i] = static_cast<int>(i);
            DtreeModel m;
            m.tree = build_gini_tree(data, std::move(all), CartParams{max_depth, min_leaf, 0}, dim);
            model.params = std::move(m);
            break;
        }
        case ModelKind::adaboost: {
            const int rounds = hyper.value("rounds", 100);
            if (rounds < 1) throw ValidationError("adaboost: rounds must be >= 1");
            eff = {{"rounds", rounds}};
            model.params = train_adaboost(data, rounds, dim);
            break;
        }
        case ModelKind::rforest: {
            const int trees = hyper.value("trees", 100);
            const int max_depth = hyper.value("max_depth", 16);
            const int min_leaf = hyper.value("min_leaf", 1);
            if (trees < 1 || max_depth < 1 || min_leaf < 1)
                throw ValidationError("rforest: trees, max_depth and min_leaf must be >= 1");
            eff = {{"trees", trees}, {"max_depth", max_depth}, {"min_leaf", min_leaf}};
            model.params = detail::train_forest(data, trees, max_depth, min_leaf, dim, seed);
            break;
        }
        case ModelKind::gbt: {
            GbtHyper gh;
            gh.trees = hyper.value("trees", 100);
            gh.depth = hyper.value("depth", 3);
            gh.learning_rate = hyper.value("learning_rate", 0.1);
            gh.l2 = hyper.value("l2", 1.0);
            if (gh.trees < 1 || gh.depth < 1 || !(gh.learning_rate > 0.0) || gh.l2 < 0.0)
                throw ValidationError("gbt: need trees/depth >= 1, learning_rate > 0, l2 >= 0");
            eff = {{"trees", gh.trees}, {"depth", gh.depth}, {"learning_rate", gh.learning_rate}, {"l2", gh.l2}};
            model.params = train_gbt(data, gh, dim);
            break;
        }
        case ModelKind::qda: {
            const double reg = hyper.value("reg", 1e-6);
            if (!(reg >= 0.0)) throw ValidationError("qda: reg must be >= 0");
            eff = {{"reg", reg}};
            model.params = train_qda(data, reg, dim);
            break;
        }
    }
    model.meta.hyperparameters = eff;
    return model;
}

// Probability-like score for class talking.
inline double score(const TrainedModel& model, const std::vector<double>& x) {
    if (static_cast<int>(x.size()) != model.dim)
        throw DimensionError("score: feature length " + std::to_string(x.size()) + " does not match model dim " +
                             std::to_string(model.dim));
    switch (model.kind) {
        case ModelKind::knn: return score_knn(std::get<KnnModel>(model.params), x);
        case ModelKind::dtree: {
            const Tree& t = std::get<DtreeModel>(model.params).tree;
            return t[tree_descend(t, x)].value;
        }
        case ModelKind::adaboost: return score_adaboost(std::get<AdaBoostModel>(model.params), x);
        case ModelKind::rforest: {
            const ForestModel& f = std::get<ForestModel>(model.params);
            double acc = 0.0;
            for (const Tree& t : f.trees) acc += t[tree_descend(t, x)].value;
            return acc / f.trees.size();
        }
        case ModelKind::gbt: return score_gbt(std::get<GbtModel>(model.params), x);
        case ModelKind::qda: return score_qda(std::get<QdaModel>(model.params), x);
    }
    throw Error("score: unreachable kind");
}

// Scores exactly 0.5 fall to the negative class.
inline Label predict(const TrainedModel& model, const std::vector<double>& x) {
    return score(model, x) > 0.5 ? Label::talking : Label::not_talking;
}

} // namespace talkdet::learn
