#pragma once

#include <fstream>
#include <string>

#include <json.hpp>

#include "talkdet/learn/model.hpp"

// Versioned JSON model files: {format_version, kind, dim, params, train_meta}.
// Doubles round-trip exactly through nlohmann's shortest representation, so
// a loaded model predicts bit-identically.

namespace talkdet::learn {

inline constexpr int kModelFormatVersion = 1;

namespace detail {

inline nlohmann::json tree_to_json(const Tree& tree) {
    nlohmann::json nodes = nlohmann::json::array();
    for (const TreeNode& n : tree)
        nodes.push_back({{"feature", n.feature},
                         {"threshold", n.threshold},
                         {"left", n.left},
                         {"right", n.right},
                         {"value", n.value},
                         {"count", n.count}});
    return nodes;
}

inline Tree tree_from_json(const nlohmann::json& nodes) {
    Tree tree;
    for (const nlohmann::json& jn : nodes) {
        TreeNode n;
        n.feature = jn.at("feature").get<int>();
        n.threshold = jn.at("threshold").get<double>();
        n.left = jn.at("left").get<int>();
        n.right = jn.at("right").get<int>();
        n.value = jn.at("value").get<double>();
        n.count = jn.at("count").get<int>();
        tree.push_back(n);
    }
    if (tree.empty()) throw CorruptError("model file holds an empty tree");
    return tree;
}

inline nlohmann::json params_to_json(const TrainedModel& model) {
    switch (model.kind) {
        case ModelKind::knn: {
            const KnnModel& m = std::get<KnnModel>(model.params);
            nlohmann::json labels = nlohmann::json::array();
            for (Label l : m.labels) labels.push_back(static_cast<int>(l));
            return {{"k", m.k}, {"points", m.points}, {"labels", labels}};
        }
        case ModelKind::dtree: return {{"tree", tree_to_json(std::get<DtreeModel>(model.params).tree)}};
        case ModelKind::adaboost: {
            const AdaBoostModel& m = std::get<AdaBoostModel>(model.params);
            nlohmann::json stumps = nlohmann::json::array();
            for (const Stump& s : m.stumps)
                stumps.push_back(
                    {{"feature", s.feature}, {"threshold", s.threshold}, {"polarity", s.polarity}, {"alpha", s.alpha}});
            return {{"stumps", stumps}, {"round_train_error", m.round_train_error}};
        }
        case ModelKind::rforest: {
            const ForestModel& m = std::get<ForestModel>(model.params);
            nlohmann::json trees = nlohmann::json::array();
            for (const Tree& t : m.trees) trees.push_back(tree_to_json(t));
            return {{"trees", trees}};
        }
        case ModelKind::gbt: {
            const GbtModel& m = std::get<GbtModel>(model.params);
            nlohmann::json trees = nlohmann::json::array();
            for (const Tree& t : m.trees) trees.push_back(tree_to_json(t));
            return {{"trees", trees},
                    {"hyper",
                     {{"trees", m.hyper.trees},
                      {"depth", m.hyper.depth},
                      {"learning_rate", m.hyper.learning_rate},
                      {"l2", m.hyper.l2}}}};
        }
        case ModelKind::qda: {
            const QdaModel& m = std::get<QdaModel>(model.params);
            nlohmann::json classes = nlohmann::json::array();
            for (const QdaModel::ClassStats& c : m.classes)
                classes.push_back({{"prior", c.prior}, {"mean", c.mean}, {"cov", c.cov}});
            return {{"reg", m.reg}, {"classes", classes}};
        }
    }
    throw Error("params_to_json: unreachable kind");
}

inline void params_from_json(const nlohmann::json& p, TrainedModel& model) {
    switch (model.kind) {
        case ModelKind::knn: {
            KnnModel m;
            m.k = p.at("k").get<int>();
            m.points = p.at("points").get<std::vector<std::vector<double>>>();
            for (int l : p.at("labels").get<std::vector<int>>()) m.labels.push_back(static_cast<Label>(l));
            if (m.labels.size() != m.points.size()) throw CorruptError("knn points/labels length mismatch");
            model.params = std::move(m);
            return;
        }
        case ModelKind::dtree: {
            DtreeModel m;
            m.tree = tree_from_json(p.at("tree"));
            model.params = std::move(m);
            return;
        }
        case ModelKind::adaboost: {
            AdaBoostModel m;
            for (const nlohmann::json& js : p.at("stumps"))
                m.stumps.push_back(Stump{js.at("feature").get<int>(), js.at("threshold").get<double>(),
                                         js.at("polarity").get<int>(), js.at("alpha").get<double>()});
            m.round_train_error = p.value("round_train_error", std::vector<double>{});
            model.params = std::move(m);
            return;
        }
        case ModelKind::rforest: {
            ForestModel m;
            for (const nlohmann::json& jt : p.at("trees")) m.trees.push_back(tree_from_json(jt));
            model.params = std::move(m);
            return;
        }
        case ModelKind::gbt: {
            GbtModel m;
            const nlohmann::json& h = p.at("hyper");
            m.hyper = GbtHyper{h.at("trees").get<int>(), h.at("depth").get<int>(), h.at("learning_rate").get<double>(),
                               h.at("l2").get<double>()};
            for (const nlohmann::json& jt : p.at("trees")) m.trees.push_back(tree_from_json(jt));
            model.params = std::move(m);
            return;
        }
        case ModelKind::qda: {
            QdaModel m;
            m.reg = p.at("reg").get<double>();
            for (const nlohmann::json& jc : p.at("classes")) {
                QdaModel::ClassStats c;
                c.prior = jc.at("prior").get<double>();
                c.mean = jc.at("mean").get<std::vector<double>>();
                c.cov = jc.at("cov").get<std::vector<double>>();
                if (c.cov.size() != c.mean.size() * c.mean.size()) throw CorruptError("qda covariance size mismatch");
                m.classes.push_back(std::move(c));
            }
            if (m.classes.size() != 2) throw CorruptError("qda model must hold exactly 2 classes");
            m.finalize();
            model.params = std::move(m);
            return;
        }
    }
    throw Error("params_from_json: unreachable kind");
}

} // namespace detail

inline void save_model(const TrainedModel& model, const std::string& path) {
    nlohmann::json j{{"format_version", kModelFormatVersion},
                     {"kind", to_string(model.kind)},
                     {"dim", model.dim},
                     {"params", detail::params_to_json(model)},
                     {"train_meta",
                      {{"seed", model.meta.seed},
                       {"hyperparameters", model.meta.hyperparameters},
                       {"dataset_fingerprint", model.meta.dataset_fingerprint}}}};
    std::ofstream out(path);
    if (!out) throw IoError("cannot write model " + path);
    out << j.dump(2) << "\n";
}

inline TrainedModel load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open model " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw CorruptError("model file " + path + " is not valid JSON: " + e.what());
    }
    if (!j.contains("format_version")) throw CorruptError("model file " + path + " lacks format_version");
    const int version = j.at("format_version").get<int>();
    if (version != kModelFormatVersion)
        throw VersionError("model file " + path + " has format_version " + std::to_string(version) + ", expected " +
                           std::to_string(kModelFormatVersion));
    TrainedModel model;
    try {
        model.kind = model_kind_from_string(j.at("kind").get<std::string>());
        model.dim = j.at("dim").get<int>();
        detail::params_from_json(j.at("params"), model);
        const nlohmann::json& meta = j.at("train_meta");
        model.meta.seed = meta.at("seed").get<uint64_t>();
        model.meta.hyperparameters = meta.at("hyperparameters");
        model.meta.dataset_fingerprint = meta.at("dataset_fingerprint").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
        throw CorruptError("model file " + path + " is structurally damaged: " + e.what());
    }
    if (model.dim <= 0) throw CorruptError("model file " + path + " has non-positive dim");
    return model;
}

} // namespace talkdet::learn
