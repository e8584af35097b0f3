#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "talkdet/learn/dataset.hpp"
#include "talkdet/learn/tree.hpp"

namespace talkdet::learn {

struct GbtHyper {
    int trees = 100;
    int depth = 3;
    double learning_rate = 0.1;
    double l2 = 1.0; // leaf penalty lambda
};

struct GbtModel {
    GbtHyper hyper;
    std::vector<Tree> trees; // leaf values are raw (pre learning-rate) weights
};

namespace detail {

struct GradSplit {
    bool found = false;
    int feature = -1;
    double threshold = 0.0;
    double gain = 0.0;
};

// Second-order gain: 1/2 [GL^2/(HL+l2) + GR^2/(HR+l2) - G^2/(H+l2)].
inline GradSplit best_grad_split(const Dataset& data, const std::vector<int>& items, const std::vector<double>& grad,
                                 const std::vector<double>& hess, int dim, double l2) {
    const int n = static_cast<int>(items.size());
    double gsum = 0.0, hsum = 0.0;
    for (int i : items) {
        gsum += grad[i];
        hsum += hess[i];
    }
    const double parent = gsum * gsum / (hsum + l2);
    GradSplit best;
    std::vector<int> order;
    for (int f = 0; f < dim; ++f) {
        order = items;
        std::stable_sort(order.begin(), order.end(),
                         [&](int a, int b) { return data[a].features[f] < data[b].features[f]; });
        double gl = 0.0, hl = 0.0;
        for (int i = 0; i + 1 < n; ++i) {
            gl += grad[order[i]];
            hl += hess[order[i]];
            const double v0 = data[order[i]].features[f];
            const double v1 = data[order[i + 1]].features[f];
            if (!(v0 < v1)) continue;
            const double thr = 0.5 * (v0 + v1);
            if (!(v0 < thr && thr <= v1)) continue;
            const double gr = gsum - gl, hr = hsum - hl;
            const double gain = 0.5 * (gl * gl / (hl + l2) + gr * gr / (hr + l2) - parent);
            if (gain <= 1e-12) continue;
            if (!best.found || gain > best.gain) best = {true, f, thr, gain};
        }
    }
    return best;
}

inline Tree build_grad_tree(const Dataset& data, const std::vector<double>& grad, const std::vector<double>& hess,
                            int dim, const GbtHyper& hyper) {
    Tree tree;
    struct Work {
        std::vector<int> items;
        int depth;
        int node;
    };
    auto make_leaf = [&](TreeNode& node, const std::vector<int>& subset) {
        double g = 0.0, h = 0.0;
        for (int i : subset) {
            g += grad[i];
            h += hess[i];
        }
        node.feature = -1;
        node.value = -g / (h + hyper.l2);
        node.count = static_cast<int>(subset.size());
    };
    tree.push_back(TreeNode{});
    std::vector<Work> stack;
    std::vector<int> all(data.size());
    for (size_t i = 0; i < data.size(); ++i) all[i] = static_cast<int>(i);
    stack.push_back({std::move(all), 0, 0});
    while (!stack.empty()) {
        Work w = std::move(stack.back());
        stack.pop_back();
        if (w.depth >= hyper.depth || w.items.size() < 2) {
            make_leaf(tree[w.node], w.items);
            continue;
        }
        GradSplit split = best_grad_split(data, w.items, grad, hess, dim, hyper.l2);
        if (!split.found) {
            make_leaf(tree[w.node], w.items);
            continue;
        }
        std::vector<int> left, right;
        for (int i : w.items) (data[i].features[split.feature] < split.threshold ? left : right).push_back(i);
        const int left_id = static_cast<int>(tree.size());
        tree.push_back(TreeNode{});
        const int right_id = static_cast<int>(tree.size());
        tree.push_back(TreeNode{});
        TreeNode& parent = tree[w.node];
        parent.feature = split.feature;
        parent.threshold = split.threshold;
        parent.left = left_id;
        parent.right = right_id;
        parent.count = static_cast<int>(w.items.size());
        stack.push_back({std::move(right), w.depth + 1, right_id});
        stack.push_back({std::move(left), w.depth + 1, left_id});
    }
    return tree;
}

} // namespace detail

// Logistic-loss gradient boosting with second-order leaf weights, xgboost
// style. The raw score starts at 0 (probability 0.5).
inline GbtModel train_gbt(const Dataset& data, const GbtHyper& hyper, int dim) {
    const int n = static_cast<int>(data.size());
    GbtModel model;
    model.hyper = hyper;
    std::vector<double> raw(n, 0.0), grad(n), hess(n);
    for (int t = 0; t < hyper.trees; ++t) {
        for (int i = 0; i < n; ++i) {
            const double p = 1.0 / (1.0 + std::exp(-raw[i]));
            const double y = data[i].label == Label::talking ? 1.0 : 0.0;
            grad[i] = p - y;
            hess[i] = p * (1.0 - p);
        }
        Tree tree = detail::build_grad_tree(data, grad, hess, dim, hyper);
        for (int i = 0; i < n; ++i) raw[i] += hyper.learning_rate * tree[tree_descend(tree, data[i].features)].value;
        model.trees.push_back(std::move(tree));
    }
    return model;
}

inline double score_gbt(const GbtModel& m, const std::vector<double>& x) {
    double raw = 0.0;
    for (const Tree& t : m.trees) raw += m.hyper.learning_rate * t[tree_descend(t, x)].value;
    return 1.0 / (1.0 + std::exp(-raw));
}

} // namespace talkdet::learn
