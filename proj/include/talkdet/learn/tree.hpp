#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "talkdet/learn/dataset.hpp"

// CART machinery shared by the decision tree, the random forest and the
// gradient-boosted trees: flat node arrays, exhaustive midpoint splits.

namespace talkdet::learn {

struct TreeNode {
    int feature = -1; // -1 marks a leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double value = 0.0; // classification: talking fraction; regression: leaf weight
    int count = 0;

    bool is_leaf() const { return feature < 0; }
};

using Tree = std::vector<TreeNode>;

inline int tree_descend(const Tree& tree, const std::vector<double>& x) {
    int node = 0;
    while (!tree[node].is_leaf()) node = x[tree[node].feature] < tree[node].threshold ? tree[node].left : tree[node].right;
    return node;
}

namespace detail {

inline double gini(double pos, double total) {
    if (total <= 0.0) return 0.0;
    const double p = pos / total;
    return 1.0 - p * p - (1.0 - p) * (1.0 - p);
}

struct GiniSplit {
    bool found = false;
    int feature = -1;
    double threshold = 0.0;
    double gain = 0.0;
};

// Exhaustive Gini search over the given features; thresholds are midpoints
// between consecutive distinct values. First-seen split wins exact ties, so
// iteration order (ascending feature, ascending threshold) is the tie rule.
template <typename FeatureAt, typename LabelAt>
GiniSplit best_gini_split(const std::vector<int>& items, const std::vector<int>& features, FeatureAt feature_at,
                          LabelAt label_at, int min_leaf) {
    const int n = static_cast<int>(items.size());
    double pos_total = 0.0;
    for (int i : items) pos_total += label_at(i) == Label::talking ? 1.0 : 0.0;
    const double parent = gini(pos_total, n);

    GiniSplit best;
    std::vector<int> order;
    for (int f : features) {
        order = items;
        std::stable_sort(order.begin(), order.end(),
                         [&](int a, int b) { return feature_at(a, f) < feature_at(b, f); });
        double pos_left = 0.0;
        for (int i = 0; i + 1 < n; ++i) {
            pos_left += label_at(order[i]) == Label::talking ? 1.0 : 0.0;
            const double v0 = feature_at(order[i], f);
            const double v1 = feature_at(order[i + 1], f);
            if (!(v0 < v1)) continue;
            const int nl = i + 1, nr = n - nl;
            if (nl < min_leaf || nr < min_leaf) continue;
            const double thr = 0.5 * (v0 + v1);
            if (!(v0 < thr && thr <= v1)) continue; // degenerate float midpoint
            const double gain = parent - (nl * gini(pos_left, nl) + nr * gini(pos_total - pos_left, nr)) / n;
            if (gain <= 1e-15) continue;
            if (!best.found || gain > best.gain) best = {true, f, thr, gain};
        }
    }
    return best;
}

} // namespace detail

struct CartParams {
    int max_depth = 8;
    int min_leaf = 5;
    int features_per_node = 0; // 0 = all features
};

// Gini classification tree over dataset rows `items`. When
// features_per_node > 0, each node samples that many features through `rng`
// (random-forest mode).
inline Tree build_gini_tree(const Dataset& data, std::vector<int> items, const CartParams& params, int dim,
                            SplitMix64* rng = nullptr) {
    Tree tree;
    struct Work {
        std::vector<int> items;
        int depth;
        int node;
    };
    auto make_leaf = [&](TreeNode& node, const std::vector<int>& subset) {
        double pos = 0.0;
        for (int i : subset) pos += data[i].label == Label::talking ? 1.0 : 0.0;
        node.feature = -1;
        node.value = subset.empty() ? 0.0 : pos / subset.size();
        node.count = static_cast<int>(subset.size());
    };

    tree.push_back(TreeNode{});
    std::vector<Work> stack;
    stack.push_back({std::move(items), 0, 0});
    std::vector<int> all_features(dim);
    for (int f = 0; f < dim; ++f) all_features[f] = f;

    while (!stack.empty()) {
        Work w = std::move(stack.back());
        stack.pop_back();
        TreeNode& node = tree[w.node];
        node.count = static_cast<int>(w.items.size());

        bool pure = true;
        for (size_t i = 1; i < w.items.size(); ++i)
            if (data[w.items[i]].label != data[w.items[0]].label) {
                pure = false;
                break;
            }
        if (pure || w.depth >= params.max_depth || static_cast<int>(w.items.size()) < 2 * params.min_leaf) {
            make_leaf(node, w.items);
            continue;
        }

        std::vector<int> features;
        if (params.features_per_node > 0 && rng)
            features = rng->choose(dim, params.features_per_node);
        else
            features = all_features;
        std::sort(features.begin(), features.end());

        detail::GiniSplit split = detail::best_gini_split(
            w.items, features, [&](int i, int f) { return data[i].features[f]; },
            [&](int i) { return data[i].label; }, params.min_leaf);
        if (!split.found) {
            make_leaf(node, w.items);
            continue;
        }

        std::vector<int> left, right;
        for (int i : w.items) (data[i].features[split.feature] < split.threshold ? left : right).push_back(i);
        const int left_id = static_cast<int>(tree.size());
        tree.push_back(TreeNode{});
        const int right_id = static_cast<int>(tree.size());
        tree.push_back(TreeNode{});
        TreeNode& parent = tree[w.node]; // re-fetch: pushes may reallocate
        parent.feature = split.feature;
        parent.threshold = split.threshold;
        parent.left = left_id;
        parent.right = right_id;
        // push right first so the left branch is processed next (stable layout)
        stack.push_back({std::move(right), w.depth + 1, right_id});
        stack.push_back({std::move(left), w.depth + 1, left_id});
    }
    return tree;
}

} // namespace talkdet::learn
