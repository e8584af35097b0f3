#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "talkdet/learn/dataset.hpp"

namespace talkdet::learn {

// Decision stump: predicts talking when (x[feature] >= threshold) == (polarity > 0).
struct Stump {
    int feature = 0;
    double threshold = 0.0;
    int polarity = 1;
    double alpha = 0.0;

    int predict_sign(const std::vector<double>& x) const {
        const bool above = x[feature] >= threshold;
        return (above == (polarity > 0)) ? 1 : -1; // +1 = talking
    }
};

struct AdaBoostModel {
    std::vector<Stump> stumps;
    std::vector<double> round_train_error; // 0-1 error of the ensemble after each round
};

namespace detail {

// Best weighted-error stump by a sorted sweep per feature; both polarities
// considered; first-seen candidate wins exact ties.
inline Stump best_stump(const Dataset& data, const std::vector<double>& weights, int dim) {
    const int n = static_cast<int>(data.size());
    Stump best;
    double best_err = 2.0;
    std::vector<int> order(n);
    for (int f = 0; f < dim; ++f) {
        for (int i = 0; i < n; ++i) order[i] = i;
        std::stable_sort(order.begin(), order.end(),
                         [&](int a, int b) { return data[a].features[f] < data[b].features[f]; });
        // err_pos(t) = weighted error of "talking iff x >= t"; sweeping the
        // threshold across sorted values updates it incrementally.
        double err_pos = 0.0;
        for (int i = 0; i < n; ++i) err_pos += data[i].label == Label::talking ? 0.0 : weights[i];
        // threshold below all values: everything >= t
        auto consider = [&](double thr) {
            if (err_pos < best_err) {
                best_err = err_pos;
                best = {f, thr, 1, 0.0};
            }
            if (1.0 - err_pos < best_err) {
                best_err = 1.0 - err_pos;
                best = {f, thr, -1, 0.0};
            }
        };
        for (int i = 0; i < n; ++i) {
            // moving the threshold just above order[i]'s value flips it below
            const int idx = order[i];
            err_pos += data[idx].label == Label::talking ? weights[idx] : -weights[idx];
            const double v0 = data[idx].features[f];
            if (i + 1 < n) {
                const double v1 = data[order[i + 1]].features[f];
                if (!(v0 < v1)) continue;
                consider(0.5 * (v0 + v1));
            }
        }
    }
    return best;
}

} // namespace detail

// Discrete AdaBoost over depth-1 stumps.
inline AdaBoostModel train_adaboost(const Dataset& data, int rounds, int dim) {
    const int n = static_cast<int>(data.size());
    std::vector<double> weights(n, 1.0 / n);
    AdaBoostModel model;
    std::vector<double> margins(n, 0.0);
    constexpr double kEpsFloor = 1e-12;

    for (int t = 0; t < rounds; ++t) {
        Stump stump = detail::best_stump(data, weights, dim);
        double eps = 0.0;
        std::vector<int> signs(n);
        for (int i = 0; i < n; ++i) {
            signs[i] = stump.predict_sign(data[i].features);
            const int truth = data[i].label == Label::talking ? 1 : -1;
            if (signs[i] != truth) eps += weights[i];
        }
        if (eps >= 0.5 - kEpsFloor) break; // no stump beats chance; boosting stalls

        const double eps_c = std::max(eps, kEpsFloor);
        stump.alpha = 0.5 * std::log((1.0 - eps_c) / eps_c);
        model.stumps.push_back(stump);

        int wrong = 0;
        for (int i = 0; i < n; ++i) {
            margins[i] += stump.alpha * signs[i];
            const int truth = data[i].label == Label::talking ? 1 : -1;
            const int pred = margins[i] > 0.0 ? 1 : -1; // zero margin -> not_talking
            if (pred != truth) ++wrong;
        }
        model.round_train_error.push_back(static_cast<double>(wrong) / n);

        if (eps <= kEpsFloor) break; // perfect stump: zero error halts reweighting

        double z = 0.0;
        for (int i = 0; i < n; ++i) {
            const int truth = data[i].label == Label::talking ? 1 : -1;
            weights[i] *= std::exp(-stump.alpha * truth * signs[i]);
            z += weights[i];
        }
        for (double& w : weights) w /= z;
    }
    return model;
}

inline double score_adaboost(const AdaBoostModel& m, const std::vector<double>& x) {
    double margin = 0.0;
    for (const Stump& s : m.stumps) margin += s.alpha * s.predict_sign(x);
    return 1.0 / (1.0 + std::exp(-margin));
}

} // namespace talkdet::learn
