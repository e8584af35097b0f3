#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "talkdet/learn/dataset.hpp"

namespace talkdet::learn {

struct KnnModel {
    int k = 5;
    std::vector<std::vector<double>> points;
    std::vector<Label> labels;
};

inline KnnModel train_knn(const Dataset& data, int k) {
    if (k < 1) throw ValidationError("knn: k must be >= 1");
    KnnModel m;
    m.k = k;
    m.points.reserve(data.size());
    m.labels.reserve(data.size());
    for (const LabeledExample& e : data) {
        m.points.push_back(e.features);
        m.labels.push_back(e.label);
    }
    return m;
}

// Fraction of the k nearest neighbours labelled talking. Distance ties
// break on the lower training index, which keeps queries deterministic.
inline double score_knn(const KnnModel& m, const std::vector<double>& x) {
    const int n = static_cast<int>(m.points.size());
    const int k = std::min(m.k, n);
    std::vector<std::pair<double, int>> dist(n);
    for (int i = 0; i < n; ++i) {
        double d2 = 0.0;
        const std::vector<double>& p = m.points[i];
        for (size_t f = 0; f < p.size(); ++f) {
            const double d = p[f] - x[f];
            d2 += d * d;
        }
        dist[i] = {d2, i};
    }
    std::partial_sort(dist.begin(), dist.begin() + k, dist.end());
    int talking = 0;
    for (int i = 0; i < k; ++i) talking += m.labels[dist[i].second] == Label::talking ? 1 : 0;
    return static_cast<double>(talking) / k;
}

} // namespace talkdet::learn
