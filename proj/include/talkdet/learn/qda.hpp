#pragma once

#include <cmath>
#include <vector>

#include "talkdet/learn/dataset.hpp"

namespace talkdet::learn {

namespace detail {

// In-place Cholesky (lower). Returns log-determinant of the input matrix.
inline double cholesky(std::vector<double>& a, int n) {
    double logdet = 0.0;
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j <= i; ++j) {
            double sum = a[static_cast<size_t>(i) * n + j];
            for (int k = 0; k < j; ++k) sum -= a[static_cast<size_t>(i) * n + k] * a[static_cast<size_t>(j) * n + k];
            if (i == j) {
                if (sum <= 0.0) throw ValidationError("qda: covariance not positive definite");
                a[static_cast<size_t>(i) * n + j] = std::sqrt(sum);
                logdet += 2.0 * std::log(a[static_cast<size_t>(i) * n + j]);
            } else {
                a[static_cast<size_t>(i) * n + j] = sum / a[static_cast<size_t>(j) * n + j];
            }
        }
        for (int j = i + 1; j < n; ++j) a[static_cast<size_t>(i) * n + j] = 0.0;
    }
    return logdet;
}

// Squared Mahalanobis distance via a triangular solve against L.
inline double mahalanobis2(const std::vector<double>& chol, int n, const std::vector<double>& diff) {
    std::vector<double> y(diff);
    for (int i = 0; i < n; ++i) {
        double sum = y[i];
        for (int k = 0; k < i; ++k) sum -= chol[static_cast<size_t>(i) * n + k] * y[k];
        y[i] = sum / chol[static_cast<size_t>(i) * n + i];
    }
    double d2 = 0.0;
    for (int i = 0; i < n; ++i) d2 += y[i] * y[i];
    return d2;
}

} // namespace detail

// Quadratic discriminant analysis: per-class Gaussian with its own
// covariance, regularized by reg * I so rank-deficient sample covariances
// stay invertible. The Cholesky factor is cached after train/load.
struct QdaModel {
    double reg = 1e-6;
    struct ClassStats {
        double prior = 0.0;
        std::vector<double> mean;
        std::vector<double> cov;  // dim x dim, row-major, regularized (serialized)
        std::vector<double> chol; // cached factor of cov
        double logdet = 0.0;
    };
    std::vector<ClassStats> classes; // [not_talking, talking]

    void finalize() {
        const int dim = static_cast<int>(classes.front().mean.size());
        for (ClassStats& cls : classes) {
            cls.chol = cls.cov;
            cls.logdet = detail::cholesky(cls.chol, dim);
        }
    }
};

inline QdaModel train_qda(const Dataset& data, double reg, int dim) {
    QdaModel model;
    model.reg = reg;
    for (Label lab : {Label::not_talking, Label::talking}) {
        std::vector<const LabeledExample*> members;
        for (const LabeledExample& e : data)
            if (e.label == lab) members.push_back(&e);
        QdaModel::ClassStats cls;
        cls.prior = static_cast<double>(members.size()) / data.size();
        cls.mean.assign(dim, 0.0);
        for (const LabeledExample* e : members)
            for (int f = 0; f < dim; ++f) cls.mean[f] += e->features[f];
        for (double& v : cls.mean) v /= members.size();
        cls.cov.assign(static_cast<size_t>(dim) * dim, 0.0);
        for (const LabeledExample* e : members)
            for (int i = 0; i < dim; ++i) {
                const double di = e->features[i] - cls.mean[i];
                for (int j = 0; j <= i; ++j)
                    cls.cov[static_cast<size_t>(i) * dim + j] += di * (e->features[j] - cls.mean[j]);
            }
        for (int i = 0; i < dim; ++i)
            for (int j = 0; j <= i; ++j) {
                double v = cls.cov[static_cast<size_t>(i) * dim + j] / members.size();
                if (i == j) v += reg;
                cls.cov[static_cast<size_t>(i) * dim + j] = v;
                cls.cov[static_cast<size_t>(j) * dim + i] = v;
            }
        model.classes.push_back(std::move(cls));
    }
    model.finalize();
    return model;
}

// Posterior probability of talking from the two class likelihoods.
inline double score_qda(const QdaModel& m, const std::vector<double>& x) {
    const int dim = static_cast<int>(m.classes.front().mean.size());
    double loglik[2];
    for (int c = 0; c < 2; ++c) {
        const QdaModel::ClassStats& cls = m.classes[c];
        std::vector<double> diff(dim);
        for (int f = 0; f < dim; ++f) diff[f] = x[f] - cls.mean[f];
        const double d2 = detail::mahalanobis2(cls.chol, dim, diff);
        loglik[c] = std::log(cls.prior) - 0.5 * cls.logdet - 0.5 * d2;
    }
    // softmax over the two log-likelihoods, stable around the max
    const double mx = std::max(loglik[0], loglik[1]);
    const double e0 = std::exp(loglik[0] - mx), e1 = std::exp(loglik[1] - mx);
    return e1 / (e0 + e1); // index 1 = talking
}

} // namespace talkdet::learn
