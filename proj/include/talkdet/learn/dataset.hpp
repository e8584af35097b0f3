#pragma once

#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "talkdet/error.hpp"

namespace talkdet::learn {

enum class Label { not_talking = 0, talking = 1 };

inline std::string to_string(Label l) { return l == Label::talking ? "talking" : "not_talking"; }

inline Label label_from_string(const std::string& s) {
    if (s == "talking") return Label::talking;
    if (s == "not_talking") return Label::not_talking;
    throw ParseError("unknown label '" + s + "'");
}

struct LabeledExample {
    std::vector<double> features;
    Label label = Label::not_talking;
    std::string clip_ref;
};

using Dataset = std::vector<LabeledExample>;

inline int dataset_dim(const Dataset& data) {
    if (data.empty()) throw ValidationError("dataset is empty");
    const size_t dim = data.front().features.size();
    for (size_t i = 1; i < data.size(); ++i)
        if (data[i].features.size() != dim)
            throw DimensionError("dataset feature length mismatch at example " + std::to_string(i));
    return static_cast<int>(dim);
}

inline void require_both_classes(const Dataset& data) {
    bool pos = false, neg = false;
    for (const LabeledExample& e : data) (e.label == Label::talking ? pos : neg) = true;
    if (!pos || !neg) throw ValidationError("training requires both classes present");
}

// FNV-1a over the raw feature bits and labels; stable dataset identity for
// train_meta provenance.
inline std::string dataset_fingerprint(const Dataset& data) {
    uint64_t h = 1469598103934665603ull;
    auto mix = [&h](const void* p, size_t n) {
        const unsigned char* b = static_cast<const unsigned char*>(p);
        for (size_t i = 0; i < n; ++i) {
            h ^= b[i];
            h *= 1099511628211ull;
        }
    };
    for (const LabeledExample& e : data) {
        for (double v : e.features) mix(&v, sizeof(v));
        const int lab = static_cast<int>(e.label);
        mix(&lab, sizeof(lab));
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

// JSON-lines: {"features": [...], "label": "talking", "clip_ref": "..."}
inline Dataset load_dataset(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open dataset " + path);
    Dataset out;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw ParseError("malformed dataset line " + std::to_string(line_no) + ": " + e.what());
        }
        if (j.contains("meta")) continue;
        LabeledExample ex;
        try {
            ex.features = j.at("features").get<std::vector<double>>();
            ex.label = label_from_string(j.at("label").get<std::string>());
            ex.clip_ref = j.value("clip_ref", "");
        } catch (const nlohmann::json::exception& e) {
            throw ParseError("bad dataset record at line " + std::to_string(line_no) + ": " + e.what());
        }
        out.push_back(std::move(ex));
    }
    return out;
}

inline void save_dataset(const Dataset& data, const std::string& path, const nlohmann::json& meta = {}) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write dataset " + path);
    if (!meta.is_null() && !meta.empty()) out << nlohmann::json{{"meta", meta}}.dump() << "\n";
    for (const LabeledExample& e : data) {
        nlohmann::json j{{"features", e.features}, {"label", to_string(e.label)}, {"clip_ref", e.clip_ref}};
        out << j.dump() << "\n";
    }
}

// SplitMix64: tiny, fully specified generator so training is bit-identical
// across platforms (std:: distributions are not).
struct SplitMix64 {
    uint64_t state;

    explicit SplitMix64(uint64_t seed) : state(seed) {}

    uint64_t next() {
        uint64_t z = (state += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    // unbiased-enough bounded draw for test/train purposes
    uint64_t below(uint64_t bound) { return next() % bound; }

    double uniform01() { return (next() >> 11) * 0x1.0p-53; }

    // first k elements of a Fisher-Yates partial shuffle of 0..n-1
    std::vector<int> choose(int n, int k) {
        std::vector<int> idx(n);
        for (int i = 0; i < n; ++i) idx[i] = i;
        k = std::min(k, n);
        for (int i = 0; i < k; ++i) {
            int j = i + static_cast<int>(below(static_cast<uint64_t>(n - i)));
            std::swap(idx[i], idx[j]);
        }
        idx.resize(k);
        return idx;
    }
};

} // namespace talkdet::learn
