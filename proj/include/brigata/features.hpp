#pragma once

// TF-IDF featurization over a frozen vocabulary: raw term count times
// smoothed idf, L2-normalized. idf[i] = ln((1+N)/(1+df_i)) + 1.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <unordered_map>
#include <utility>
#include <vector>

#include "brigata/textproc.hpp"

namespace brigata {

/// (index, value) pairs sorted by strictly increasing index. Non-empty
/// vectors produced by transform() have unit L2 norm.
struct SparseVector {
    std::vector<std::pair<int32_t, double>> entries;
    int32_t dim = 0;

    double norm() const {
        double s = 0.0;
        for (const auto& [i, v] : entries) s += v * v;
        return std::sqrt(s);
    }
};

struct IdfModel {
    Vocabulary vocab;
    std::vector<double> idf;
    std::vector<int64_t> df;  // chunk-level document frequencies
    int64_t n_docs = 0;
};

inline IdfModel fit_idf(const std::vector<std::vector<Token>>& chunks, const Vocabulary& vocab) {
    if (!vocab.frozen()) throw std::invalid_argument("fit_idf: vocabulary not frozen");
    if (chunks.empty()) throw std::invalid_argument("fit_idf: no chunks");
    IdfModel model;
    model.vocab = vocab;
    model.n_docs = static_cast<int64_t>(chunks.size());
    model.df.assign(vocab.size(), 0);
    std::vector<int64_t> last_seen(vocab.size(), -1);
    for (size_t c = 0; c < chunks.size(); ++c) {
        for (const auto& tok : chunks[c]) {
            int32_t idx = vocab.index_of(tok);
            if (idx < 0) continue;
            if (last_seen[idx] != static_cast<int64_t>(c)) {
                last_seen[idx] = static_cast<int64_t>(c);
                ++model.df[idx];
            }
        }
    }
    model.idf.resize(vocab.size());
    for (size_t i = 0; i < vocab.size(); ++i)
        model.idf[i] = std::log((1.0 + model.n_docs) / (1.0 + model.df[i])) + 1.0;
    return model;
}

/// Counts in-vocabulary tokens, weights by idf and L2-normalizes. A chunk
/// with no in-vocabulary tokens maps to the empty vector.
inline SparseVector transform(const std::vector<Token>& chunk, const IdfModel& model) {
    std::unordered_map<int32_t, int32_t> counts;
    for (const auto& tok : chunk) {
        int32_t idx = model.vocab.index_of(tok);
        if (idx >= 0) ++counts[idx];
    }
    SparseVector vec;
    vec.dim = static_cast<int32_t>(model.vocab.size());
    vec.entries.reserve(counts.size());
    for (const auto& [idx, n] : counts)
        vec.entries.emplace_back(idx, static_cast<double>(n) * model.idf[idx]);
    std::sort(vec.entries.begin(), vec.entries.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    double norm = vec.norm();
    if (norm > 0.0)
        for (auto& [idx, v] : vec.entries) v /= norm;
    return vec;
}

}  // namespace brigata
