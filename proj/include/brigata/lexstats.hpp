#pragma once

// PMI lexical profiles: per-narrator token counts over novella text and
// PMI(w;n) = log p(w|n)/p(w) tables with top/bottom extraction.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "brigata/corpus.hpp"
#include "brigata/textproc.hpp"

namespace brigata {

struct NarratorCounts {
    std::vector<std::string> narrators;  // roster order first, then first appearance
    std::vector<std::unordered_map<std::string, int64_t>> counts;  // parallel to narrators
    std::vector<int64_t> totals;                                   // parallel to narrators
    std::unordered_map<std::string, int64_t> corpus_counts;
    int64_t corpus_total = 0;

    int index_of(const std::string& narrator) const {
        for (size_t i = 0; i < narrators.size(); ++i)
            if (narrators[i] == narrator) return static_cast<int>(i);
        return -1;
    }
};

/// Token counts over novella text only; frame passages never count toward any
/// narrator or the corpus totals.
inline NarratorCounts count_by_narrator(const Corpus& corpus) {
    NarratorCounts nc;
    const auto& roster = NarratorRoster::canonical();
    std::unordered_map<std::string, int> slot;
    for (const auto& nov : corpus.novelle) {
        if (slot.count(nov.storyteller)) continue;
        if (roster.index_of(nov.storyteller) >= 0) slot.emplace(nov.storyteller, -1);
    }
    for (const auto& name : roster.names)
        if (slot.count(name)) {
            slot[name] = static_cast<int>(nc.narrators.size());
            nc.narrators.push_back(name);
        }
    for (const auto& nov : corpus.novelle)
        if (!slot.count(nov.storyteller)) {
            slot.emplace(nov.storyteller, static_cast<int>(nc.narrators.size()));
            nc.narrators.push_back(nov.storyteller);
        }

    nc.counts.resize(nc.narrators.size());
    nc.totals.assign(nc.narrators.size(), 0);
    for (const auto& nov : corpus.novelle) {
        int n = slot.at(nov.storyteller);
        for (const auto& tok : tokenize(nov.text)) {
            ++nc.counts[n][tok];
            ++nc.totals[n];
            ++nc.corpus_counts[tok];
            ++nc.corpus_total;
        }
    }
    return nc;
}

struct PmiEntry {
    std::string token;
    double score = 0.0;
    int64_t count = 0;  // occurrences in this narrator's novelle
};

struct PmiParams {
    int64_t min_count = 5;
    std::string stoplist_id;
    double log_base = 0.0;  // 0 = natural log
};

struct PmiTable {
    std::vector<std::string> narrators;
    std::vector<std::vector<PmiEntry>> entries;  // per narrator, score desc, token asc on ties
    PmiParams params;
};

/// PMI(w;n) = log(p(w|n)/p(w)) with p(w|n) = count_n(w)/total_n and p(w) =
/// corpus_count(w)/corpus_total, both taken over the unfiltered counts. The
/// stoplist and the per-narrator min_count only prune the output lists.
/// Tokens a narrator never uses are omitted (their PMI diverges).
inline PmiTable pmi(const NarratorCounts& counts, int64_t min_count = 5,
                    const Stoplist& stoplist = {}, double log_base = 0.0) {
    if (counts.narrators.empty() || counts.corpus_total == 0)
        throw std::invalid_argument("pmi: empty narrator counts");
    double denom = log_base == 0.0 ? 1.0 : std::log(log_base);
    if (!(denom > 0.0) && log_base != 0.0)
        throw std::invalid_argument("pmi: log base must be > 1");

    PmiTable table;
    table.narrators = counts.narrators;
    table.params = {min_count, stoplist.provenance, log_base};
    table.entries.resize(counts.narrators.size());
    for (size_t n = 0; n < counts.narrators.size(); ++n) {
        auto& list = table.entries[n];
        double total_n = static_cast<double>(counts.totals[n]);
        for (const auto& [tok, cnt] : counts.counts[n]) {
            if (cnt < min_count || cnt == 0) continue;
            if (stoplist.contains(tok)) continue;
            double p_wn = static_cast<double>(cnt) / total_n;
            double p_w = static_cast<double>(counts.corpus_counts.at(tok)) /
                         static_cast<double>(counts.corpus_total);
            list.push_back({tok, std::log(p_wn / p_w) / denom, cnt});
        }
        std::sort(list.begin(), list.end(), [](const PmiEntry& a, const PmiEntry& b) {
            if (a.score != b.score) return a.score > b.score;
            return a.token < b.token;
        });
    }
    return table;
}

struct PmiExtremes {
    std::vector<std::string> narrators;
    std::vector<std::vector<PmiEntry>> top;     // score descending
    std::vector<std::vector<PmiEntry>> bottom;  // score ascending
    int k = 0;
};

inline PmiExtremes top_bottom(const PmiTable& table, int k = 5) {
    if (k <= 0) throw std::invalid_argument("top_bottom: k must be positive");
    PmiExtremes ex;
    ex.narrators = table.narrators;
    ex.k = k;
    ex.top.resize(table.narrators.size());
    ex.bottom.resize(table.narrators.size());
    for (size_t n = 0; n < table.narrators.size(); ++n) {
        const auto& list = table.entries[n];
        if (list.size() < static_cast<size_t>(k))
            throw std::invalid_argument("top_bottom: narrator '" + table.narrators[n] +
                                        "' has only " + std::to_string(list.size()) +
                                        " eligible tokens, need " + std::to_string(k));
        ex.top[n].assign(list.begin(), list.begin() + k);
        auto asc = list;
        std::sort(asc.begin(), asc.end(), [](const PmiEntry& a, const PmiEntry& b) {
            if (a.score != b.score) return a.score < b.score;
            return a.token < b.token;
        });
        ex.bottom[n].assign(asc.begin(), asc.begin() + k);
    }
    return ex;
}

}  // namespace brigata
