#pragma once

// Shared fixtures: a deterministic synthetic corpus with a learnable
// per-teller lexical signal, and a scratch-directory helper.

#include <filesystem>
#include <string>
#include <vector>

#include "brigata/corpus.hpp"
#include "brigata/rng.hpp"
#include "brigata/topics.hpp"

// Complete 100-novella corpus. Teller of (day, position) is (day + position)
// mod 10, so every teller narrates once per day. Text mixes a shared
// vocabulary with teller-specific marker words.
inline brigata::Corpus synthetic_corpus(size_t words_per_novella = 420, uint64_t seed = 11) {
    using namespace brigata;
    const auto& roster = NarratorRoster::canonical();
    Rng rng(seed);
    std::vector<std::string> common;
    for (int i = 0; i < 40; ++i) common.push_back("parola" + std::to_string(i));

    Corpus corpus;
    corpus.source_note = "synthetic fixture";
    for (int day = 1; day <= 10; ++day) {
        for (int pos = 1; pos <= 10; ++pos) {
            int t = (day + pos) % 10;
            Novella nov;
            nov.day = day;
            nov.position = pos;
            nov.storyteller = roster.names[t];
            nov.rubric = "Novella " + std::to_string(day) + "." + std::to_string(pos);
            std::string text;
            for (size_t w = 0; w < words_per_novella; ++w) {
                if (!text.empty()) text += ' ';
                if (rng.uniform01() < 0.35) {
                    text += "segno" + std::to_string(t) + "x" + std::to_string(rng.below(8));
                } else {
                    text += common[rng.below(common.size())];
                }
            }
            nov.text = text;
            corpus.novelle.push_back(std::move(nov));
        }
    }
    corpus.complete = validate_corpus(corpus).complete;
    return corpus;
}

// Fresh scratch directory under the system temp root.
inline std::string scratch_dir(const std::string& tag) {
    auto dir = std::filesystem::temp_directory_path() / ("brigata_" + tag);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir.string();
}

// Synthetic LDA corpus with disjoint per-topic vocabularies: doc i draws all
// its tokens from the word block of topic i mod n_topics.
inline std::vector<brigata::LdaDoc> planted_docs(int n_docs, int n_topics, int words_per_topic,
                                                 int doc_len, uint64_t seed) {
    brigata::Rng rng(seed);
    std::vector<brigata::LdaDoc> docs(n_docs);
    const auto& roster = brigata::NarratorRoster::canonical();
    for (int i = 0; i < n_docs; ++i) {
        int topic = i % n_topics;
        docs[i].novella_ref = {1 + i / 10, 1 + i % 10};
        docs[i].storyteller = roster.names[i % 10];
        for (int w = 0; w < doc_len; ++w)
            docs[i].ids.push_back(topic * words_per_topic +
                                  static_cast<int32_t>(rng.below(words_per_topic)));
    }
    return docs;
}

// Greedy cosine matching of learned topic-word distributions against the
// planted blocks; returns the per-planted-topic cosines, best match first.
inline std::vector<double> greedy_topic_match(const brigata::LdaState& st, int n_topics,
                                              int words_per_topic) {
    std::vector<std::vector<double>> phi(st.n_topics, std::vector<double>(st.vocab_size));
    for (int t = 0; t < st.n_topics; ++t) {
        double denom = static_cast<double>(st.n_t[t]) + st.vocab_size * st.beta;
        for (int32_t w = 0; w < st.vocab_size; ++w)
            phi[t][w] = (st.n_tw[t][w] + st.beta) / denom;
    }
    auto cosine_with_block = [&](int t, int p) {
        double dot = 0.0, norm = 0.0;
        for (int32_t w = 0; w < st.vocab_size; ++w) norm += phi[t][w] * phi[t][w];
        for (int w = p * words_per_topic; w < (p + 1) * words_per_topic; ++w)
            dot += phi[t][w];
        // planted distribution is uniform over its block
        return dot / (std::sqrt(norm) * std::sqrt(static_cast<double>(words_per_topic)));
    };
    std::vector<bool> used_t(st.n_topics, false), used_p(n_topics, false);
    std::vector<double> matched;
    for (int round = 0; round < n_topics; ++round) {
        double best = -1.0;
        int bt = -1, bp = -1;
        for (int t = 0; t < st.n_topics; ++t) {
            if (used_t[t]) continue;
            for (int p = 0; p < n_topics; ++p) {
                if (used_p[p]) continue;
                double c = cosine_with_block(t, p);
                if (c > best) {
                    best = c;
                    bt = t;
                    bp = p;
                }
            }
        }
        used_t[bt] = true;
        used_p[bp] = true;
        matched.push_back(best);
    }
    return matched;
}
