#pragma once

// Collapsed-Gibbs LDA over 200-word stopword-filtered documents, Minka
// fixed-point alpha optimization, and aggregation of document-topic
// distributions into storyteller / gender / novella profile matrices.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "brigata/corpus.hpp"
#include "brigata/rng.hpp"
#include "brigata/textproc.hpp"

namespace brigata {

struct LdaDoc {
    std::vector<int32_t> ids;  // vocabulary indices
    std::pair<int, int> novella_ref{0, 0};
    std::string storyteller;
};

struct LdaCorpus {
    Vocabulary vocab;  // built over the stopword-filtered text
    std::vector<LdaDoc> docs;
};

/// Per novella: tokenize, drop stopwords, then cut into doc_size-token
/// documents; a trailing fragment shorter than min_len is discarded.
inline LdaCorpus build_lda_docs(const Corpus& corpus, const Stoplist& stoplist,
                                size_t doc_size = 200, size_t min_len = 20) {
    std::vector<std::vector<Token>> filtered(corpus.novelle.size());
    for (size_t i = 0; i < corpus.novelle.size(); ++i)
        filtered[i] = remove_stopwords(tokenize(corpus.novelle[i].text), stoplist);

    LdaCorpus out;
    out.vocab = Vocabulary::build(filtered);
    for (size_t i = 0; i < corpus.novelle.size(); ++i) {
        const auto& nov = corpus.novelle[i];
        for (auto& piece : chunk_tokens(filtered[i], doc_size, min_len)) {
            LdaDoc doc;
            doc.novella_ref = {nov.day, nov.position};
            doc.storyteller = nov.storyteller;
            doc.ids.reserve(piece.size());
            for (const auto& tok : piece) doc.ids.push_back(out.vocab.index_of(tok));
            out.docs.push_back(std::move(doc));
        }
    }
    return out;
}

struct LdaState {
    int n_topics = 0;
    int32_t vocab_size = 0;
    std::vector<std::vector<int32_t>> docs;  // token ids
    std::vector<std::vector<int32_t>> z;     // per-token topic assignment
    std::vector<std::vector<int64_t>> n_dt;  // D x K
    std::vector<std::vector<int64_t>> n_tw;  // K x V
    std::vector<int64_t> n_t;                // K
    std::vector<double> alpha;               // K, asymmetric after optimization
    double beta = 0.01;
    Rng rng{0};
    uint64_t seed = 0;
    int64_t iteration = 0;
    bool debug_checks = false;

    void validate_counts() const {
        std::vector<int64_t> dt(n_topics, 0), tw(n_topics, 0);
        for (size_t d = 0; d < docs.size(); ++d) {
            std::vector<int64_t> row(n_topics, 0);
            for (int32_t t : z[d]) ++row[t];
            for (int t = 0; t < n_topics; ++t) {
                if (row[t] != n_dt[d][t])
                    throw std::logic_error("LdaState: doc-topic counts inconsistent at doc " +
                                           std::to_string(d));
                dt[t] += row[t];
            }
        }
        for (int t = 0; t < n_topics; ++t) {
            int64_t sum = 0;
            for (int32_t w = 0; w < vocab_size; ++w) sum += n_tw[t][w];
            if (sum != n_t[t] || dt[t] != n_t[t])
                throw std::logic_error("LdaState: topic totals inconsistent at topic " +
                                       std::to_string(t));
        }
        for (const auto& a : alpha)
            if (!(a > 0.0)) throw std::logic_error("LdaState: non-positive alpha");
        if (!(beta > 0.0)) throw std::logic_error("LdaState: non-positive beta");
    }
};

inline LdaState init_state(const std::vector<LdaDoc>& docs, int32_t vocab_size, int n_topics = 20,
                           double alpha0 = 5.0, double beta0 = 0.01, uint64_t seed = 0) {
    if (docs.empty()) throw std::invalid_argument("init_state: empty document list");
    if (n_topics < 1) throw std::invalid_argument("init_state: need at least one topic");
    if (vocab_size < 1) throw std::invalid_argument("init_state: empty vocabulary");

    LdaState st;
    st.n_topics = n_topics;
    st.vocab_size = vocab_size;
    st.alpha.assign(n_topics, alpha0 / n_topics);
    st.beta = beta0;
    st.seed = seed;
    st.rng = Rng(seed);
    st.docs.resize(docs.size());
    st.z.resize(docs.size());
    st.n_dt.assign(docs.size(), std::vector<int64_t>(n_topics, 0));
    st.n_tw.assign(n_topics, std::vector<int64_t>(vocab_size, 0));
    st.n_t.assign(n_topics, 0);
    for (size_t d = 0; d < docs.size(); ++d) {
        st.docs[d] = docs[d].ids;
        st.z[d].resize(docs[d].ids.size());
        for (size_t pos = 0; pos < docs[d].ids.size(); ++pos) {
            int32_t w = docs[d].ids[pos];
            if (w < 0 || w >= vocab_size)
                throw std::invalid_argument("init_state: token id out of range");
            auto t = static_cast<int32_t>(st.rng.below(static_cast<uint64_t>(n_topics)));
            st.z[d][pos] = t;
            ++st.n_dt[d][t];
            ++st.n_tw[t][w];
            ++st.n_t[t];
        }
    }
    return st;
}

/// One full pass: every token (doc order, position order) is resampled from
/// the collapsed conditional p(t) ∝ (N_dt+alpha_t)(N_tw+beta)/(N_t+V*beta)
/// with its own assignment removed.
inline void gibbs_sweep(LdaState& st) {
    const double vb = static_cast<double>(st.vocab_size) * st.beta;
    std::vector<double> cum(st.n_topics);
    for (size_t d = 0; d < st.docs.size(); ++d) {
        auto& dt = st.n_dt[d];
        for (size_t pos = 0; pos < st.docs[d].size(); ++pos) {
            const int32_t w = st.docs[d][pos];
            const int32_t old = st.z[d][pos];
            --dt[old];
            --st.n_tw[old][w];
            --st.n_t[old];
            double total = 0.0;
            for (int t = 0; t < st.n_topics; ++t) {
                total += (dt[t] + st.alpha[t]) * (st.n_tw[t][w] + st.beta) / (st.n_t[t] + vb);
                cum[t] = total;
            }
            double u = st.rng.uniform01() * total;
            int picked = st.n_topics - 1;
            for (int t = 0; t < st.n_topics; ++t)
                if (u < cum[t]) {
                    picked = t;
                    break;
                }
            st.z[d][pos] = picked;
            ++dt[picked];
            ++st.n_tw[picked][w];
            ++st.n_t[picked];
        }
    }
    ++st.iteration;
    if (st.debug_checks) st.validate_counts();
}

namespace detail {

// Digamma via the recurrence psi(x) = psi(x+1) - 1/x below 6, then the
// asymptotic series.
inline double digamma(double x) {
    double result = 0.0;
    while (x < 6.0) {
        result -= 1.0 / x;
        x += 1.0;
    }
    double inv = 1.0 / x, inv2 = inv * inv;
    result += std::log(x) - 0.5 * inv -
              inv2 * (1.0 / 12.0 -
                      inv2 * (1.0 / 120.0 -
                              inv2 * (1.0 / 252.0 - inv2 * (1.0 / 240.0 - inv2 / 132.0))));
    return result;
}

}  // namespace detail

/// Minka's fixed-point update for an asymmetric alpha, run to a relative
/// change below 1e-5 (or 1000 rounds); every component is floored at 1e-8 so
/// the Dirichlet never collapses.
inline void optimize_alpha(LdaState& st) {
    constexpr double kFloor = 1e-8;
    constexpr double kRelTol = 1e-5;
    constexpr int kMaxRounds = 1000;
    const size_t n_docs = st.docs.size();
    std::vector<double> doc_len(n_docs);
    for (size_t d = 0; d < n_docs; ++d) doc_len[d] = static_cast<double>(st.docs[d].size());

    for (int round = 0; round < kMaxRounds; ++round) {
        double alpha_sum = 0.0;
        for (double a : st.alpha) alpha_sum += a;
        double denom = 0.0;
        for (size_t d = 0; d < n_docs; ++d)
            denom += detail::digamma(doc_len[d] + alpha_sum) - detail::digamma(alpha_sum);
        double max_rel = 0.0;
        for (int t = 0; t < st.n_topics; ++t) {
            double num = 0.0;
            for (size_t d = 0; d < n_docs; ++d)
                num += detail::digamma(st.n_dt[d][t] + st.alpha[t]) - detail::digamma(st.alpha[t]);
            double updated = denom > 0.0 ? st.alpha[t] * num / denom : st.alpha[t];
            updated = std::max(updated, kFloor);
            max_rel = std::max(max_rel, std::abs(updated - st.alpha[t]) / st.alpha[t]);
            st.alpha[t] = updated;
        }
        if (max_rel < kRelTol) break;
    }
}

struct LdaConfig {
    int n_topics = 20;
    int iters = 1000;
    int burnin = 200;
    int optimize_every = 50;
    double alpha0 = 5.0;  // total prior mass, split evenly at init
    double beta0 = 0.01;
    uint64_t seed = 0;
    bool optimize_hyper = true;
    bool debug_checks = false;
};

/// init_state then `iters` sweeps; alpha is re-optimized every
/// optimize_every sweeps once past the burn-in. Deterministic given the seed.
inline LdaState train_lda(const std::vector<LdaDoc>& docs, int32_t vocab_size,
                          const LdaConfig& config) {
    LdaState st = init_state(docs, vocab_size, config.n_topics, config.alpha0, config.beta0,
                             config.seed);
    st.debug_checks = config.debug_checks;
    for (int sweep = 1; sweep <= config.iters; ++sweep) {
        gibbs_sweep(st);
        if (config.optimize_hyper && config.optimize_every > 0 && sweep > config.burnin &&
            (sweep - config.burnin) % config.optimize_every == 0)
            optimize_alpha(st);
    }
    return st;
}

inline LdaState train_lda(const LdaCorpus& corpus, const LdaConfig& config) {
    return train_lda(corpus.docs, static_cast<int32_t>(corpus.vocab.size()), config);
}

/// Top n tokens of topic t by phi_hat[t,w] = (N_tw+beta)/(N_t+V*beta); ties
/// broken lexicographically.
inline std::vector<std::pair<std::string, double>> topic_top_words(const LdaState& st,
                                                                   const Vocabulary& vocab,
                                                                   int topic, size_t n = 10) {
    if (topic < 0 || topic >= st.n_topics)
        throw std::invalid_argument("topic_top_words: topic index out of range");
    if (static_cast<size_t>(st.vocab_size) != vocab.size())
        throw std::invalid_argument("topic_top_words: vocabulary size mismatch");
    const double denom = st.n_t[topic] + static_cast<double>(st.vocab_size) * st.beta;
    std::vector<std::pair<std::string, double>> all(vocab.size());
    for (int32_t w = 0; w < st.vocab_size; ++w)
        all[w] = {vocab.token(w), (st.n_tw[topic][w] + st.beta) / denom};
    std::sort(all.begin(), all.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    all.resize(std::min(n, all.size()));
    return all;
}

/// theta_t = (N_dt + alpha_t) / (|doc| + sum(alpha)).
inline std::vector<double> doc_topic(const LdaState& st, size_t d) {
    if (d >= st.docs.size()) throw std::invalid_argument("doc_topic: document index out of range");
    double alpha_sum = 0.0;
    for (double a : st.alpha) alpha_sum += a;
    double denom = static_cast<double>(st.docs[d].size()) + alpha_sum;
    std::vector<double> theta(st.n_topics);
    for (int t = 0; t < st.n_topics; ++t)
        theta[t] = (st.n_dt[d][t] + st.alpha[t]) / denom;
    return theta;
}

struct ProfileMatrix {
    std::vector<std::string> rows;
    std::vector<int> topic_ids;
    std::vector<std::string> topic_labels;
    std::vector<std::vector<double>> values;  // rows x topic_ids
    bool normalized = false;
};

enum class Grouping { by_storyteller, by_gender };

namespace detail {

inline std::vector<double> weighted_mean_theta(const LdaState& st,
                                               const std::vector<size_t>& members) {
    std::vector<double> acc(st.n_topics, 0.0);
    double weight = 0.0;
    for (size_t d : members) {
        double len = static_cast<double>(st.docs[d].size());
        auto theta = doc_topic(st, d);
        for (int t = 0; t < st.n_topics; ++t) acc[t] += len * theta[t];
        weight += len;
    }
    for (double& v : acc) v /= weight;
    return acc;
}

inline void check_retained(const std::vector<int>& retained, int n_topics) {
    for (int t : retained)
        if (t < 0 || t >= n_topics)
            throw std::invalid_argument("retained topic id " + std::to_string(t) +
                                        " out of range");
}

}  // namespace detail

/// Group value for topic t = token-length-weighted mean of doc theta_t over
/// the group's documents. Storyteller rows follow roster order (unknown
/// names, if any, appended in first-appearance order); gender rows are
/// women then men.
inline ProfileMatrix group_profile(const LdaState& st, const std::vector<LdaDoc>& docs,
                                   Grouping grouping, const NarratorRoster& roster,
                                   const std::vector<int>& retained) {
    if (docs.size() != st.docs.size())
        throw std::invalid_argument("group_profile: docs do not match state");
    detail::check_retained(retained, st.n_topics);

    std::vector<std::string> groups;
    std::vector<std::vector<size_t>> members;
    auto slot_for = [&](const std::string& label) {
        for (size_t g = 0; g < groups.size(); ++g)
            if (groups[g] == label) return g;
        groups.push_back(label);
        members.emplace_back();
        return groups.size() - 1;
    };

    if (grouping == Grouping::by_storyteller) {
        for (const auto& name : roster.names)
            for (const auto& doc : docs)
                if (doc.storyteller == name) {
                    slot_for(name);
                    break;
                }
        for (size_t d = 0; d < docs.size(); ++d) members[slot_for(docs[d].storyteller)].push_back(d);
    } else {
        slot_for("women");
        slot_for("men");
        for (size_t d = 0; d < docs.size(); ++d) {
            auto it = roster.gender.find(docs[d].storyteller);
            if (it == roster.gender.end())
                throw std::invalid_argument("group_profile: unknown gender for storyteller '" +
                                            docs[d].storyteller + "'");
            members[it->second == Gender::woman ? 0 : 1].push_back(d);
        }
    }
    for (size_t g = 0; g < groups.size(); ++g)
        if (members[g].empty())
            throw std::invalid_argument("group_profile: group '" + groups[g] +
                                        "' has no documents");

    ProfileMatrix m;
    m.rows = groups;
    m.topic_ids = retained;
    for (int t : retained) m.topic_labels.push_back("topic_" + std::to_string(t));
    m.values.resize(groups.size());
    for (size_t g = 0; g < groups.size(); ++g) {
        auto mean = detail::weighted_mean_theta(st, members[g]);
        m.values[g].reserve(retained.size());
        for (int t : retained) m.values[g].push_back(mean[t]);
    }
    return m;
}

/// One row per novella ("day.position", corpus order by day then position),
/// same weighted-mean aggregation as group_profile.
inline ProfileMatrix novella_profile(const LdaState& st, const std::vector<LdaDoc>& docs,
                                     const std::vector<int>& retained) {
    if (docs.size() != st.docs.size())
        throw std::invalid_argument("novella_profile: docs do not match state");
    detail::check_retained(retained, st.n_topics);
    std::map<std::pair<int, int>, std::vector<size_t>> members;
    for (size_t d = 0; d < docs.size(); ++d) members[docs[d].novella_ref].push_back(d);

    ProfileMatrix m;
    m.topic_ids = retained;
    for (int t : retained) m.topic_labels.push_back("topic_" + std::to_string(t));
    for (const auto& [ref, docs_of] : members) {
        m.rows.push_back(std::to_string(ref.first) + "." + std::to_string(ref.second));
        auto mean = detail::weighted_mean_theta(st, docs_of);
        std::vector<double> row;
        row.reserve(retained.size());
        for (int t : retained) row.push_back(mean[t]);
        m.values.push_back(std::move(row));
    }
    return m;
}

/// Min-max per column; a constant column maps to all zeros.
inline ProfileMatrix normalize_columns(const ProfileMatrix& m) {
    ProfileMatrix out = m;
    out.normalized = true;
    if (m.values.empty()) return out;
    for (size_t j = 0; j < m.topic_ids.size(); ++j) {
        double lo = m.values[0][j], hi = m.values[0][j];
        for (const auto& row : m.values) {
            lo = std::min(lo, row[j]);
            hi = std::max(hi, row[j]);
        }
        for (size_t i = 0; i < m.values.size(); ++i)
            out.values[i][j] = hi > lo ? (m.values[i][j] - lo) / (hi - lo) : 0.0;
    }
    return out;
}

/// Human-assigned topic labels: JSON {"retained": [{"id": int, "label": str}]}.
/// Topics absent from the list are dropped from the profile figures.
struct TopicLabels {
    std::vector<int> ids;
    std::vector<std::string> labels;  // parallel to ids

    static TopicLabels from_json(std::string_view text) {
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(text);
        } catch (const nlohmann::json::parse_error& e) {
            throw std::runtime_error(std::string("topic label config: ") + e.what());
        }
        if (!j.is_object() || !j.contains("retained") || !j["retained"].is_array())
            throw std::runtime_error("topic label config: expected {\"retained\": [...]}");
        TopicLabels out;
        for (const auto& item : j["retained"]) {
            if (!item.is_object() || !item.contains("id") || !item["id"].is_number_integer() ||
                !item.contains("label") || !item["label"].is_string())
                throw std::runtime_error(
                    "topic label config: each entry needs integer 'id' and string 'label'");
            out.ids.push_back(item["id"].get<int>());
            out.labels.push_back(item["label"].get<std::string>());
        }
        return out;
    }

    static TopicLabels load_file(const std::string& path) {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw std::runtime_error("cannot open topic label config: " + path);
        std::ostringstream buf;
        buf << in.rdbuf();
        return from_json(buf.str());
    }

    static TopicLabels all(int n_topics) {
        TopicLabels out;
        for (int t = 0; t < n_topics; ++t) {
            out.ids.push_back(t);
            out.labels.push_back("topic_" + std::to_string(t));
        }
        return out;
    }
};

inline void apply_topic_labels(ProfileMatrix& m, const TopicLabels& labels) {
    std::unordered_map<int, std::string> by_id;
    for (size_t i = 0; i < labels.ids.size(); ++i) by_id[labels.ids[i]] = labels.labels[i];
    for (size_t j = 0; j < m.topic_ids.size(); ++j) {
        auto it = by_id.find(m.topic_ids[j]);
        if (it != by_id.end()) m.topic_labels[j] = it->second;
    }
}

}  // namespace brigata
