#pragma once

// Tokenization, stopword filtering, fixed-size chunking and vocabulary
// construction shared by the classifier, the PMI profiler and the topic
// model. All functions are pure; Vocabulary is immutable once built.

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "brigata/unicode.hpp"

namespace brigata {

using Token = std::string;

// Lowercases (Latin case folding), splits on Unicode whitespace and strips
// leading/trailing punctuation from each piece. Interior apostrophes survive,
// so elision forms like nell'animo stay single tokens. U+2019 is folded to
// the ASCII apostrophe so the same elision compares equal across editions.
inline std::vector<Token> tokenize(std::string_view text) {
    std::vector<Token> out;
    std::vector<uint32_t> piece;
    auto flush = [&] {
        if (piece.empty()) return;
        size_t lo = 0, hi = piece.size();
        while (lo < hi && is_punct_cp(piece[lo])) ++lo;
        while (hi > lo && is_punct_cp(piece[hi - 1])) --hi;
        if (hi > lo) out.push_back(from_codepoints(piece.data() + lo, hi - lo));
        piece.clear();
    };
    size_t i = 0;
    while (i < text.size()) {
        uint32_t cp = decode_utf8(text, i);
        if (cp == 0x2019) cp = '\'';
        if (is_space_cp(cp)) {
            flush();
        } else {
            piece.push_back(lower_cp(cp));
        }
    }
    flush();
    return out;
}

// Consecutive non-overlapping windows of exactly chunk_size tokens; the
// trailing partial window is kept iff it has at least min_final tokens.
inline std::vector<std::vector<Token>> chunk_tokens(const std::vector<Token>& tokens,
                                                    size_t chunk_size, size_t min_final) {
    if (chunk_size == 0) throw std::invalid_argument("chunk_tokens: chunk_size must be >= 1");
    if (min_final > chunk_size)
        throw std::invalid_argument("chunk_tokens: min_final must be <= chunk_size");
    std::vector<std::vector<Token>> chunks;
    size_t pos = 0;
    while (pos + chunk_size <= tokens.size()) {
        chunks.emplace_back(tokens.begin() + pos, tokens.begin() + pos + chunk_size);
        pos += chunk_size;
    }
    size_t tail = tokens.size() - pos;
    if (tail > 0 && tail >= min_final)
        chunks.emplace_back(tokens.begin() + pos, tokens.end());
    return chunks;
}

/// Token -> (dense index, corpus frequency) map, frozen at construction.
/// Indices are assigned by descending frequency with lexicographic tie-break,
/// so index 0 is always the corpus's most frequent token.
class Vocabulary {
public:
    Vocabulary() = default;

    static Vocabulary build(const std::vector<std::vector<Token>>& streams) {
        std::unordered_map<std::string, int64_t> counts;
        for (const auto& stream : streams)
            for (const auto& tok : stream) ++counts[tok];
        return from_counts(std::move(counts));
    }

    static Vocabulary from_counts(std::unordered_map<std::string, int64_t> counts) {
        if (counts.empty())
            throw std::invalid_argument("Vocabulary::build: all token streams are empty");
        std::vector<std::pair<std::string, int64_t>> entries(
            std::make_move_iterator(counts.begin()), std::make_move_iterator(counts.end()));
        std::sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) {
            if (a.second != b.second) return a.second > b.second;
            return a.first < b.first;
        });
        Vocabulary v;
        v.tokens_.reserve(entries.size());
        v.freq_.reserve(entries.size());
        for (auto& [tok, n] : entries) {
            v.index_.emplace(tok, static_cast<int32_t>(v.tokens_.size()));
            v.tokens_.push_back(std::move(tok));
            v.freq_.push_back(n);
        }
        v.frozen_ = true;
        return v;
    }

    // The k most frequent entries as a vocabulary of their own (indices and
    // relative order preserved). Used for the top-100 feature space.
    Vocabulary prefix(size_t k) const {
        if (k > size()) throw std::invalid_argument("Vocabulary::prefix: k exceeds size");
        Vocabulary v;
        v.tokens_.assign(tokens_.begin(), tokens_.begin() + k);
        v.freq_.assign(freq_.begin(), freq_.begin() + k);
        for (size_t i = 0; i < k; ++i) v.index_.emplace(v.tokens_[i], static_cast<int32_t>(i));
        v.frozen_ = true;
        return v;
    }

    bool frozen() const { return frozen_; }
    size_t size() const { return tokens_.size(); }

    // -1 when the token is unknown.
    int32_t index_of(const std::string& token) const {
        auto it = index_.find(token);
        return it == index_.end() ? -1 : it->second;
    }

    const std::string& token(size_t index) const { return tokens_.at(index); }
    int64_t frequency(size_t index) const { return freq_.at(index); }

private:
    std::unordered_map<std::string, int32_t> index_;
    std::vector<std::string> tokens_;
    std::vector<int64_t> freq_;
    bool frozen_ = false;
};

inline Vocabulary build_vocabulary(const std::vector<std::vector<Token>>& streams) {
    return Vocabulary::build(streams);
}

// Order-preserving subsequence of tokens whose vocabulary index is < k.
inline std::vector<Token> restrict_to_top_k(const std::vector<Token>& tokens,
                                            const Vocabulary& vocab, size_t k) {
    if (!vocab.frozen()) throw std::invalid_argument("restrict_to_top_k: vocabulary not frozen");
    if (k == 0 || k > vocab.size())
        throw std::invalid_argument("restrict_to_top_k: k must be in [1, V]");
    std::vector<Token> out;
    for (const auto& tok : tokens) {
        int32_t idx = vocab.index_of(tok);
        if (idx >= 0 && static_cast<size_t>(idx) < k) out.push_back(tok);
    }
    return out;
}

struct Stoplist {
    std::unordered_set<std::string> words;
    std::string provenance;

    bool contains(const std::string& token) const { return words.count(token) > 0; }

    // One token per line, UTF-8, '#' starts a comment line. Entries are
    // lowercased on load.
    static Stoplist parse(std::string_view text, std::string provenance) {
        Stoplist s;
        s.provenance = std::move(provenance);
        std::istringstream in{std::string(text)};
        std::string line;
        while (std::getline(in, line)) {
            std::string trimmed = normalize_whitespace(line);
            if (trimmed.empty() || trimmed[0] == '#') continue;
            auto cps = to_codepoints(trimmed);
            for (auto& cp : cps) cp = lower_cp(cp);
            s.words.insert(from_codepoints(cps.data(), cps.size()));
        }
        return s;
    }

    static Stoplist load_file(const std::string& path) {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw std::runtime_error("cannot open stoplist file: " + path);
        std::ostringstream buf;
        buf << in.rdbuf();
        return parse(buf.str(), path);
    }
};

inline std::vector<Token> remove_stopwords(const std::vector<Token>& tokens,
                                           const Stoplist& stoplist) {
    std::vector<Token> out;
    out.reserve(tokens.size());
    for (const auto& tok : tokens)
        if (!stoplist.contains(tok)) out.push_back(tok);
    return out;
}

namespace detail {

// The stopword list used for the PMI tables, verbatim.
inline constexpr std::string_view kPmiStopwords[] = {
    "è", "che", "la", "quale", "e", "di", "fu", "le", "per", "col", "aveva",
    "avere", "ha", "il", "lo", "gli", "i", "de", "in", "ciò", "ho",
};

// Italian function words (articles, prepositions, pronouns, conjunctions,
// common essere/avere/fare forms) plus frequent medieval spellings. This is
// the project's documented default for topic modeling.
inline constexpr std::string_view kLdaStopwords[] = {
    "a", "ad", "agli", "ai", "al", "alcun", "alcuna", "alcuno", "alla", "alle", "allo",
    "altra", "altre", "altri", "altro", "anche", "ancora", "appresso", "assai", "avanti",
    "avea", "aveano", "avendo", "aver", "avere", "avesse", "avessero", "avessi", "avete",
    "aveva", "avevano", "avrebbe", "avuta", "avuto", "abbia", "abbiano", "ben", "bene",
    "che", "chi", "ci", "ciascun", "ciascuna", "ciascuno", "ciò", "co", "coi", "col",
    "colla", "colle", "collo", "come", "con", "contra", "contro", "cosa", "cose", "così",
    "costei", "costoro", "costui", "cui", "da", "dagli", "dai", "dal", "dalla", "dalle",
    "dallo", "de", "degli", "dei", "del", "della", "delle", "dello", "dentro", "di",
    "dietro", "dinanzi", "dopo", "dove", "due", "e", "è", "ed", "egli", "ei", "ella",
    "elle", "elli", "era", "erano", "esse", "essa", "essendo", "esser", "essere", "essi",
    "esso", "et", "fa", "fare", "fatta", "fatto", "fece", "fecero", "fia", "fosse",
    "fossero", "fra", "fu", "fui", "furon", "furono", "già", "gli", "ha", "hai", "hanno",
    "ho", "i", "il", "in", "infra", "intra", "io", "la", "là", "le", "lei", "li", "lo",
    "lor", "loro", "lui", "lungo", "ma", "me", "medesima", "medesimo", "men", "meno",
    "mentre", "mi", "mia", "mie", "miei", "mio", "molta", "molte", "molti", "molto",
    "ne", "né", "negli", "nei", "nel", "nella", "nelle", "nello", "niuna", "niuno",
    "no", "noi", "non", "nostra", "nostre", "nostri", "nostro", "o", "od", "ogni",
    "oltre", "onde", "or", "ora", "ove", "per", "perché", "perciò", "però", "più",
    "poco", "poi", "presso", "prima", "pur", "pure", "qua", "qual", "quale", "quali",
    "quando", "quanta", "quante", "quanti", "quanto", "quasi", "quegli", "quei", "quel",
    "quella", "quelle", "quelli", "quello", "questa", "queste", "questi", "questo",
    "qui", "quindi", "quivi", "sanza", "sarà", "sarebbe", "se", "sé", "secondo",
    "sempre", "senza", "si", "sì", "sia", "siano", "siete", "son", "sono", "sopra",
    "sotto", "sta", "stata", "state", "stati", "stato", "su", "sua", "sue", "sugli",
    "sui", "sul", "sulla", "sulle", "sullo", "suo", "suoi", "tal", "tale", "tali",
    "tanta", "tante", "tanti", "tanto", "te", "ti", "tra", "tu", "tua", "tue", "tuo",
    "tuoi", "tutta", "tutte", "tutti", "tutto", "un", "una", "uno", "va", "ve", "verso",
    "vi", "voi", "vostra", "vostre", "vostri", "vostro",
};

inline Stoplist make_stoplist(const std::string_view* words, size_t n, std::string provenance) {
    Stoplist s;
    s.provenance = std::move(provenance);
    for (size_t i = 0; i < n; ++i) s.words.emplace(words[i]);
    return s;
}

}  // namespace detail

inline const Stoplist& default_pmi_stoplist() {
    static const Stoplist s = detail::make_stoplist(
        detail::kPmiStopwords, std::size(detail::kPmiStopwords), "builtin:pmi");
    return s;
}

inline const Stoplist& default_lda_stoplist() {
    static const Stoplist s = detail::make_stoplist(
        detail::kLdaStopwords, std::size(detail::kLdaStopwords), "builtin:lda");
    return s;
}

}  // namespace brigata
