#pragma once

// Subcommand implementations behind the brigata binary. Kept as plain
// functions over argument structs so the test suite can drive them without a
// process boundary. Exit codes: 0 success, 1 user/data error, 2 internal.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "brigata/classify.hpp"
#include "brigata/corpus.hpp"
#include "brigata/lexstats.hpp"
#include "brigata/report.hpp"
#include "brigata/tei.hpp"
#include "brigata/topics.hpp"

namespace brigata {

namespace detail {

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

inline void write_file(const std::string& path, std::string_view content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write file: " + path);
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw std::runtime_error("write failed: " + path);
}

inline void ensure_out_dir(const std::string& dir) {
    if (dir.empty() || dir == ".") return;
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw std::runtime_error("cannot create output directory " + dir + ": " + ec.message());
}

inline std::string joined(const std::string& dir, const std::string& name) {
    return (std::filesystem::path(dir.empty() ? "." : dir) / name).string();
}

inline std::optional<uint64_t> env_seed() {
    const char* v = std::getenv("BRIGATA_SEED");
    if (!v || !*v) return std::nullopt;
    char* end = nullptr;
    unsigned long long parsed = std::strtoull(v, &end, 10);
    if (end == v || *end != '\0')
        throw std::runtime_error("BRIGATA_SEED must be an unsigned integer, got '" +
                                 std::string(v) + "'");
    return static_cast<uint64_t>(parsed);
}

inline uint64_t resolve_seed(std::optional<uint64_t> flag, const char* command) {
    if (flag) return *flag;
    if (auto env = env_seed()) return *env;
    throw std::runtime_error(std::string(command) +
                             " needs a seed: pass --seed or set BRIGATA_SEED");
}

template <class F>
int guarded(std::ostream& err, F&& body) {
    try {
        body();
        return 0;
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::runtime_error& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        err << "internal error: " << e.what() << "\n";
        return 2;
    }
}

inline Corpus load_corpus_file(const std::string& path, std::ostream& err) {
    std::vector<std::string> warnings;
    Corpus corpus = load_json(read_file(path), &warnings);
    for (const auto& w : warnings) err << "warning: " << w << "\n";
    return corpus;
}

}  // namespace detail

struct CurateArgs {
    std::string tei_path;
    std::string rules_path;  // empty = built-in defaults (no teller table)
    std::string out_path;
};

inline int cmd_curate(const CurateArgs& args, std::ostream& out = std::cout,
                      std::ostream& err = std::cerr) {
    return detail::guarded(err, [&] {
        IngestionRules rules =
            args.rules_path.empty() ? IngestionRules{} : IngestionRules::load_file(args.rules_path);
        Corpus corpus = parse_tei(detail::read_file(args.tei_path), rules);
        ValidationReport report = validate_corpus(corpus);
        out << report.to_string();
        if (!report.duplicates.empty() || !report.empty_texts.empty())
            throw std::runtime_error("corpus has duplicate or empty novelle; not writing output");
        detail::write_file(args.out_path, save_json(corpus));
        out << "wrote " << args.out_path << "\n";
    });
}

struct ClassifyArgs {
    std::string corpus_path;
    std::string vocab = "full";        // full | top100
    std::string mode = "multinomial";  // multinomial | ovr
    int runs = 100;
    std::optional<uint64_t> seed;
    int jobs = 0;  // 0 = all cores
    bool shuffle_labels = false;
    std::string out_dir = ".";
};

inline int cmd_classify(const ClassifyArgs& args, std::ostream& out = std::cout,
                        std::ostream& err = std::cerr) {
    return detail::guarded(err, [&] {
        ExperimentConfig config;
        if (args.vocab == "full") {
            config.vocab_mode = VocabMode::full;
        } else if (args.vocab == "top100") {
            config.vocab_mode = VocabMode::top100;
        } else {
            throw std::runtime_error("--vocab must be 'full' or 'top100', got '" + args.vocab +
                                     "'");
        }
        if (args.mode == "multinomial") {
            config.classifier_mode = ClassifierMode::multinomial;
        } else if (args.mode == "ovr") {
            config.classifier_mode = ClassifierMode::one_vs_rest;
        } else {
            throw std::runtime_error("--mode must be 'multinomial' or 'ovr', got '" + args.mode +
                                     "'");
        }
        if (args.runs < 1) throw std::runtime_error("--runs must be >= 1");
        config.n_runs = args.runs;
        config.seed = detail::resolve_seed(args.seed, "classify");
        config.jobs = args.jobs;
        config.shuffle_labels = args.shuffle_labels;

        Corpus corpus = detail::load_corpus_file(args.corpus_path, err);
        ExperimentResult result = run_experiment(corpus, config);

        detail::ensure_out_dir(args.out_dir);
        std::vector<std::vector<std::string>> rows;
        for (size_t r = 0; r < result.f1.size(); ++r)
            for (size_t c = 0; c < result.class_names.size(); ++c)
                rows.push_back({std::to_string(r), result.class_names[c], fmt(result.f1[r][c]),
                                result.vocab_mode, result.classifier_mode});
        detail::write_file(detail::joined(args.out_dir, "f1.csv"),
                           emit_csv(rows, {"run", "storyteller", "f1", "vocab_mode",
                                           "classifier_mode"}));

        std::vector<std::vector<std::string>> summary;
        double grand = 0.0;
        for (size_t c = 0; c < result.class_names.size(); ++c) {
            summary.push_back({result.class_names[c], fmt(result.mean_f1[c]), result.vocab_mode,
                               result.classifier_mode});
            grand += result.mean_f1[c];
        }
        grand /= static_cast<double>(result.class_names.size());
        detail::write_file(detail::joined(args.out_dir, "f1_summary.csv"),
                           emit_csv(summary, {"storyteller", "mean_f1", "vocab_mode",
                                              "classifier_mode"}));
        detail::write_file(detail::joined(args.out_dir, "f1.svg"), emit_f1_plot(result));
        out << "runs: " << result.f1.size() << "  vocab: " << result.vocab_mode
            << "  mode: " << result.classifier_mode << "  mean F1 over classes: " << fmt(grand)
            << "\n";
    });
}

struct PmiArgs {
    std::string corpus_path;
    int64_t min_count = 5;
    std::string stoplist_path;  // empty = built-in PMI stoplist
    int k = 5;
    std::string out_dir = ".";
};

inline int cmd_pmi(const PmiArgs& args, std::ostream& out = std::cout,
                   std::ostream& err = std::cerr) {
    return detail::guarded(err, [&] {
        Corpus corpus = detail::load_corpus_file(args.corpus_path, err);
        Stoplist stoplist = args.stoplist_path.empty() ? default_pmi_stoplist()
                                                       : Stoplist::load_file(args.stoplist_path);
        NarratorCounts counts = count_by_narrator(corpus);
        PmiTable table = pmi(counts, args.min_count, stoplist);
        PmiExtremes extremes = top_bottom(table, args.k);

        detail::ensure_out_dir(args.out_dir);
        std::vector<std::vector<std::string>> full;
        for (size_t n = 0; n < table.narrators.size(); ++n)
            for (size_t r = 0; r < table.entries[n].size(); ++r)
                full.push_back({table.narrators[n], std::to_string(r + 1),
                                table.entries[n][r].token, fmt(table.entries[n][r].score),
                                std::to_string(table.entries[n][r].count)});
        detail::write_file(detail::joined(args.out_dir, "pmi.csv"),
                           emit_csv(full, {"narrator", "rank", "token", "score", "count"}));

        std::vector<std::vector<std::string>> top;
        for (size_t n = 0; n < extremes.narrators.size(); ++n) {
            for (int r = 0; r < extremes.k; ++r)
                top.push_back({extremes.narrators[n], std::to_string(r + 1), "high",
                               extremes.top[n][r].token, fmt(extremes.top[n][r].score)});
            for (int r = 0; r < extremes.k; ++r)
                top.push_back({extremes.narrators[n], std::to_string(r + 1), "low",
                               extremes.bottom[n][r].token, fmt(extremes.bottom[n][r].score)});
        }
        detail::write_file(detail::joined(args.out_dir, "pmi_top.csv"),
                           emit_csv(top, {"narrator", "rank", "direction", "token", "score"}));
        out << "narrators: " << table.narrators.size() << "  stoplist: " << stoplist.provenance
            << "  min_count: " << args.min_count << "\n";
    });
}

struct TopicsArgs {
    std::string corpus_path;
    int k = 20;
    int iters = 1000;
    int burnin = 200;
    int optimize_every = 50;
    std::optional<uint64_t> seed;
    std::string stoplist_path;  // empty = built-in LDA stoplist
    std::string labels_path;    // empty = retain all topics
    int top_words = 10;
    std::string out_dir = ".";
};

namespace detail {

inline std::vector<std::vector<std::string>> profile_rows(const ProfileMatrix& m) {
    std::vector<std::vector<std::string>> rows;
    for (size_t i = 0; i < m.rows.size(); ++i)
        for (size_t j = 0; j < m.topic_ids.size(); ++j)
            rows.push_back({m.rows[i], std::to_string(m.topic_ids[j]), m.topic_labels[j],
                            fmt(m.values[i][j]), m.normalized ? "true" : "false"});
    return rows;
}

inline void write_profile_pair(const std::string& dir, const std::string& stem,
                               const ProfileMatrix& m, const std::string& title) {
    static const std::vector<std::string> header = {"group", "topic_id", "topic_label", "value",
                                                    "normalized"};
    write_file(joined(dir, stem + ".csv"), emit_csv(profile_rows(m), header));
    write_file(joined(dir, stem + ".svg"), emit_heatmap_svg(HeatmapSpec::from_profile(m, title)));
}

}  // namespace detail

inline int cmd_topics(const TopicsArgs& args, std::ostream& out = std::cout,
                      std::ostream& err = std::cerr) {
    return detail::guarded(err, [&] {
        if (args.k < 1) throw std::runtime_error("--k must be >= 1");
        if (args.iters < 0) throw std::runtime_error("--iters must be >= 0");
        Corpus corpus = detail::load_corpus_file(args.corpus_path, err);
        Stoplist stoplist = args.stoplist_path.empty() ? default_lda_stoplist()
                                                       : Stoplist::load_file(args.stoplist_path);
        LdaCorpus lda = build_lda_docs(corpus, stoplist);
        if (lda.docs.empty())
            throw std::runtime_error("no documents survive stopword removal and the length "
                                     "threshold; cannot train");
        out << "documents: " << lda.docs.size() << "\n";

        LdaConfig config;
        config.n_topics = args.k;
        config.iters = args.iters;
        config.burnin = args.burnin;
        config.optimize_every = args.optimize_every;
        config.seed = detail::resolve_seed(args.seed, "topics");
        LdaState state = train_lda(lda, config);

        TopicLabels labels = args.labels_path.empty() ? TopicLabels::all(args.k)
                                                      : TopicLabels::load_file(args.labels_path);
        detail::check_retained(labels.ids, args.k);

        detail::ensure_out_dir(args.out_dir);
        std::vector<std::vector<std::string>> topic_rows;
        for (int t = 0; t < args.k; ++t) {
            auto words = topic_top_words(state, lda.vocab, t,
                                         static_cast<size_t>(std::max(1, args.top_words)));
            for (size_t r = 0; r < words.size(); ++r)
                topic_rows.push_back({std::to_string(t), std::to_string(r + 1), words[r].first,
                                      fmt(words[r].second)});
        }
        detail::write_file(detail::joined(args.out_dir, "topics.csv"),
                           emit_csv(topic_rows, {"topic", "rank", "token", "weight"}));

        std::vector<std::vector<std::string>> doc_rows;
        for (size_t d = 0; d < lda.docs.size(); ++d) {
            auto theta = doc_topic(state, d);
            for (int t = 0; t < args.k; ++t)
                doc_rows.push_back({std::to_string(d), std::to_string(lda.docs[d].novella_ref.first),
                                    std::to_string(lda.docs[d].novella_ref.second),
                                    lda.docs[d].storyteller, std::to_string(t), fmt(theta[t])});
        }
        detail::write_file(detail::joined(args.out_dir, "doc_topics.csv"),
                           emit_csv(doc_rows, {"doc", "day", "position", "storyteller", "topic_id",
                                               "theta"}));

        const auto& roster = NarratorRoster::canonical();
        ProfileMatrix tellers =
            group_profile(state, lda.docs, Grouping::by_storyteller, roster, labels.ids);
        apply_topic_labels(tellers, labels);
        ProfileMatrix genders =
            group_profile(state, lda.docs, Grouping::by_gender, roster, labels.ids);
        apply_topic_labels(genders, labels);

        detail::write_profile_pair(args.out_dir, "storyteller_profile_raw", tellers,
                                   "Topic profile by storyteller");
        detail::write_profile_pair(args.out_dir, "storyteller_profile_norm",
                                   normalize_columns(tellers),
                                   "Topic profile by storyteller (column-normalized)");
        detail::write_profile_pair(args.out_dir, "gender_profile_raw", genders,
                                   "Topic profile by storyteller gender");
        detail::write_profile_pair(args.out_dir, "gender_profile_norm", normalize_columns(genders),
                                   "Topic profile by storyteller gender (column-normalized)");

        ProfileMatrix novelle = novella_profile(state, lda.docs, labels.ids);
        apply_topic_labels(novelle, labels);
        HeatmapSpec heat = HeatmapSpec::from_profile(novelle, "Topic distribution per novella");
        heat.cell_px = 14;
        detail::write_file(detail::joined(args.out_dir, "novella_heatmap.svg"),
                           emit_heatmap_svg(heat));
    });
}

}  // namespace brigata
