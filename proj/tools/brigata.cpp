// brigata: corpus curation, narrator classification, PMI profiles, and LDA
// topic profiles for the Decameron, behind one subcommand-style binary.

#include <optional>
#include <string>

#include <CLI11.hpp>

#include "brigata/cli.hpp"

int main(int argc, char** argv) {
    CLI::App app{"brigata - Decameron narrator profiling toolkit"};
    app.require_subcommand(1);

    brigata::CurateArgs curate;
    curate.out_path = "decameron.json";
    auto* c_curate = app.add_subcommand(
        "curate", "Convert a TEI P4 source into the JSON corpus format and validate it");
    c_curate->add_option("tei", curate.tei_path, "TEI P4 XML file")->required();
    c_curate->add_option("--rules", curate.rules_path,
                         "ingestion rules JSON (deny list, div types, teller table)");
    c_curate->add_option("--out", curate.out_path, "output corpus JSON path")
        ->capture_default_str();

    brigata::ClassifyArgs classify;
    auto* c_classify = app.add_subcommand(
        "classify", "Repeated-split narrator classification; writes f1.csv, f1_summary.csv, f1.svg");
    c_classify->add_option("corpus", classify.corpus_path, "corpus JSON file")->required();
    c_classify->add_option("--vocab", classify.vocab, "feature vocabulary: full or top100")
        ->check(CLI::IsMember({"full", "top100"}))
        ->capture_default_str();
    c_classify->add_option("--mode", classify.mode, "classifier: multinomial or ovr")
        ->check(CLI::IsMember({"multinomial", "ovr"}))
        ->capture_default_str();
    c_classify->add_option("--runs", classify.runs, "number of random splits")
        ->capture_default_str();
    c_classify->add_option("--seed", classify.seed,
                           "RNG seed (falls back to BRIGATA_SEED; required)");
    c_classify->add_option("--jobs", classify.jobs, "worker threads, 0 = all cores")
        ->capture_default_str();
    c_classify->add_flag("--shuffle-labels", classify.shuffle_labels,
                         "shuffle labels before training (chance-level check)");
    c_classify->add_option("--out", classify.out_dir, "output directory")->capture_default_str();

    brigata::PmiArgs pmi;
    auto* c_pmi = app.add_subcommand(
        "pmi", "Per-narrator PMI lexical profiles; writes pmi.csv and pmi_top.csv");
    c_pmi->add_option("corpus", pmi.corpus_path, "corpus JSON file")->required();
    c_pmi->add_option("--min-count", pmi.min_count, "minimum per-narrator token count")
        ->capture_default_str();
    c_pmi->add_option("--stoplist", pmi.stoplist_path,
                      "stoplist file (default: built-in PMI list)");
    c_pmi->add_option("--k", pmi.k, "top/bottom list length")->capture_default_str();
    c_pmi->add_option("--out", pmi.out_dir, "output directory")->capture_default_str();

    brigata::TopicsArgs topics;
    auto* c_topics = app.add_subcommand(
        "topics",
        "Collapsed-Gibbs LDA topic profiles; writes topics.csv, doc_topics.csv, profile CSV/SVG");
    c_topics->add_option("corpus", topics.corpus_path, "corpus JSON file")->required();
    c_topics->add_option("--k", topics.k, "number of topics")->capture_default_str();
    c_topics->add_option("--iters", topics.iters, "Gibbs sweeps")->capture_default_str();
    c_topics->add_option("--burnin", topics.burnin, "sweeps before hyperparameter optimization")
        ->capture_default_str();
    c_topics->add_option("--optimize-every", topics.optimize_every,
                         "alpha re-optimization interval after burn-in")
        ->capture_default_str();
    c_topics->add_option("--seed", topics.seed,
                         "RNG seed (falls back to BRIGATA_SEED; required)");
    c_topics->add_option("--stoplist", topics.stoplist_path,
                         "stoplist file (default: built-in LDA list)");
    c_topics->add_option("--labels", topics.labels_path,
                         "topic label JSON: {\"retained\": [{\"id\": 0, \"label\": \"...\"}]}");
    c_topics->add_option("--top-words", topics.top_words, "words listed per topic")
        ->capture_default_str();
    c_topics->add_option("--out", topics.out_dir, "output directory")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    if (c_curate->parsed()) return brigata::cmd_curate(curate);
    if (c_classify->parsed()) return brigata::cmd_classify(classify);
    if (c_pmi->parsed()) return brigata::cmd_pmi(pmi);
    if (c_topics->parsed()) return brigata::cmd_topics(topics);
    return 1;
}
