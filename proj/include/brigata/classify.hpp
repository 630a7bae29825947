#pragma once

// Narrator classification: novella-level 8/2 split plans, multinomial and
// one-vs-rest logistic regression trained by full-batch gradient descent,
// per-class F1, and the repeated-split experiment harness.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <thread>
#include <unordered_map>
#include <vector>

#include "brigata/corpus.hpp"
#include "brigata/features.hpp"
#include "brigata/rng.hpp"
#include "brigata/textproc.hpp"

namespace brigata {

struct LabeledVector {
    SparseVector x;
    int y = 0;
    std::pair<int, int> novella_ref{0, 0};
};

/// Per storyteller: 8 train novelle + 2 test novelle, all chunks of a novella
/// on one side. Deterministic given the seed.
struct SplitPlan {
    struct TellerSplit {
        std::string name;
        std::vector<std::pair<int, int>> train;
        std::vector<std::pair<int, int>> test;
    };
    std::vector<TellerSplit> tellers;  // roster order
    uint64_t seed = 0;

    std::set<std::pair<int, int>> test_set() const {
        std::set<std::pair<int, int>> s;
        for (const auto& t : tellers) s.insert(t.test.begin(), t.test.end());
        return s;
    }
};

inline SplitPlan make_split(const Corpus& corpus, uint64_t seed) {
    if (!validate_corpus(corpus).complete)
        throw ValidationFailure("make_split requires a complete corpus");
    const auto& roster = NarratorRoster::canonical();
    std::map<std::string, std::vector<std::pair<int, int>>> by_teller;
    for (const auto& nov : corpus.novelle)
        by_teller[nov.storyteller].emplace_back(nov.day, nov.position);

    SplitPlan plan;
    plan.seed = seed;
    Rng rng(seed);
    for (const auto& name : roster.names) {
        auto refs = by_teller[name];
        std::sort(refs.begin(), refs.end());
        rng.shuffle(refs);
        SplitPlan::TellerSplit split;
        split.name = name;
        split.train.assign(refs.begin(), refs.begin() + 8);
        split.test.assign(refs.begin() + 8, refs.end());
        std::sort(split.train.begin(), split.train.end());
        std::sort(split.test.begin(), split.test.end());
        plan.tellers.push_back(std::move(split));
    }
    return plan;
}

enum class ClassifierMode { multinomial, one_vs_rest };

inline std::string to_string(ClassifierMode m) {
    return m == ClassifierMode::multinomial ? "multinomial" : "ovr";
}

struct TrainConfig {
    ClassifierMode mode = ClassifierMode::multinomial;
    double step = 0.5;
    int max_epochs = 2000;
    double l2 = 1e-4;
    double tol = 1e-6;  // stop when loss improvement falls below this
};

struct LogRegModel {
    int n_classes = 0;
    int32_t dim = 0;
    std::vector<double> weights;  // n_classes x dim, row-major
    std::vector<double> bias;     // n_classes
    ClassifierMode mode = ClassifierMode::multinomial;
    double l2 = 0.0;
    std::vector<std::vector<double>> loss_trace;  // one trace (multinomial) or one per class (ovr)
};

/// Mean softmax cross-entropy + (l2/2)*||W||^2 and, when requested, its
/// gradient. Kept as a free function so the analytic gradient can be checked
/// against finite differences.
inline double softmax_loss_grad(const std::vector<LabeledVector>& data, int n_classes,
                                const std::vector<double>& weights, const std::vector<double>& bias,
                                double l2, std::vector<double>* grad_w,
                                std::vector<double>* grad_b) {
    const size_t n = data.size();
    const int32_t dim = data.empty() ? 0 : data.front().x.dim;
    if (grad_w) grad_w->assign(weights.size(), 0.0);
    if (grad_b) grad_b->assign(bias.size(), 0.0);
    double loss = 0.0;
    std::vector<double> scores(n_classes);
    for (const auto& ex : data) {
        for (int c = 0; c < n_classes; ++c) {
            double s = bias[c];
            const double* row = weights.data() + static_cast<size_t>(c) * dim;
            for (const auto& [idx, v] : ex.x.entries) s += row[idx] * v;
            scores[c] = s;
        }
        double mx = *std::max_element(scores.begin(), scores.end());
        double z = 0.0;
        for (int c = 0; c < n_classes; ++c) z += std::exp(scores[c] - mx);
        loss += -(scores[ex.y] - mx - std::log(z));
        if (grad_w || grad_b) {
            for (int c = 0; c < n_classes; ++c) {
                double p = std::exp(scores[c] - mx) / z;
                double g = p - (c == ex.y ? 1.0 : 0.0);
                if (grad_b) (*grad_b)[c] += g;
                if (grad_w) {
                    double* grow = grad_w->data() + static_cast<size_t>(c) * dim;
                    for (const auto& [idx, v] : ex.x.entries) grow[idx] += g * v;
                }
            }
        }
    }
    loss /= static_cast<double>(n);
    double reg = 0.0;
    for (double w : weights) reg += w * w;
    loss += 0.5 * l2 * reg;
    if (grad_w) {
        for (size_t j = 0; j < weights.size(); ++j)
            (*grad_w)[j] = (*grad_w)[j] / static_cast<double>(n) + l2 * weights[j];
    }
    if (grad_b) {
        for (double& g : *grad_b) g /= static_cast<double>(n);
    }
    return loss;
}

/// Binary cross-entropy for one one-vs-rest class (label 1 iff y ==
/// target_class) + (l2/2)*||w||^2, with optional gradient.
inline double sigmoid_loss_grad(const std::vector<LabeledVector>& data, int target_class,
                                const std::vector<double>& w, double b, double l2,
                                std::vector<double>* grad_w, double* grad_b) {
    const size_t n = data.size();
    if (grad_w) grad_w->assign(w.size(), 0.0);
    if (grad_b) *grad_b = 0.0;
    double loss = 0.0;
    for (const auto& ex : data) {
        double s = b;
        for (const auto& [idx, v] : ex.x.entries) s += w[idx] * v;
        double y = (ex.y == target_class) ? 1.0 : 0.0;
        // max(s,0) - s*y + log(1+exp(-|s|)) is the stable form of the CE
        loss += std::max(s, 0.0) - s * y + std::log1p(std::exp(-std::abs(s)));
        if (grad_w || grad_b) {
            double p = 1.0 / (1.0 + std::exp(-s));
            double g = p - y;
            if (grad_b) *grad_b += g;
            if (grad_w)
                for (const auto& [idx, v] : ex.x.entries) (*grad_w)[idx] += g * v;
        }
    }
    loss /= static_cast<double>(n);
    double reg = 0.0;
    for (double x : w) reg += x * x;
    loss += 0.5 * l2 * reg;
    if (grad_w)
        for (size_t j = 0; j < w.size(); ++j)
            (*grad_w)[j] = (*grad_w)[j] / static_cast<double>(n) + l2 * w[j];
    if (grad_b) *grad_b /= static_cast<double>(n);
    return loss;
}

namespace detail {

// Fixed-step descent from zero init. A step that fails to lower the loss is
// reverted, so the recorded trace is non-increasing and the final loss never
// exceeds the initial one.
template <class LossGrad, class Apply, class Revert>
inline std::vector<double> descend(LossGrad loss_grad, Apply apply, Revert revert, double tol,
                                   int max_epochs) {
    std::vector<double> trace;
    double prev = loss_grad();
    trace.push_back(prev);
    for (int epoch = 0; epoch < max_epochs; ++epoch) {
        apply();
        double now = loss_grad();
        if (now > prev) {
            revert();
            break;
        }
        trace.push_back(now);
        if (prev - now < tol) break;
        prev = now;
    }
    return trace;
}

}  // namespace detail

inline LogRegModel train(const std::vector<LabeledVector>& data, int n_classes,
                         const TrainConfig& config) {
    if (data.empty()) throw std::invalid_argument("train: empty data");
    const int32_t dim = data.front().x.dim;
    std::vector<bool> seen(n_classes, false);
    for (const auto& ex : data) {
        if (ex.x.dim != dim) throw std::invalid_argument("train: inconsistent vector dimensions");
        if (ex.y < 0 || ex.y >= n_classes) throw std::invalid_argument("train: label out of range");
        seen[ex.y] = true;
        for (const auto& [idx, v] : ex.x.entries)
            if (!std::isfinite(v)) throw std::invalid_argument("train: non-finite feature value");
    }
    for (int c = 0; c < n_classes; ++c)
        if (!seen[c])
            throw std::invalid_argument("train: class " + std::to_string(c) +
                                        " absent from training data");

    LogRegModel model;
    model.n_classes = n_classes;
    model.dim = dim;
    model.mode = config.mode;
    model.l2 = config.l2;
    model.weights.assign(static_cast<size_t>(n_classes) * dim, 0.0);
    model.bias.assign(n_classes, 0.0);

    if (config.mode == ClassifierMode::multinomial) {
        std::vector<double> gw, gb;
        auto loss_grad = [&] {
            return softmax_loss_grad(data, n_classes, model.weights, model.bias, config.l2, &gw, &gb);
        };
        auto apply = [&] {
            for (size_t j = 0; j < model.weights.size(); ++j)
                model.weights[j] -= config.step * gw[j];
            for (int c = 0; c < n_classes; ++c) model.bias[c] -= config.step * gb[c];
        };
        // loss_grad overwrites gw/gb each call; keep the applied step so a
        // failed step can be undone exactly.
        std::vector<double> applied_w, applied_b;
        auto apply_tracked = [&] {
            applied_w = gw;
            applied_b = gb;
            apply();
        };
        auto revert = [&] {
            for (size_t j = 0; j < model.weights.size(); ++j)
                model.weights[j] += config.step * applied_w[j];
            for (int c = 0; c < n_classes; ++c) model.bias[c] += config.step * applied_b[c];
        };
        model.loss_trace.push_back(
            detail::descend(loss_grad, apply_tracked, revert, config.tol, config.max_epochs));
    } else {
        for (int c = 0; c < n_classes; ++c) {
            std::vector<double> w(dim, 0.0), gw;
            double b = 0.0, gb = 0.0;
            auto loss_grad = [&] { return sigmoid_loss_grad(data, c, w, b, config.l2, &gw, &gb); };
            std::vector<double> applied_w;
            double applied_b = 0.0;
            auto apply_tracked = [&] {
                applied_w = gw;
                applied_b = gb;
                for (int32_t j = 0; j < dim; ++j) w[j] -= config.step * gw[j];
                b -= config.step * gb;
            };
            auto revert = [&] {
                for (int32_t j = 0; j < dim; ++j) w[j] += config.step * applied_w[j];
                b += config.step * applied_b;
            };
            model.loss_trace.push_back(
                detail::descend(loss_grad, apply_tracked, revert, config.tol, config.max_epochs));
            std::copy(w.begin(), w.end(), model.weights.begin() + static_cast<size_t>(c) * dim);
            model.bias[c] = b;
        }
    }
    return model;
}

/// Predicted class (argmax, ties to the lowest index) and the per-class
/// scores: softmax probabilities in multinomial mode, independent sigmoid
/// scores in one-vs-rest mode.
inline std::pair<int, std::vector<double>> predict(const LogRegModel& model,
                                                   const SparseVector& x) {
    if (x.dim != model.dim)
        throw std::invalid_argument("predict: vector dimension " + std::to_string(x.dim) +
                                    " does not match model dimension " + std::to_string(model.dim));
    std::vector<double> scores(model.n_classes);
    for (int c = 0; c < model.n_classes; ++c) {
        double s = model.bias[c];
        const double* row = model.weights.data() + static_cast<size_t>(c) * model.dim;
        for (const auto& [idx, v] : x.entries) s += row[idx] * v;
        scores[c] = s;
    }
    if (model.mode == ClassifierMode::multinomial) {
        double mx = *std::max_element(scores.begin(), scores.end());
        double z = 0.0;
        for (double& s : scores) {
            s = std::exp(s - mx);
            z += s;
        }
        for (double& s : scores) s /= z;
    } else {
        for (double& s : scores) s = 1.0 / (1.0 + std::exp(-s));
    }
    int best = 0;
    for (int c = 1; c < model.n_classes; ++c)
        if (scores[c] > scores[best]) best = c;
    return {best, scores};
}

inline std::vector<double> f1_per_class(const std::vector<int>& pred, const std::vector<int>& gold,
                                        int n_classes) {
    if (pred.size() != gold.size())
        throw std::invalid_argument("f1_per_class: prediction/gold length mismatch");
    std::vector<int64_t> tp(n_classes, 0), fp(n_classes, 0), fn(n_classes, 0);
    for (size_t i = 0; i < pred.size(); ++i) {
        if (pred[i] == gold[i]) {
            ++tp[pred[i]];
        } else {
            ++fp[pred[i]];
            ++fn[gold[i]];
        }
    }
    std::vector<double> f1(n_classes, 0.0);
    for (int c = 0; c < n_classes; ++c) {
        int64_t denom = 2 * tp[c] + fp[c] + fn[c];
        f1[c] = denom == 0 ? 0.0 : 2.0 * tp[c] / static_cast<double>(denom);
    }
    return f1;
}

enum class VocabMode { full, top100 };

inline std::string to_string(VocabMode m) { return m == VocabMode::full ? "full" : "top100"; }

struct ExperimentConfig {
    VocabMode vocab_mode = VocabMode::full;
    ClassifierMode classifier_mode = ClassifierMode::multinomial;
    int n_runs = 100;
    int chunk_size = 100;
    int min_final = 20;
    int top_k = 100;
    uint64_t seed = 0;
    int jobs = 1;  // <= 0 means hardware concurrency
    bool shuffle_labels = false;  // destroys the label signal; chance-level harness
    TrainConfig train;
};

struct ExperimentResult {
    std::vector<std::string> class_names;  // roster order
    std::vector<std::vector<double>> f1;   // n_runs x n_classes
    std::vector<double> mean_f1;
    std::string vocab_mode;
    std::string classifier_mode;
    uint64_t seed = 0;
};

namespace detail {

inline Vocabulary build_vocab_refs(const std::vector<const std::vector<Token>*>& streams) {
    std::unordered_map<std::string, int64_t> counts;
    for (const auto* stream : streams)
        for (const auto& tok : *stream) ++counts[tok];
    return Vocabulary::from_counts(std::move(counts));
}

inline IdfModel fit_idf_refs(const std::vector<const std::vector<Token>*>& chunks,
                             const Vocabulary& vocab) {
    if (chunks.empty()) throw std::invalid_argument("fit_idf: no chunks");
    IdfModel model;
    model.vocab = vocab;
    model.n_docs = static_cast<int64_t>(chunks.size());
    model.df.assign(vocab.size(), 0);
    std::vector<int64_t> last_seen(vocab.size(), -1);
    for (size_t c = 0; c < chunks.size(); ++c) {
        for (const auto& tok : *chunks[c]) {
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

}  // namespace detail

/// The repeated-split experiment behind the F1 figures. Per run r: an 8/2
/// novella split from seed+r, chunk-level TF-IDF features (idf fitted on the
/// run's train chunks only), one trained model, per-class F1 on test chunks.
/// Runs are independent and may execute on several threads; the output is
/// identical regardless of jobs.
inline ExperimentResult run_experiment(const Corpus& corpus, const ExperimentConfig& config) {
    const auto& roster = NarratorRoster::canonical();
    const int n_classes = static_cast<int>(roster.names.size());

    std::vector<std::vector<Token>> streams(corpus.novelle.size());
    for (size_t i = 0; i < corpus.novelle.size(); ++i)
        streams[i] = tokenize(corpus.novelle[i].text);

    Vocabulary top_vocab;
    if (config.vocab_mode == VocabMode::top100) {
        Vocabulary global = Vocabulary::build(streams);
        size_t k = std::min<size_t>(config.top_k, global.size());
        top_vocab = global.prefix(k);
        for (auto& stream : streams) stream = restrict_to_top_k(stream, global, k);
    }

    std::vector<std::vector<std::vector<Token>>> novella_chunks(corpus.novelle.size());
    std::vector<int> novella_label(corpus.novelle.size());
    for (size_t i = 0; i < corpus.novelle.size(); ++i) {
        novella_chunks[i] = chunk_tokens(streams[i], config.chunk_size, config.min_final);
        novella_label[i] = roster.index_of(corpus.novelle[i].storyteller);
        if (novella_label[i] < 0)
            throw ValidationFailure("unknown storyteller '" + corpus.novelle[i].storyteller + "'");
    }

    ExperimentResult result;
    result.class_names = roster.names;
    result.vocab_mode = to_string(config.vocab_mode);
    result.classifier_mode = to_string(config.classifier_mode);
    result.seed = config.seed;
    result.f1.assign(config.n_runs, std::vector<double>(n_classes, 0.0));

    auto run_one = [&](int r) {
        SplitPlan plan = make_split(corpus, config.seed + static_cast<uint64_t>(r));
        auto test_refs = plan.test_set();

        std::vector<const std::vector<Token>*> train_chunks, test_chunks;
        std::vector<int> train_labels, test_labels;
        std::vector<std::pair<int, int>> train_refs;
        for (size_t i = 0; i < corpus.novelle.size(); ++i) {
            const auto& nov = corpus.novelle[i];
            bool in_test = test_refs.count({nov.day, nov.position}) > 0;
            for (const auto& chunk : novella_chunks[i]) {
                if (in_test) {
                    test_chunks.push_back(&chunk);
                    test_labels.push_back(novella_label[i]);
                } else {
                    train_chunks.push_back(&chunk);
                    train_labels.push_back(novella_label[i]);
                    train_refs.emplace_back(nov.day, nov.position);
                }
            }
        }

        if (config.shuffle_labels) {
            Rng srng((config.seed + static_cast<uint64_t>(r)) ^ 0xda3e39cb94b95bdbULL);
            std::vector<int> all = train_labels;
            all.insert(all.end(), test_labels.begin(), test_labels.end());
            srng.shuffle(all);
            std::copy(all.begin(), all.begin() + train_labels.size(), train_labels.begin());
            std::copy(all.begin() + train_labels.size(), all.end(), test_labels.begin());
        }

        Vocabulary vocab = config.vocab_mode == VocabMode::top100
                               ? top_vocab
                               : detail::build_vocab_refs(train_chunks);
        IdfModel idf = detail::fit_idf_refs(train_chunks, vocab);

        std::vector<LabeledVector> train_data(train_chunks.size());
        for (size_t i = 0; i < train_chunks.size(); ++i) {
            train_data[i].x = transform(*train_chunks[i], idf);
            train_data[i].y = train_labels[i];
            train_data[i].novella_ref = train_refs[i];
        }

        TrainConfig tc = config.train;
        tc.mode = config.classifier_mode;
        LogRegModel model = train(train_data, n_classes, tc);

        std::vector<int> preds(test_chunks.size());
        for (size_t i = 0; i < test_chunks.size(); ++i)
            preds[i] = predict(model, transform(*test_chunks[i], idf)).first;
        result.f1[r] = f1_per_class(preds, test_labels, n_classes);
    };

    int jobs = config.jobs > 0 ? config.jobs
                               : std::max(1u, std::thread::hardware_concurrency());
    jobs = std::min(jobs, config.n_runs);
    if (jobs <= 1) {
        for (int r = 0; r < config.n_runs; ++r) run_one(r);
    } else {
        std::atomic<int> next{0};
        std::vector<std::thread> workers;
        workers.reserve(jobs);
        for (int t = 0; t < jobs; ++t) {
            workers.emplace_back([&] {
                for (;;) {
                    int r = next.fetch_add(1);
                    if (r >= config.n_runs) return;
                    run_one(r);
                }
            });
        }
        for (auto& w : workers) w.join();
    }

    result.mean_f1.assign(n_classes, 0.0);
    for (const auto& row : result.f1)
        for (int c = 0; c < n_classes; ++c) result.mean_f1[c] += row[c];
    for (double& m : result.mean_f1) m /= std::max(1, config.n_runs);
    return result;
}

}  // namespace brigata
