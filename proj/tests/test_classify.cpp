#include <catch2/catch_amalgamated.hpp>
#include <cmath>
#include <set>

#include "brigata/classify.hpp"
#include "helpers.hpp"

using namespace brigata;
using Catch::Matchers::WithinAbs;

// ---------------------------------------------------------------------------
// splits

TEST_CASE("make_split puts 8 novelle in train and 2 in test per teller") {
    auto corpus = synthetic_corpus(60);
    auto plan = make_split(corpus, 123);
    REQUIRE(plan.tellers.size() == 10);
    for (const auto& t : plan.tellers) {
        CHECK(t.train.size() == 8);
        CHECK(t.test.size() == 2);
        std::set<std::pair<int, int>> all(t.train.begin(), t.train.end());
        all.insert(t.test.begin(), t.test.end());
        CHECK(all.size() == 10);  // disjoint and exhaustive
    }
    // roster order preserved
    CHECK(plan.tellers[0].name == "Panfilo");
    CHECK(plan.tellers[3].name == "Dioneo");
    CHECK(plan.test_set().size() == 20);
}

TEST_CASE("make_split is deterministic in the seed") {
    auto corpus = synthetic_corpus(60);
    auto a = make_split(corpus, 7);
    auto b = make_split(corpus, 7);
    for (size_t i = 0; i < a.tellers.size(); ++i) {
        CHECK(a.tellers[i].train == b.tellers[i].train);
        CHECK(a.tellers[i].test == b.tellers[i].test);
    }
    auto c = make_split(corpus, 8);
    bool any_difference = false;
    for (size_t i = 0; i < a.tellers.size(); ++i)
        if (a.tellers[i].test != c.tellers[i].test) any_difference = true;
    CHECK(any_difference);
}

TEST_CASE("make_split explores many test pairs across seeds") {
    auto corpus = synthetic_corpus(60);
    std::set<std::vector<std::pair<int, int>>> seen;
    for (uint64_t seed = 0; seed < 30; ++seed)
        seen.insert(make_split(corpus, seed).tellers[0].test);
    CHECK(seen.size() >= 10);  // of the 45 possible pairs
}

TEST_CASE("make_split rejects an incomplete corpus") {
    auto corpus = synthetic_corpus(60);
    corpus.novelle.pop_back();
    CHECK_THROWS_AS(make_split(corpus, 1), ValidationFailure);
}

// ---------------------------------------------------------------------------
// losses and gradients

static std::vector<LabeledVector> random_instance(Rng& rng, int n, int32_t dim, int n_classes) {
    std::vector<LabeledVector> data(n);
    for (int i = 0; i < n; ++i) {
        data[i].x.dim = dim;
        for (int32_t j = 0; j < dim; ++j)
            if (rng.uniform01() < 0.7)
                data[i].x.entries.emplace_back(j, rng.uniform01() * 2.0 - 1.0);
        data[i].y = i % n_classes;  // every class present
    }
    return data;
}

TEST_CASE("softmax gradient matches central finite differences") {
    Rng rng(99);
    const int n_classes = 3;
    const int32_t dim = 4;
    auto data = random_instance(rng, 7, dim, n_classes);
    std::vector<double> w(n_classes * dim), b(n_classes);
    for (auto& x : w) x = rng.uniform01() - 0.5;
    for (auto& x : b) x = rng.uniform01() - 0.5;
    const double l2 = 0.01, h = 1e-5;

    std::vector<double> gw, gb;
    softmax_loss_grad(data, n_classes, w, b, l2, &gw, &gb);
    for (size_t j = 0; j < w.size(); ++j) {
        auto wp = w, wm = w;
        wp[j] += h;
        wm[j] -= h;
        double fd = (softmax_loss_grad(data, n_classes, wp, b, l2, nullptr, nullptr) -
                     softmax_loss_grad(data, n_classes, wm, b, l2, nullptr, nullptr)) /
                    (2 * h);
        CHECK_THAT(gw[j], WithinAbs(fd, 1e-6));
    }
    for (size_t c = 0; c < b.size(); ++c) {
        auto bp = b, bm = b;
        bp[c] += h;
        bm[c] -= h;
        double fd = (softmax_loss_grad(data, n_classes, w, bp, l2, nullptr, nullptr) -
                     softmax_loss_grad(data, n_classes, w, bm, l2, nullptr, nullptr)) /
                    (2 * h);
        CHECK_THAT(gb[c], WithinAbs(fd, 1e-6));
    }
}

TEST_CASE("sigmoid gradient matches central finite differences") {
    Rng rng(100);
    const int32_t dim = 5;
    auto data = random_instance(rng, 6, dim, 2);
    std::vector<double> w(dim);
    for (auto& x : w) x = rng.uniform01() - 0.5;
    double b = 0.2;
    const double l2 = 0.03, h = 1e-5;

    std::vector<double> gw;
    double gb = 0.0;
    sigmoid_loss_grad(data, 1, w, b, l2, &gw, &gb);
    for (size_t j = 0; j < w.size(); ++j) {
        auto wp = w, wm = w;
        wp[j] += h;
        wm[j] -= h;
        double fd = (sigmoid_loss_grad(data, 1, wp, b, l2, nullptr, nullptr) -
                     sigmoid_loss_grad(data, 1, wm, b, l2, nullptr, nullptr)) /
                    (2 * h);
        CHECK_THAT(gw[j], WithinAbs(fd, 1e-6));
    }
    double fd = (sigmoid_loss_grad(data, 1, w, b + h, l2, nullptr, nullptr) -
                 sigmoid_loss_grad(data, 1, w, b - h, l2, nullptr, nullptr)) /
                (2 * h);
    CHECK_THAT(gb, WithinAbs(fd, 1e-6));
}

// ---------------------------------------------------------------------------
// training and prediction

static std::vector<LabeledVector> one_hot_problem(int n_classes, int copies) {
    std::vector<LabeledVector> data;
    for (int c = 0; c < n_classes; ++c)
        for (int i = 0; i < copies; ++i) {
            LabeledVector ex;
            ex.x.dim = n_classes;
            ex.x.entries = {{c, 1.0}};
            ex.y = c;
            data.push_back(ex);
        }
    return data;
}

TEST_CASE("train fits a separable problem in both modes") {
    auto data = one_hot_problem(3, 4);
    for (auto mode : {ClassifierMode::multinomial, ClassifierMode::one_vs_rest}) {
        TrainConfig config;
        config.mode = mode;
        auto model = train(data, 3, config);
        for (const auto& ex : data) {
            auto [label, scores] = predict(model, ex.x);
            CHECK(label == ex.y);
            CHECK(scores[ex.y] > 0.5);
        }
    }
}

TEST_CASE("untrained model gives uniform probabilities and ties go low") {
    auto data = one_hot_problem(4, 1);
    TrainConfig config;
    config.max_epochs = 0;
    auto model = train(data, 4, config);
    auto [label, scores] = predict(model, data[2].x);
    CHECK(label == 0);
    for (double s : scores) CHECK_THAT(s, WithinAbs(0.25, 1e-12));
}

TEST_CASE("accepted loss trace never increases and improves overall") {
    auto data = one_hot_problem(3, 4);
    TrainConfig config;
    auto model = train(data, 3, config);
    REQUIRE(model.loss_trace.size() == 1);
    const auto& trace = model.loss_trace[0];
    REQUIRE(trace.size() >= 2);
    for (size_t i = 1; i < trace.size(); ++i) CHECK(trace[i] <= trace[i - 1]);
    CHECK(trace.back() < trace.front());
    // zero-init multinomial loss starts at ln(C)
    CHECK_THAT(trace.front(), WithinAbs(std::log(3.0), 1e-12));
}

TEST_CASE("one-vs-rest keeps one trace per class and sigmoid scores") {
    auto data = one_hot_problem(3, 4);
    TrainConfig config;
    config.mode = ClassifierMode::one_vs_rest;
    auto model = train(data, 3, config);
    CHECK(model.loss_trace.size() == 3);
    auto [label, scores] = predict(model, data[0].x);
    double sum = 0.0;
    for (double s : scores) {
        CHECK(s > 0.0);
        CHECK(s < 1.0);
        sum += s;
    }
    CHECK(sum != 1.0);  // independent sigmoids, not a distribution
    CHECK(label == 0);
}

TEST_CASE("train input validation") {
    std::vector<LabeledVector> none;
    TrainConfig config;
    CHECK_THROWS_AS(train(none, 2, config), std::invalid_argument);

    auto missing = one_hot_problem(3, 2);
    for (auto& ex : missing) ex.y = std::min(ex.y, 1);  // class 2 absent
    CHECK_THROWS_AS(train(missing, 3, config), std::invalid_argument);

    auto bad_label = one_hot_problem(2, 2);
    bad_label[0].y = 7;
    CHECK_THROWS_AS(train(bad_label, 2, config), std::invalid_argument);

    auto bad_value = one_hot_problem(2, 2);
    bad_value[0].x.entries[0].second = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(train(bad_value, 2, config), std::invalid_argument);

    auto ragged = one_hot_problem(2, 2);
    ragged[1].x.dim = 5;
    CHECK_THROWS_AS(train(ragged, 2, config), std::invalid_argument);
}

TEST_CASE("predict rejects a dimension mismatch") {
    auto model = train(one_hot_problem(2, 2), 2, TrainConfig{});
    SparseVector wrong;
    wrong.dim = 9;
    CHECK_THROWS_AS(predict(model, wrong), std::invalid_argument);
}

TEST_CASE("f1_per_class hand oracle") {
    // class 0: tp=1 fp=1 fn=0 -> 2/3; class 1: tp=1 fp=0 fn=1 -> 2/3
    auto f1 = f1_per_class({0, 0, 1}, {0, 1, 1}, 2);
    CHECK_THAT(f1[0], WithinAbs(2.0 / 3.0, 1e-15));
    CHECK_THAT(f1[1], WithinAbs(2.0 / 3.0, 1e-15));

    auto perfect = f1_per_class({0, 1, 2}, {0, 1, 2}, 3);
    for (double v : perfect) CHECK(v == 1.0);

    // class 2 never predicted, never gold -> 0 by convention
    auto absent = f1_per_class({0, 1}, {0, 1}, 3);
    CHECK(absent[2] == 0.0);

    CHECK_THROWS_AS(f1_per_class({0}, {0, 1}, 2), std::invalid_argument);
}

// ---------------------------------------------------------------------------
// the experiment harness

static ExperimentConfig quick_config(uint64_t seed) {
    ExperimentConfig config;
    config.n_runs = 3;
    config.seed = seed;
    config.train.max_epochs = 150;
    return config;
}

TEST_CASE("run_experiment shape and config echo") {
    auto corpus = synthetic_corpus(220);
    auto config = quick_config(5);
    auto result = run_experiment(corpus, config);
    CHECK(result.class_names == NarratorRoster::canonical().names);
    REQUIRE(result.f1.size() == 3);
    for (const auto& row : result.f1) {
        REQUIRE(row.size() == 10);
        for (double v : row) {
            CHECK(v >= 0.0);
            CHECK(v <= 1.0);
        }
    }
    CHECK(result.vocab_mode == "full");
    CHECK(result.classifier_mode == "multinomial");
    CHECK(result.seed == 5);
    for (size_t c = 0; c < 10; ++c) {
        double mean = (result.f1[0][c] + result.f1[1][c] + result.f1[2][c]) / 3.0;
        CHECK_THAT(result.mean_f1[c], WithinAbs(mean, 1e-12));
    }
}

TEST_CASE("run_experiment is deterministic and thread-count invariant") {
    auto corpus = synthetic_corpus(220);
    auto config = quick_config(17);
    auto serial = run_experiment(corpus, config);
    config.jobs = 4;
    auto threaded = run_experiment(corpus, config);
    CHECK(serial.f1 == threaded.f1);
    // the planted signal makes every split perfectly separable, so a seed
    // change only shows up once labels are shuffled and scores get noisy
    auto noisy = quick_config(17);
    noisy.shuffle_labels = true;
    auto noisy_a = run_experiment(corpus, noisy);
    noisy.seed = 18;
    auto noisy_b = run_experiment(corpus, noisy);
    CHECK(noisy_a.f1 != noisy_b.f1);
}

TEST_CASE("run_experiment learns the planted narrator signal") {
    auto corpus = synthetic_corpus(220);
    auto config = quick_config(29);
    config.train.max_epochs = 400;
    auto result = run_experiment(corpus, config);
    double grand = 0.0;
    for (double m : result.mean_f1) grand += m;
    grand /= 10.0;
    CHECK(grand > 0.5);

    config.vocab_mode = VocabMode::top100;
    auto top = run_experiment(corpus, config);
    CHECK(top.vocab_mode == "top100");
    double grand_top = 0.0;
    for (double m : top.mean_f1) grand_top += m;
    grand_top /= 10.0;
    CHECK(grand_top > 0.3);
}

TEST_CASE("one-vs-rest harness runs end to end") {
    auto corpus = synthetic_corpus(220);
    auto config = quick_config(31);
    config.classifier_mode = ClassifierMode::one_vs_rest;
    config.n_runs = 2;
    auto result = run_experiment(corpus, config);
    CHECK(result.classifier_mode == "ovr");
    CHECK(result.f1.size() == 2);
}

TEST_CASE("idf is fitted on train chunks only") {
    auto corpus = synthetic_corpus(220);
    const uint64_t seed = 7;
    auto plan = make_split(corpus, seed);
    auto test_refs = plan.test_set();

    // plant a token that only ever occurs in one test novella
    for (auto& nov : corpus.novelle)
        if (std::pair<int, int>(nov.day, nov.position) == *test_refs.begin()) {
            for (int i = 0; i < 30; ++i) nov.text += " tokenunico";
            break;
        }

    std::vector<std::vector<Token>> train_chunks, test_chunks;
    for (const auto& nov : corpus.novelle) {
        bool in_test = test_refs.count({nov.day, nov.position}) > 0;
        for (auto& chunk : chunk_tokens(tokenize(nov.text), 100, 20))
            (in_test ? test_chunks : train_chunks).push_back(std::move(chunk));
    }

    // full mode: the train-built vocabulary cannot contain it
    auto train_vocab = build_vocabulary(train_chunks);
    CHECK(train_vocab.index_of("tokenunico") == -1);

    // even with a global vocabulary, train-fitted df stays zero for it
    std::vector<std::vector<Token>> all_chunks = train_chunks;
    all_chunks.insert(all_chunks.end(), test_chunks.begin(), test_chunks.end());
    auto global_vocab = build_vocabulary(all_chunks);
    auto idf = fit_idf(train_chunks, global_vocab);
    auto planted = global_vocab.index_of("tokenunico");
    REQUIRE(planted >= 0);
    CHECK(idf.df[planted] == 0);
}

TEST_CASE("label shuffling destroys the learnable signal") {
    auto corpus = synthetic_corpus(220);
    auto config = quick_config(41);
    config.n_runs = 4;
    config.shuffle_labels = true;
    config.train.max_epochs = 200;
    auto result = run_experiment(corpus, config);
    double grand = 0.0;
    for (double m : result.mean_f1) grand += m;
    grand /= 10.0;
    CHECK(grand < 0.25);
}
