#include <gtest/gtest.h>

#include <numeric>

#include "vowelrec/corpus.hpp"
#include "vowelrec/error.hpp"
#include "vowelrec/eval.hpp"
#include "vowelrec/frontend.hpp"

using namespace vowelrec;

namespace {

const FeatureCorpus& small_corpus() {
    static const FeatureCorpus data = [] {
        const auto corpus = build_synthetic_corpus(6, 16000, 3);
        return make_feature_corpus(extract_corpus(corpus, FrontendConfig{}, 1), corpus.classes);
    }();
    return data;
}

TrainingConfig quick_training() {
    TrainingConfig cfg;
    cfg.max_iters = 5;
    cfg.seed = 4;
    return cfg;
}

EvalConfig quick_eval() {
    EvalConfig cfg;
    cfg.n_iterations = 3;
    cfg.subset_sizes = {3, 6, 12};
    cfg.seed = 9;
    cfg.jobs = 1;
    return cfg;
}

std::vector<std::size_t> balanced_labels(std::size_t classes, std::size_t per_class) {
    std::vector<std::size_t> labels;
    for (std::size_t c = 0; c < classes; ++c) labels.insert(labels.end(), per_class, c);
    return labels;
}

}  // namespace

TEST(Split, CountsPerClass) {
    const auto labels = balanced_labels(5, 25);
    Rng rng(1);
    const auto split = stratified_split(labels, 5, 0.8, rng);
    EXPECT_EQ(split.train.size(), 100u);
    EXPECT_EQ(split.test.size(), 25u);
    std::vector<int> test_per_class(5, 0);
    for (auto i : split.test) ++test_per_class[labels[i]];
    EXPECT_EQ(test_per_class, std::vector<int>(5, 5));

    std::vector<std::size_t> joined = split.train;
    joined.insert(joined.end(), split.test.begin(), split.test.end());
    std::sort(joined.begin(), joined.end());
    std::vector<std::size_t> all(125);
    std::iota(all.begin(), all.end(), std::size_t{0});
    EXPECT_EQ(joined, all);
}

TEST(Split, TwoClipsGiveOneEachSide) {
    const auto labels = balanced_labels(5, 2);
    Rng rng(3);
    const auto split = stratified_split(labels, 5, 0.8, rng);
    EXPECT_EQ(split.train.size(), 5u);
    EXPECT_EQ(split.test.size(), 5u);
    Rng tiny(3);
    EXPECT_EQ(stratified_split(labels, 5, 0.01, tiny).train.size(), 5u);
}

TEST(Split, DeterministicAndSeedSensitive) {
    const auto labels = balanced_labels(5, 25);
    Rng a(42), b(42), c(43);
    const auto sa = stratified_split(labels, 5, 0.8, a);
    const auto sb = stratified_split(labels, 5, 0.8, b);
    const auto sc = stratified_split(labels, 5, 0.8, c);
    EXPECT_EQ(sa.train, sb.train);
    EXPECT_NE(sa.train, sc.train);
}

TEST(Split, SingletonClassIsDegenerate) {
    const std::vector<std::size_t> labels{0, 0, 1};
    Rng rng(1);
    try {
        stratified_split(labels, 2, 0.8, rng);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::DegenerateClass);
    }
}

TEST(Confusion, SingleClassPredictionsGiveOneInFive) {
    ConfusionMatrix m(5);
    for (std::size_t c = 0; c < 5; ++c) m.add(c, 2, 5);
    EXPECT_DOUBLE_EQ(m.accuracy(), 20.0);
    EXPECT_EQ(m.total(), 25u);
    EXPECT_EQ(m.row_sum(3), 5u);
    EXPECT_DOUBLE_EQ(double(m.trace()) / double(m.total()), m.accuracy() / 100.0);
}

TEST(RunIteration, IdenticalClipsPerClassAreRecognisedPerfectly) {
    Corpus corpus;
    corpus.classes = {"a", "i", "u", "e", "o"};
    for (const auto& spec : vowel_templates()) {
        VowelSpec s = spec;
        s.jitter_seed = 11;
        const auto clip = synthesize_vowel(s, 16000);
        for (int copy = 0; copy < 4; ++copy) {
            AudioClip c = clip;
            c.label = s.label;
            c.id = s.label + std::to_string(copy);
            corpus.clips.push_back(c);
        }
    }
    const auto data = make_feature_corpus(extract_corpus(corpus, FrontendConfig{}, 1), corpus.classes);
    Rng rng(5);
    const auto split = stratified_split(data.labels, 5, 0.5, rng);
    const auto res = run_iteration(data, split, full_subset(12), quick_training());
    EXPECT_DOUBLE_EQ(res.accuracy, 100.0);
    EXPECT_EQ(res.confusion.trace(), split.test.size());
}

TEST(RunIteration, ConfusionRowsMatchTestCounts) {
    const auto& data = small_corpus();
    Rng rng(2);
    const auto split = stratified_split(data.labels, 5, 0.8, rng);
    CoefficientSubset s;
    s.indices = {1, 2, 4, 5};
    const auto res = run_iteration(data, split, s, quick_training());
    std::vector<std::size_t> per_class(5, 0);
    for (auto i : split.test) ++per_class[data.labels[i]];
    for (std::size_t c = 0; c < 5; ++c) EXPECT_EQ(res.confusion.row_sum(c), per_class[c]);
    EXPECT_NEAR(res.accuracy / 100.0, double(res.confusion.trace()) / double(res.confusion.total()), 1e-15);
    // Coordinate order of the subset does not matter.
    s.indices = {5, 1, 4, 2};
    EXPECT_EQ(run_iteration(data, split, s, quick_training()).accuracy, res.accuracy);
}

TEST(Sweep, FullSubsetEqualsNoSelection) {
    const auto& data = small_corpus();
    EvalConfig with = quick_eval();
    with.subset_sizes = {12};
    EvalConfig without = quick_eval();
    without.feature_selection = false;
    const auto a = sweep(data, with, quick_training());
    const auto b = sweep(data, without, quick_training());
    ASSERT_EQ(a.entries.size(), 1u);
    ASSERT_EQ(b.entries.size(), 1u);
    EXPECT_EQ(b.entries[0].k, 12u);
    EXPECT_EQ(a.entries[0].accuracies, b.entries[0].accuracies);
    EXPECT_TRUE(b.rankings.empty());
}

TEST(Sweep, ReportInvariants) {
    const auto& data = small_corpus();
    const auto cfg = quick_eval();
    const auto rep = sweep(data, cfg, quick_training());
    ASSERT_EQ(rep.entries.size(), 3u);
    ASSERT_EQ(rep.splits.size(), 3u);
    EXPECT_NE(rep.splits[0].train, rep.splits[1].train);
    for (std::size_t it = 0; it < rep.splits.size(); ++it) {
        // Ranking comes from the training clips alone.
        const auto expected = rank_coefficients(data, rep.splits[it].train);
        EXPECT_EQ(rep.rankings[it].f, expected.f);
        EXPECT_EQ(rep.rankings[it].ranking, expected.ranking);
        for (std::size_t s = 1; s < rep.entries.size(); ++s) {
            const auto& small = rep.entries[s - 1].subsets[it].indices;
            const auto& big = rep.entries[s].subsets[it].indices;
            EXPECT_TRUE(std::equal(small.begin(), small.end(), big.begin()));
        }
    }
    for (const auto& e : rep.entries) {
        ASSERT_EQ(e.accuracies.size(), 3u);
        double sum = 0.0;
        for (double a : e.accuracies) {
            EXPECT_GE(a, 0.0);
            EXPECT_LE(a, 100.0);
            sum += a;
        }
        EXPECT_NEAR(e.mean_accuracy, sum / 3.0, 1e-12);
        EXPECT_GE(e.std_accuracy, 0.0);
        EXPECT_EQ(e.confusion.total(), 3 * rep.splits[0].test.size());
    }
}

TEST(Sweep, ScopeAllRanksOnEveryClip) {
    const auto& data = small_corpus();
    auto cfg = quick_eval();
    cfg.n_iterations = 2;
    cfg.subset_sizes = {4};
    cfg.fratio_scope = FRatioScope::All;
    const auto rep = sweep(data, cfg, quick_training());
    std::vector<std::size_t> all(data.sequences.size());
    std::iota(all.begin(), all.end(), std::size_t{0});
    const auto global = rank_coefficients(data, all);
    for (const auto& r : rep.rankings) EXPECT_EQ(r.ranking, global.ranking);
}

TEST(Sweep, DeterministicAcrossJobCounts) {
    const auto& data = small_corpus();
    auto one = quick_eval();
    one.n_iterations = 1;
    auto many = one;
    many.jobs = 4;
    const auto a = sweep(data, one, quick_training());
    const auto b = sweep(data, one, quick_training());
    const auto c = sweep(data, many, quick_training());
    for (std::size_t s = 0; s < a.entries.size(); ++s) {
        EXPECT_EQ(a.entries[s].accuracies, b.entries[s].accuracies);
        EXPECT_EQ(a.entries[s].accuracies, c.entries[s].accuracies);
    }
}

TEST(EvalConfigCheck, NamesTheField) {
    EvalConfig cfg;
    cfg.n_iterations = 0;
    try {
        validate(cfg, 12);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::Configuration);
        EXPECT_NE(std::string(e.what()).find("evaluation.n_iterations"), std::string::npos);
    }
    cfg = {};
    cfg.subset_sizes = {13};
    EXPECT_THROW(validate(cfg, 12), Error);
    cfg = {};
    cfg.train_fraction = 1.0;
    EXPECT_THROW(validate(cfg, 12), Error);
    EXPECT_EQ(parse_fratio_scope("all"), FRatioScope::All);
    EXPECT_THROW(parse_fratio_scope("test"), Error);
}
