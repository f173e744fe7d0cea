#include "vowelrec/eval.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "vowelrec/error.hpp"
#include "vowelrec/parallel.hpp"

namespace vowelrec {

const char* to_string(FRatioScope scope) noexcept { return scope == FRatioScope::All ? "all" : "train"; }

FRatioScope parse_fratio_scope(const std::string& name) {
    if (name == "train") return FRatioScope::Train;
    if (name == "all") return FRatioScope::All;
    throw Error(ErrorKind::Configuration, fmt::format("evaluation.fratio_scope: unknown value '{}'", name));
}

void validate(const EvalConfig& cfg, std::size_t dim) {
    if (!(cfg.train_fraction > 0.0 && cfg.train_fraction < 1.0))
        throw Error(ErrorKind::Configuration, "evaluation.train_fraction: must lie strictly between 0 and 1");
    if (cfg.n_iterations < 1) throw Error(ErrorKind::Configuration, "evaluation.n_iterations: must be at least 1");
    if (!cfg.feature_selection) return;
    if (cfg.subset_sizes.empty())
        throw Error(ErrorKind::Configuration, "evaluation.subset_sizes: at least one size is required");
    for (std::size_t k : cfg.subset_sizes)
        if (k < 1 || k > dim)
            throw Error(ErrorKind::Configuration,
                        fmt::format("evaluation.subset_sizes: {} outside 1..{}", k, dim));
}

Split stratified_split(std::span<const std::size_t> labels, std::size_t n_classes, double train_fraction, Rng& rng) {
    if (!(train_fraction > 0.0 && train_fraction < 1.0))
        throw Error(ErrorKind::Precondition, "train fraction must lie strictly between 0 and 1");
    std::vector<std::vector<std::size_t>> by_class(n_classes);
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] >= n_classes) throw Error(ErrorKind::Precondition, "label index out of range");
        by_class[labels[i]].push_back(i);
    }
    Split split;
    for (std::size_t c = 0; c < n_classes; ++c) {
        auto& idx = by_class[c];
        if (idx.size() < 2)
            throw Error(ErrorKind::DegenerateClass,
                        fmt::format("class {} has {} clip(s); a hold-out split needs at least 2", c, idx.size()));
        std::shuffle(idx.begin(), idx.end(), rng);
        const auto n_train = std::clamp<std::size_t>(std::size_t(std::llround(train_fraction * double(idx.size()))),
                                                     1, idx.size() - 1);
        split.train.insert(split.train.end(), idx.begin(), idx.begin() + std::ptrdiff_t(n_train));
        split.test.insert(split.test.end(), idx.begin() + std::ptrdiff_t(n_train), idx.end());
    }
    std::sort(split.train.begin(), split.train.end());
    std::sort(split.test.begin(), split.test.end());
    return split;
}

// ---------------------------------------------------------------------------

void ConfusionMatrix::merge(const ConfusionMatrix& other) {
    if (other.n_ != n_) throw Error(ErrorKind::Precondition, "confusion matrices differ in size");
    for (std::size_t i = 0; i < counts_.size(); ++i) counts_[i] += other.counts_[i];
}

std::size_t ConfusionMatrix::total() const {
    std::size_t s = 0;
    for (auto c : counts_) s += c;
    return s;
}

std::size_t ConfusionMatrix::trace() const {
    std::size_t s = 0;
    for (std::size_t i = 0; i < n_; ++i) s += at(i, i);
    return s;
}

std::size_t ConfusionMatrix::row_sum(std::size_t actual) const {
    std::size_t s = 0;
    for (std::size_t j = 0; j < n_; ++j) s += at(actual, j);
    return s;
}

double ConfusionMatrix::accuracy() const {
    const std::size_t t = total();
    return t == 0 ? 0.0 : 100.0 * double(trace()) / double(t);
}

// ---------------------------------------------------------------------------

FeatureCorpus make_feature_corpus(std::vector<FeatureSequence> sequences, std::vector<std::string> classes) {
    FeatureCorpus fc;
    fc.classes = std::move(classes);
    for (const auto& seq : sequences) {
        if (!seq.label) throw Error(ErrorKind::Precondition, fmt::format("sequence '{}' has no label", seq.clip_id));
        auto it = std::find(fc.classes.begin(), fc.classes.end(), *seq.label);
        if (it == fc.classes.end())
            throw Error(ErrorKind::Precondition, fmt::format("label '{}' is not a known class", *seq.label));
        fc.labels.push_back(std::size_t(it - fc.classes.begin()));
    }
    fc.sequences = std::move(sequences);
    return fc;
}

std::uint64_t training_seed(std::uint64_t base, std::size_t iteration, std::size_t class_index) {
    return derive_seed(derive_seed(base, iteration), class_index);
}

namespace {

CoefficientSubset ascending(CoefficientSubset subset) {
    std::sort(subset.indices.begin(), subset.indices.end());
    return subset;
}

}  // namespace

std::vector<HmmModel> train_class_models(const FeatureCorpus& data, std::span<const std::size_t> clips,
                                         const CoefficientSubset& subset, const TrainingConfig& train_cfg,
                                         std::size_t iteration) {
    const CoefficientSubset coords = ascending(subset);
    std::vector<std::vector<FeatureSequence>> per_class(data.classes.size());
    auto add = [&](std::size_t i) { per_class[data.labels[i]].push_back(project(data.sequences[i], coords)); };
    if (clips.empty())
        for (std::size_t i = 0; i < data.sequences.size(); ++i) add(i);
    else
        for (std::size_t i : clips) add(i);

    std::vector<HmmModel> models;
    for (std::size_t c = 0; c < data.classes.size(); ++c) {
        if (per_class[c].empty())
            throw Error(ErrorKind::DegenerateClass, fmt::format("no training clips for class '{}'", data.classes[c]));
        TrainingConfig cfg = train_cfg;
        cfg.seed = training_seed(train_cfg.seed, iteration, c);
        HmmModel m = train(per_class[c], cfg);
        m.class_label = data.classes[c];
        models.push_back(std::move(m));
    }
    return models;
}

namespace {

IterationResult score_iteration(const FeatureCorpus& data, const Split& split, const CoefficientSubset& subset,
                                const TrainingConfig& train_cfg, std::size_t iteration) {
    const auto models = train_class_models(data, split.train, subset, train_cfg, iteration);
    const CoefficientSubset coords = ascending(subset);
    IterationResult res;
    res.confusion = ConfusionMatrix(data.classes.size());
    for (std::size_t i : split.test) {
        const auto decision = classify(models, project(data.sequences[i], coords));
        res.confusion.add(data.labels[i], decision.predicted);
    }
    res.accuracy = res.confusion.accuracy();
    return res;
}

}  // namespace

IterationResult run_iteration(const FeatureCorpus& data, const Split& split, const CoefficientSubset& subset,
                              const TrainingConfig& train_cfg) {
    return score_iteration(data, split, subset, train_cfg, 0);
}

FRatioReport rank_coefficients(const FeatureCorpus& data, std::span<const std::size_t> clips) {
    std::vector<FeatureSequence> chosen;
    chosen.reserve(clips.size());
    for (std::size_t i : clips) chosen.push_back(data.sequences[i]);
    return f_ratio(pool_frames(chosen, data.classes));
}

SweepReport sweep(const FeatureCorpus& data, const EvalConfig& eval_cfg, const TrainingConfig& train_cfg) {
    const std::size_t dim = data.dim();
    validate(eval_cfg, dim);
    validate(train_cfg);

    SweepReport rep;
    rep.classes = data.classes;
    rep.n_iterations = eval_cfg.n_iterations;
    const auto n_iter = std::size_t(eval_cfg.n_iterations);

    std::vector<std::size_t> all(data.sequences.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    FRatioReport global_rank;
    if (eval_cfg.feature_selection && eval_cfg.fratio_scope == FRatioScope::All)
        global_rank = rank_coefficients(data, all);

    for (std::size_t it = 0; it < n_iter; ++it) {
        Rng rng(derive_seed(eval_cfg.seed, it));
        rep.splits.push_back(stratified_split(data.labels, data.classes.size(), eval_cfg.train_fraction, rng));
        if (eval_cfg.feature_selection)
            rep.rankings.push_back(eval_cfg.fratio_scope == FRatioScope::All
                                       ? global_rank
                                       : rank_coefficients(data, rep.splits.back().train));
    }

    const std::vector<std::size_t> sizes =
        eval_cfg.feature_selection ? eval_cfg.subset_sizes : std::vector<std::size_t>{dim};
    std::vector<std::vector<IterationResult>> results(sizes.size(), std::vector<IterationResult>(n_iter));
    for (std::size_t s = 0; s < sizes.size(); ++s) {
        SweepEntry e;
        e.k = sizes[s];
        for (std::size_t it = 0; it < n_iter; ++it)
            e.subsets.push_back(eval_cfg.feature_selection ? select_top_k(rep.rankings[it], sizes[s]) : full_subset(dim));
        rep.entries.push_back(std::move(e));
    }

    parallel_for(sizes.size() * n_iter, eval_cfg.jobs, [&](std::size_t task) {
        const std::size_t s = task / n_iter, it = task % n_iter;
        results[s][it] = score_iteration(data, rep.splits[it], rep.entries[s].subsets[it], train_cfg, it);
    });

    for (std::size_t s = 0; s < sizes.size(); ++s) {
        auto& e = rep.entries[s];
        e.confusion = ConfusionMatrix(data.classes.size());
        double sum = 0.0;
        for (const auto& r : results[s]) {
            e.accuracies.push_back(r.accuracy);
            e.confusion.merge(r.confusion);
            sum += r.accuracy;
        }
        e.mean_accuracy = sum / double(n_iter);
        double ss = 0.0;
        for (double a : e.accuracies) ss += (a - e.mean_accuracy) * (a - e.mean_accuracy);
        e.std_accuracy = n_iter > 1 ? std::sqrt(ss / double(n_iter - 1)) : 0.0;
    }
    return rep;
}

}  // namespace vowelrec
