#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "vowelrec/fratio.hpp"
#include "vowelrec/hmm.hpp"
#include "vowelrec/rng.hpp"

namespace vowelrec {

/// Which clips the per-iteration F-ratio ranking is computed from.
enum class FRatioScope { Train, All };

const char* to_string(FRatioScope scope) noexcept;
FRatioScope parse_fratio_scope(const std::string& name);

struct EvalConfig {
    double train_fraction = 0.8;
    int n_iterations = 50;
    std::vector<std::size_t> subset_sizes{3, 4, 5, 6, 7, 8, 9, 10, 11, 12};
    std::uint64_t seed = 1;
    FRatioScope fratio_scope = FRatioScope::Train;
    /// When false every iteration uses all coefficients and the ranking is
    /// skipped; subset_sizes is ignored.
    bool feature_selection = true;
    /// Worker threads for iterations (<= 0: all cores). Results do not
    /// depend on it.
    int jobs = 0;
};

/// `dim` is the feature dimension the subset sizes must fit in.
void validate(const EvalConfig& cfg, std::size_t dim);

/// Clip indices on each side of a hold-out split, both ascending.
struct Split {
    std::vector<std::size_t> train;
    std::vector<std::size_t> test;
};

/// Per class, round(train_fraction * count) clips go to training, clamped
/// so both sides receive at least one.
Split stratified_split(std::span<const std::size_t> labels, std::size_t n_classes, double train_fraction, Rng& rng);

class ConfusionMatrix {
public:
    ConfusionMatrix() = default;
    explicit ConfusionMatrix(std::size_t n_classes) : n_(n_classes), counts_(n_classes * n_classes, 0) {}

    void add(std::size_t actual, std::size_t predicted, std::size_t count = 1) {
        counts_.at(actual * n_ + predicted) += count;
    }
    void merge(const ConfusionMatrix& other);

    std::size_t at(std::size_t actual, std::size_t predicted) const { return counts_.at(actual * n_ + predicted); }
    std::size_t size() const { return n_; }
    std::size_t total() const;
    std::size_t trace() const;
    std::size_t row_sum(std::size_t actual) const;
    /// Percentage of correct decisions; 0 when empty.
    double accuracy() const;

private:
    std::size_t n_ = 0;
    std::vector<std::size_t> counts_;
};

struct IterationResult {
    double accuracy = 0.0;
    ConfusionMatrix confusion;
};

/// Labeled per-clip features with a fixed class list.
struct FeatureCorpus {
    std::vector<FeatureSequence> sequences;
    std::vector<std::size_t> labels;  // index into classes, per sequence
    std::vector<std::string> classes;

    std::size_t dim() const { return sequences.empty() ? 0 : sequences.front().dim(); }
};

/// Builds a FeatureCorpus from sequences whose labels name entries of
/// `classes`.
FeatureCorpus make_feature_corpus(std::vector<FeatureSequence> sequences, std::vector<std::string> classes);

/// Seed used to train class `class_index` in hold-out iteration `iteration`.
std::uint64_t training_seed(std::uint64_t base, std::size_t iteration, std::size_t class_index);

/// Trains one model per class on the training clips (features projected
/// onto `subset`) and scores every test clip. Coordinates are taken in
/// ascending index order, so subsets holding the same coefficients give
/// identical results whatever their ranking order.
IterationResult run_iteration(const FeatureCorpus& data, const Split& split, const CoefficientSubset& subset,
                              const TrainingConfig& train_cfg);

/// Per-class models trained on the given clips (all clips when `clips` is
/// empty), on features projected onto `subset`.
std::vector<HmmModel> train_class_models(const FeatureCorpus& data, std::span<const std::size_t> clips,
                                         const CoefficientSubset& subset, const TrainingConfig& train_cfg,
                                         std::size_t iteration = 0);

/// F-ratio ranking over the frames of the given clips.
FRatioReport rank_coefficients(const FeatureCorpus& data, std::span<const std::size_t> clips);

struct SweepEntry {
    std::size_t k = 0;
    double mean_accuracy = 0.0;
    double std_accuracy = 0.0;
    std::vector<double> accuracies;              // per iteration
    std::vector<CoefficientSubset> subsets;      // per iteration, ranking order
    ConfusionMatrix confusion;                   // summed over iterations
};

struct SweepReport {
    std::vector<std::string> classes;
    int n_iterations = 0;
    std::vector<Split> splits;            // per iteration
    std::vector<FRatioReport> rankings;   // per iteration; empty without selection
    std::vector<SweepEntry> entries;      // one per subset size
};

SweepReport sweep(const FeatureCorpus& data, const EvalConfig& eval_cfg, const TrainingConfig& train_cfg);

}  // namespace vowelrec
