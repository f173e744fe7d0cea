#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "vowelrec/frontend.hpp"

namespace vowelrec {

/// Frame-level observations pooled across clips. `labels[r]` is an index
/// into `classes`.
struct LabeledFeatureSet {
    std::vector<std::vector<double>> observations;
    std::vector<std::size_t> labels;
    std::vector<std::string> classes;

    std::size_t dim() const { return observations.empty() ? 0 : observations.front().size(); }
};

/// Pools every frame of the given sequences. Sequence labels must all be
/// present in `classes`.
LabeledFeatureSet pool_frames(const std::vector<FeatureSequence>& sequences, const std::vector<std::string>& classes);

struct ClassStats {
    std::vector<std::vector<double>> means;      // [class][coefficient]
    std::vector<std::vector<double>> variances;  // population variance
    std::vector<std::size_t> counts;
    std::vector<double> overall_mean;
};

struct FRatioReport {
    std::vector<double> f;
    /// 0-based coefficient indices, descending F, ties by ascending index.
    std::vector<std::size_t> ranking;
};

/// Selected coefficients as 1-based indices, in selection order.
struct CoefficientSubset {
    std::vector<std::size_t> indices;

    std::size_t k() const { return indices.size(); }
};

ClassStats class_statistics(const LabeledFeatureSet& data);
FRatioReport f_ratio(const ClassStats& stats);
FRatioReport f_ratio(const LabeledFeatureSet& data);

CoefficientSubset select_top_k(const FRatioReport& report, std::size_t k);
CoefficientSubset full_subset(std::size_t dim);

FeatureSequence project(const FeatureSequence& seq, const CoefficientSubset& subset);

}  // namespace vowelrec
