#include "vowelrec/fratio.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

#include "vowelrec/error.hpp"

namespace vowelrec {

LabeledFeatureSet pool_frames(const std::vector<FeatureSequence>& sequences, const std::vector<std::string>& classes) {
    LabeledFeatureSet set;
    set.classes = classes;
    for (const auto& seq : sequences) {
        if (!seq.label) throw Error(ErrorKind::Precondition, fmt::format("sequence '{}' has no label", seq.clip_id));
        auto it = std::find(classes.begin(), classes.end(), *seq.label);
        if (it == classes.end())
            throw Error(ErrorKind::Precondition, fmt::format("sequence label '{}' not in class list", *seq.label));
        const auto c = std::size_t(it - classes.begin());
        for (const auto& frame : seq.frames) {
            set.observations.push_back(frame);
            set.labels.push_back(c);
        }
    }
    return set;
}

ClassStats class_statistics(const LabeledFeatureSet& data) {
    const std::size_t n_classes = data.classes.size();
    const std::size_t dim = data.dim();
    if (n_classes == 0 || dim == 0) throw Error(ErrorKind::Precondition, "empty feature set");
    if (data.labels.size() != data.observations.size())
        throw Error(ErrorKind::Precondition, "labels and observations differ in length");

    ClassStats st;
    st.means.assign(n_classes, std::vector<double>(dim, 0.0));
    st.variances.assign(n_classes, std::vector<double>(dim, 0.0));
    st.counts.assign(n_classes, 0);
    st.overall_mean.assign(dim, 0.0);

    for (std::size_t r = 0; r < data.observations.size(); ++r) {
        const auto& x = data.observations[r];
        const std::size_t c = data.labels[r];
        if (x.size() != dim) throw Error(ErrorKind::Precondition, "observations differ in dimension");
        if (c >= n_classes) throw Error(ErrorKind::Precondition, "label index out of range");
        ++st.counts[c];
        for (std::size_t d = 0; d < dim; ++d) {
            st.means[c][d] += x[d];
            st.overall_mean[d] += x[d];
        }
    }
    for (std::size_t c = 0; c < n_classes; ++c) {
        if (st.counts[c] < 2)
            throw Error(ErrorKind::DegenerateClass, fmt::format("class '{}' has {} observation(s); at least 2 needed",
                                                                data.classes[c], st.counts[c]));
        for (double& m : st.means[c]) m /= double(st.counts[c]);
    }
    for (double& m : st.overall_mean) m /= double(data.observations.size());

    // Second pass about the class means.
    for (std::size_t r = 0; r < data.observations.size(); ++r) {
        const auto& x = data.observations[r];
        const std::size_t c = data.labels[r];
        for (std::size_t d = 0; d < dim; ++d) {
            const double dev = x[d] - st.means[c][d];
            st.variances[c][d] += dev * dev;
        }
    }
    for (std::size_t c = 0; c < n_classes; ++c)
        for (double& v : st.variances[c]) v /= double(st.counts[c]);
    return st;
}

FRatioReport f_ratio(const ClassStats& stats) {
    const std::size_t n_classes = stats.means.size();
    const std::size_t dim = stats.overall_mean.size();
    FRatioReport rep;
    rep.f.resize(dim);
    for (std::size_t d = 0; d < dim; ++d) {
        double between = 0.0, within = 0.0;
        for (std::size_t c = 0; c < n_classes; ++c) {
            const double dev = stats.means[c][d] - stats.overall_mean[d];
            between += dev * dev;
            within += stats.variances[c][d];
        }
        between /= double(n_classes);
        within /= double(n_classes);
        if (!(within > 0.0))
            throw Error(ErrorKind::ZeroWithinVariance,
                        fmt::format("coefficient {} has zero within-class variance in every class", d + 1));
        rep.f[d] = between / within;
    }
    rep.ranking.resize(dim);
    std::iota(rep.ranking.begin(), rep.ranking.end(), std::size_t{0});
    std::stable_sort(rep.ranking.begin(), rep.ranking.end(),
                     [&](std::size_t a, std::size_t b) { return rep.f[a] > rep.f[b]; });
    return rep;
}

FRatioReport f_ratio(const LabeledFeatureSet& data) { return f_ratio(class_statistics(data)); }

CoefficientSubset select_top_k(const FRatioReport& report, std::size_t k) {
    if (k < 1 || k > report.ranking.size())
        throw Error(ErrorKind::Precondition,
                    fmt::format("subset size {} outside 1..{}", k, report.ranking.size()));
    CoefficientSubset s;
    for (std::size_t i = 0; i < k; ++i) s.indices.push_back(report.ranking[i] + 1);
    return s;
}

CoefficientSubset full_subset(std::size_t dim) {
    CoefficientSubset s;
    s.indices.resize(dim);
    std::iota(s.indices.begin(), s.indices.end(), std::size_t{1});
    return s;
}

FeatureSequence project(const FeatureSequence& seq, const CoefficientSubset& subset) {
    const std::size_t dim = seq.dim();
    for (std::size_t idx : subset.indices)
        if (idx < 1 || idx > dim)
            throw Error(ErrorKind::Precondition, fmt::format("coefficient index {} outside 1..{}", idx, dim));
    FeatureSequence out;
    out.label = seq.label;
    out.clip_id = seq.clip_id;
    out.frames.reserve(seq.frames.size());
    for (const auto& frame : seq.frames) {
        FeatureVector v;
        v.reserve(subset.indices.size());
        for (std::size_t idx : subset.indices) v.push_back(frame[idx - 1]);
        out.frames.push_back(std::move(v));
    }
    return out;
}

}  // namespace vowelrec
