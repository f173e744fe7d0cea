#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "vowelrec/frontend.hpp"

namespace vowelrec {

/// Diagonal-covariance Gaussian. `log_norm` caches
/// -0.5 * (D log 2pi + sum log variance) and must be refreshed after the
/// variances change.
struct GaussianComponent {
    std::vector<double> mean;
    std::vector<double> variance;
    double log_norm = 0.0;

    GaussianComponent() = default;
    GaussianComponent(std::vector<double> mean, std::vector<double> variance);

    void refresh();
    double log_pdf(std::span<const double> x) const;
    std::size_t dim() const { return mean.size(); }
};

struct GmmEmission {
    std::vector<double> weights;
    std::vector<GaussianComponent> components;

    std::size_t dim() const { return components.empty() ? 0 : components.front().dim(); }
};

/// log sum_m w_m N(x; mu_m, Sigma_m), evaluated with log-sum-exp.
double gmm_log_pdf(const GmmEmission& emission, std::span<const double> x);

struct HmmModel {
    std::string class_label;
    std::vector<double> pi;
    std::vector<std::vector<double>> trans;  // row-stochastic, [from][to]
    std::vector<GmmEmission> emissions;
    std::size_t dim = 0;

    std::size_t n_states() const { return pi.size(); }
};

/// Throws Precondition when shapes disagree or probabilities do not sum to
/// one within 1e-9.
void validate(const HmmModel& model);

struct TrainingConfig {
    int n_states = 3;
    int n_mix = 2;
    int max_iters = 20;
    double rel_tol = 1e-4;
    double variance_floor = 1e-4;
    std::uint64_t seed = 0;
};

void validate(const TrainingConfig& cfg);

/// log P(X) for the model, summed over all state paths.
double forward_log_likelihood(const HmmModel& model, const FeatureSequence& seq);

/// Total data log-likelihood recorded during training. Entry 0 belongs to
/// the initial model; entry i to the model after the i-th re-estimation.
struct TrainingTrace {
    std::vector<double> log_likelihood;
    bool converged = false;
};

/// Called after every re-estimation with the iteration number (from 1),
/// the total log-likelihood of the updated model, and the model itself.
using TrainingObserver = std::function<void(int, double, const HmmModel&)>;

/// Left-to-right initialization from uniform temporal segmentation and
/// per-state k-means, refined by Baum-Welch over all sequences.
HmmModel train(const std::vector<FeatureSequence>& sequences, const TrainingConfig& cfg,
               TrainingTrace* trace = nullptr, const TrainingObserver& observer = {});

/// The initial model that train() starts EM from.
HmmModel initialize_left_to_right(const std::vector<FeatureSequence>& sequences, const TrainingConfig& cfg);

struct Classification {
    std::size_t predicted = 0;
    std::vector<double> log_likelihoods;  // parallel to the model list
};

/// Maximum-likelihood decision; ties go to the earliest model.
Classification classify(const std::vector<HmmModel>& models, const FeatureSequence& seq);

}  // namespace vowelrec
