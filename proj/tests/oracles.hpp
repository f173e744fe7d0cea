#pragma once

// Brute-force reference computations used only by tests. Nothing here
// calls into the library's numeric code paths.

#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <numbers>
#include <vector>

#include "vowelrec/hmm.hpp"

namespace oracle {

/// One-sided |X[m]|^2 / n from a direct O(N^2) DFT sum with zero padding to
/// `nfft`.
inline std::vector<double> direct_power_spectrum(const std::vector<double>& x, std::size_t nfft) {
    const std::size_t n = x.size();
    std::vector<double> p(nfft / 2 + 1);
    for (std::size_t m = 0; m < p.size(); ++m) {
        std::complex<long double> acc = 0;
        for (std::size_t i = 0; i < n; ++i) {
            const long double ang = -2.0L * std::numbers::pi_v<long double> * (long double)(m * i % nfft) / (long double)nfft;
            acc += (long double)x[i] * std::complex<long double>(std::cos(ang), std::sin(ang));
        }
        p[m] = double(std::norm(acc) / (long double)n);
    }
    return p;
}

/// Literal transcription of the between/within F-ratio over raw rows.
inline std::vector<double> brute_force_fratio(const std::vector<std::vector<double>>& rows,
                                              const std::vector<std::size_t>& labels, std::size_t n_classes) {
    const std::size_t dim = rows.front().size();
    std::vector<double> f(dim);
    for (std::size_t d = 0; d < dim; ++d) {
        std::vector<double> mu(n_classes, 0.0), s(n_classes, 0.0);
        std::vector<double> m(n_classes, 0.0);
        double grand = 0.0;
        for (std::size_t r = 0; r < rows.size(); ++r) {
            mu[labels[r]] += rows[r][d];
            m[labels[r]] += 1.0;
            grand += rows[r][d];
        }
        grand /= double(rows.size());
        for (std::size_t i = 0; i < n_classes; ++i) mu[i] /= m[i];
        for (std::size_t r = 0; r < rows.size(); ++r) {
            const double e = rows[r][d] - mu[labels[r]];
            s[labels[r]] += e * e / m[labels[r]];
        }
        double num = 0.0, den = 0.0;
        for (std::size_t i = 0; i < n_classes; ++i) {
            num += (mu[i] - grand) * (mu[i] - grand);
            den += s[i];
        }
        f[d] = (num / double(n_classes)) / (den / double(n_classes));
    }
    return f;
}

/// Linear-domain mixture density: sum_m w_m prod_d N(x_d; mu, var).
inline double naive_gmm_pdf(const vowelrec::GmmEmission& em, const std::vector<double>& x) {
    double total = 0.0;
    for (std::size_t m = 0; m < em.weights.size(); ++m) {
        double p = em.weights[m];
        const auto& c = em.components[m];
        for (std::size_t d = 0; d < x.size(); ++d) {
            const double dev = x[d] - c.mean[d];
            p *= std::exp(-0.5 * dev * dev / c.variance[d]) / std::sqrt(2.0 * std::numbers::pi * c.variance[d]);
        }
        total += p;
    }
    return total;
}

struct PathSummary {
    double log_marginal;   // log sum over all state paths of P(X, S)
    double log_best_path;  // max over paths of log P(X, S)
};

/// Enumerates every state path s_1..s_T and sums
/// exp(log pi(s_1) + sum log a(s_{t-1}, s_t) + sum log b(x_t | s_t)).
inline PathSummary enumerate_paths(const vowelrec::HmmModel& model, const std::vector<std::vector<double>>& xs) {
    const std::size_t q = model.n_states();
    const std::size_t t_len = xs.size();
    std::vector<std::vector<double>> log_b(t_len, std::vector<double>(q));
    for (std::size_t t = 0; t < t_len; ++t)
        for (std::size_t s = 0; s < q; ++s) log_b[t][s] = std::log(naive_gmm_pdf(model.emissions[s], xs[t]));

    std::vector<double> joints;
    std::vector<std::size_t> path(t_len, 0);
    for (;;) {
        double lp = std::log(model.pi[path[0]]) + log_b[0][path[0]];
        for (std::size_t t = 1; t < t_len; ++t) lp += std::log(model.trans[path[t - 1]][path[t]]) + log_b[t][path[t]];
        joints.push_back(lp);
        std::size_t pos = 0;
        while (pos < t_len && ++path[pos] == q) path[pos++] = 0;
        if (pos == t_len) break;
    }
    double best = -std::numeric_limits<double>::infinity();
    for (double v : joints) best = std::max(best, v);
    long double sum = 0.0L;
    for (double v : joints)
        if (std::isfinite(v)) sum += std::exp((long double)(v - best));
    return {best + double(std::log(sum)), best};
}

}  // namespace oracle
