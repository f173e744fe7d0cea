#include "vowelrec/hmm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include <fmt/format.h>

#include "vowelrec/error.hpp"
#include "vowelrec/rng.hpp"

namespace vowelrec {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double log_sum_exp(std::span<const double> v) {
    double hi = kNegInf;
    for (double x : v) hi = std::max(hi, x);
    if (hi == kNegInf) return kNegInf;
    double s = 0.0;
    for (double x : v) s += std::exp(x - hi);
    return hi + std::log(s);
}

double safe_log(double p) { return p > 0.0 ? std::log(p) : kNegInf; }

}  // namespace

// ---------------------------------------------------------------------------
// Emissions

GaussianComponent::GaussianComponent(std::vector<double> m, std::vector<double> v)
    : mean(std::move(m)), variance(std::move(v)) {
    if (mean.size() != variance.size()) throw Error(ErrorKind::Precondition, "mean/variance dimension mismatch");
    refresh();
}

void GaussianComponent::refresh() {
    double s = double(mean.size()) * std::log(2.0 * std::numbers::pi);
    for (double v : variance) {
        if (!(v > 0.0)) throw Error(ErrorKind::DegenerateData, "non-positive Gaussian variance");
        s += std::log(v);
    }
    log_norm = -0.5 * s;
}

double GaussianComponent::log_pdf(std::span<const double> x) const {
    double q = 0.0;
    for (std::size_t d = 0; d < mean.size(); ++d) {
        const double dev = x[d] - mean[d];
        q += dev * dev / variance[d];
    }
    return log_norm - 0.5 * q;
}

double gmm_log_pdf(const GmmEmission& em, std::span<const double> x) {
    if (em.components.empty()) throw Error(ErrorKind::Precondition, "emission has no components");
    if (x.size() != em.dim())
        throw Error(ErrorKind::Precondition,
                    fmt::format("feature dimension {} does not match model dimension {}", x.size(), em.dim()));
    double terms[64];
    std::vector<double> heap;
    std::span<double> buf;
    if (em.components.size() <= 64) {
        buf = std::span<double>(terms, em.components.size());
    } else {
        heap.resize(em.components.size());
        buf = heap;
    }
    for (std::size_t m = 0; m < em.components.size(); ++m)
        buf[m] = em.weights[m] > 0.0 ? std::log(em.weights[m]) + em.components[m].log_pdf(x) : kNegInf;
    return log_sum_exp(buf);
}

// ---------------------------------------------------------------------------
// Model checks

void validate(const TrainingConfig& cfg) {
    if (cfg.n_states < 1) throw Error(ErrorKind::Configuration, "training.n_states: must be at least 1");
    if (cfg.n_mix < 1) throw Error(ErrorKind::Configuration, "training.n_mix: must be at least 1");
    if (cfg.max_iters < 1) throw Error(ErrorKind::Configuration, "training.max_iters: must be at least 1");
    if (!(cfg.rel_tol > 0.0)) throw Error(ErrorKind::Configuration, "training.rel_tol: must be positive");
    if (!(cfg.variance_floor > 0.0))
        throw Error(ErrorKind::Configuration, "training.variance_floor: must be positive");
}

void validate(const HmmModel& model) {
    const std::size_t q = model.n_states();
    auto sums_to_one = [](const std::vector<double>& p) {
        double s = 0.0;
        for (double v : p) {
            if (!(v >= 0.0)) return false;
            s += v;
        }
        return std::abs(s - 1.0) <= 1e-9;
    };
    if (q == 0 || model.trans.size() != q || model.emissions.size() != q)
        throw Error(ErrorKind::Precondition, "model state counts disagree");
    if (!sums_to_one(model.pi)) throw Error(ErrorKind::Precondition, "initial distribution does not sum to 1");
    for (std::size_t s = 0; s < q; ++s) {
        if (model.trans[s].size() != q || !sums_to_one(model.trans[s]))
            throw Error(ErrorKind::Precondition, fmt::format("transition row {} is not stochastic", s));
        const auto& em = model.emissions[s];
        if (em.components.empty() || em.weights.size() != em.components.size() || !sums_to_one(em.weights))
            throw Error(ErrorKind::Precondition, fmt::format("mixture weights of state {} are not normalized", s));
        for (const auto& c : em.components)
            if (c.dim() != model.dim || c.variance.size() != model.dim)
                throw Error(ErrorKind::Precondition, "component dimension differs from model dimension");
    }
}

// ---------------------------------------------------------------------------
// Forward / backward

namespace {

struct LogModel {
    std::vector<double> log_pi;
    std::vector<std::vector<double>> log_trans;

    explicit LogModel(const HmmModel& m) {
        for (double p : m.pi) log_pi.push_back(safe_log(p));
        for (const auto& row : m.trans) {
            std::vector<double> r;
            for (double p : row) r.push_back(safe_log(p));
            log_trans.push_back(std::move(r));
        }
    }
};

void check_sequence(const HmmModel& model, const FeatureSequence& seq) {
    if (seq.frames.empty()) throw Error(ErrorKind::Precondition, fmt::format("sequence '{}' is empty", seq.clip_id));
    for (const auto& f : seq.frames)
        if (f.size() != model.dim)
            throw Error(ErrorKind::Precondition, fmt::format("sequence '{}' has dimension {}, model expects {}",
                                                             seq.clip_id, f.size(), model.dim));
}

// alpha[t][q] in log domain. Returns log P(X).
double forward_pass(const LogModel& lm, const std::vector<std::vector<double>>& log_b,
                    std::vector<std::vector<double>>& alpha) {
    const std::size_t t_len = log_b.size();
    const std::size_t q_len = lm.log_pi.size();
    alpha.assign(t_len, std::vector<double>(q_len, kNegInf));
    std::vector<double> terms(q_len);
    for (std::size_t q = 0; q < q_len; ++q) alpha[0][q] = lm.log_pi[q] + log_b[0][q];
    for (std::size_t t = 1; t < t_len; ++t) {
        for (std::size_t q = 0; q < q_len; ++q) {
            for (std::size_t p = 0; p < q_len; ++p) terms[p] = alpha[t - 1][p] + lm.log_trans[p][q];
            alpha[t][q] = log_sum_exp(terms) + log_b[t][q];
        }
    }
    return log_sum_exp(alpha[t_len - 1]);
}

void backward_pass(const LogModel& lm, const std::vector<std::vector<double>>& log_b,
                   std::vector<std::vector<double>>& beta) {
    const std::size_t t_len = log_b.size();
    const std::size_t q_len = lm.log_pi.size();
    beta.assign(t_len, std::vector<double>(q_len, 0.0));
    std::vector<double> terms(q_len);
    for (std::size_t t = t_len - 1; t-- > 0;) {
        for (std::size_t p = 0; p < q_len; ++p) {
            for (std::size_t q = 0; q < q_len; ++q) terms[q] = lm.log_trans[p][q] + log_b[t + 1][q] + beta[t + 1][q];
            beta[t][p] = log_sum_exp(terms);
        }
    }
}

}  // namespace

double forward_log_likelihood(const HmmModel& model, const FeatureSequence& seq) {
    check_sequence(model, seq);
    const LogModel lm(model);
    std::vector<std::vector<double>> log_b(seq.size(), std::vector<double>(model.n_states()));
    for (std::size_t t = 0; t < seq.size(); ++t)
        for (std::size_t q = 0; q < model.n_states(); ++q) log_b[t][q] = gmm_log_pdf(model.emissions[q], seq.frames[t]);
    std::vector<std::vector<double>> alpha;
    return forward_pass(lm, log_b, alpha);
}

Classification classify(const std::vector<HmmModel>& models, const FeatureSequence& seq) {
    if (models.empty()) throw Error(ErrorKind::Precondition, "no models to classify against");
    Classification out;
    out.log_likelihoods.reserve(models.size());
    for (const auto& m : models) out.log_likelihoods.push_back(forward_log_likelihood(m, seq));
    for (std::size_t i = 1; i < models.size(); ++i)
        if (out.log_likelihoods[i] > out.log_likelihoods[out.predicted]) out.predicted = i;
    return out;
}

// ---------------------------------------------------------------------------
// Initialization

namespace {

double sq_distance(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t d = 0; d < a.size(); ++d) s += (a[d] - b[d]) * (a[d] - b[d]);
    return s;
}

// k-means++ seeding followed by Lloyd iterations. Returns cluster ids.
std::vector<std::size_t> kmeans(const std::vector<const FeatureVector*>& points, std::size_t k, Rng& rng) {
    const std::size_t n = points.size();
    const std::size_t dim = points.front()->size();
    std::vector<FeatureVector> centers;
    centers.push_back(*points[std::uniform_int_distribution<std::size_t>(0, n - 1)(rng)]);
    std::vector<double> d2(n);
    while (centers.size() < k) {
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double best = std::numeric_limits<double>::infinity();
            for (const auto& c : centers) best = std::min(best, sq_distance(*points[i], c));
            d2[i] = best;
            total += best;
        }
        std::size_t pick = 0;
        if (total > 0.0) {
            double r = std::uniform_real_distribution<double>(0.0, total)(rng);
            while (pick + 1 < n && r >= d2[pick]) r -= d2[pick++];
        } else {
            pick = std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
        }
        centers.push_back(*points[pick]);
    }

    std::vector<std::size_t> assign(n, 0);
    std::vector<std::size_t> count(k, 0);
    for (int iter = 0; iter < 50; ++iter) {
        bool changed = iter == 0;
        for (std::size_t i = 0; i < n; ++i) {
            std::size_t best = 0;
            double best_d = sq_distance(*points[i], centers[0]);
            for (std::size_t c = 1; c < k; ++c) {
                const double d = sq_distance(*points[i], centers[c]);
                if (d < best_d) {
                    best_d = d;
                    best = c;
                }
            }
            changed = changed || assign[i] != best;
            assign[i] = best;
        }
        if (!changed) break;

        std::fill(count.begin(), count.end(), 0);
        for (auto& c : centers) std::fill(c.begin(), c.end(), 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            ++count[assign[i]];
            for (std::size_t d = 0; d < dim; ++d) centers[assign[i]][d] += (*points[i])[d];
        }
        for (std::size_t c = 0; c < k; ++c)
            if (count[c] > 0)
                for (double& v : centers[c]) v /= double(count[c]);

        // An empty cluster takes over the point farthest from its own centre
        // among clusters that can spare one.
        for (std::size_t c = 0; c < k; ++c) {
            if (count[c] > 0) continue;
            std::size_t far = n;
            double far_d = -1.0;
            for (std::size_t i = 0; i < n; ++i) {
                if (count[assign[i]] < 2) continue;
                const double d = sq_distance(*points[i], centers[assign[i]]);
                if (d > far_d) {
                    far_d = d;
                    far = i;
                }
            }
            if (far == n) break;
            --count[assign[far]];
            assign[far] = c;
            count[c] = 1;
            centers[c] = *points[far];
        }
    }
    return assign;
}

GmmEmission emission_from_points(const std::vector<const FeatureVector*>& points, std::size_t n_mix,
                                 double floor, Rng& rng) {
    const std::size_t dim = points.front()->size();
    const std::size_t k = std::min(n_mix, points.size());
    std::vector<std::size_t> assign = k > 1 ? kmeans(points, k, rng) : std::vector<std::size_t>(points.size(), 0);

    std::vector<double> count(n_mix, 0.0);
    std::vector<std::vector<double>> sum(n_mix, std::vector<double>(dim, 0.0));
    for (std::size_t i = 0; i < points.size(); ++i) {
        count[assign[i]] += 1.0;
        for (std::size_t d = 0; d < dim; ++d) sum[assign[i]][d] += (*points[i])[d];
    }
    GmmEmission em;
    std::vector<std::vector<double>> means(n_mix, std::vector<double>(dim, 0.0));
    std::vector<std::vector<double>> vars(n_mix, std::vector<double>(dim, 0.0));
    for (std::size_t m = 0; m < n_mix; ++m)
        if (count[m] > 0)
            for (std::size_t d = 0; d < dim; ++d) means[m][d] = sum[m][d] / count[m];
    for (std::size_t i = 0; i < points.size(); ++i)
        for (std::size_t d = 0; d < dim; ++d) {
            const double dev = (*points[i])[d] - means[assign[i]][d];
            vars[assign[i]][d] += dev * dev;
        }
    // Fewer points than components: extra components copy the first one
    // and share its mass.
    for (std::size_t m = 0; m < n_mix; ++m) {
        if (count[m] == 0) {
            means[m] = means[0];
            vars[m] = vars[0];
            count[m] = count[0];
        } else {
            for (double& v : vars[m]) v /= count[m];
        }
        for (double& v : vars[m]) v = std::max(v, floor);
    }
    double total = 0.0;
    for (double c : count) total += c;
    for (std::size_t m = 0; m < n_mix; ++m) {
        em.weights.push_back(count[m] / total);
        em.components.emplace_back(means[m], vars[m]);
    }
    return em;
}

void check_training_data(const std::vector<FeatureSequence>& sequences, const TrainingConfig& cfg) {
    validate(cfg);
    if (sequences.empty()) throw Error(ErrorKind::Precondition, "no training sequences");
    const std::size_t dim = sequences.front().dim();
    if (dim == 0) throw Error(ErrorKind::Precondition, "training sequences have zero dimension");
    const FeatureVector* first = nullptr;
    bool all_identical = true;
    for (const auto& seq : sequences) {
        if (seq.size() < std::size_t(cfg.n_states))
            throw Error(ErrorKind::Precondition,
                        fmt::format("sequence '{}' has {} frames, fewer than {} states", seq.clip_id, seq.size(),
                                    cfg.n_states));
        for (const auto& f : seq.frames) {
            if (f.size() != dim) throw Error(ErrorKind::Precondition, "training sequences differ in dimension");
            for (double v : f)
                if (!std::isfinite(v))
                    throw Error(ErrorKind::DegenerateData, fmt::format("non-finite feature in '{}'", seq.clip_id));
            if (!first)
                first = &f;
            else if (all_identical && f != *first)
                all_identical = false;
        }
    }
    if (all_identical && cfg.n_states * cfg.n_mix > 1)
        throw Error(ErrorKind::DegenerateData,
                    "all training observations are identical; only a single-state, single-component model "
                    "is identifiable");
}

}  // namespace

HmmModel initialize_left_to_right(const std::vector<FeatureSequence>& sequences, const TrainingConfig& cfg) {
    check_training_data(sequences, cfg);
    const auto n_states = std::size_t(cfg.n_states);
    const std::size_t dim = sequences.front().dim();

    std::vector<std::vector<const FeatureVector*>> segment(n_states);
    for (const auto& seq : sequences) {
        const std::size_t t_len = seq.size();
        for (std::size_t q = 0; q < n_states; ++q) {
            const std::size_t begin = q * t_len / n_states, end = (q + 1) * t_len / n_states;
            for (std::size_t t = begin; t < end; ++t) segment[q].push_back(&seq.frames[t]);
        }
    }

    HmmModel model;
    model.dim = dim;
    model.pi.assign(n_states, 0.0);
    model.pi[0] = 1.0;
    model.trans.assign(n_states, std::vector<double>(n_states, 0.0));
    const double n_seq = double(sequences.size());
    for (std::size_t q = 0; q < n_states; ++q) {
        if (q + 1 == n_states) {
            model.trans[q][q] = 1.0;
            continue;
        }
        // Every sequence leaves state q exactly once in the segmentation.
        const double stay = std::clamp(1.0 - n_seq / double(segment[q].size()), 0.05, 0.95);
        model.trans[q][q] = stay;
        model.trans[q][q + 1] = 1.0 - stay;
    }
    for (std::size_t q = 0; q < n_states; ++q) {
        Rng rng(derive_seed(cfg.seed, q));
        model.emissions.push_back(emission_from_points(segment[q], std::size_t(cfg.n_mix), cfg.variance_floor, rng));
    }
    return model;
}

// ---------------------------------------------------------------------------
// Baum-Welch

namespace {

struct Accumulators {
    std::vector<double> pi;
    std::vector<std::vector<double>> trans;
    std::vector<std::vector<double>> occ;                     // [q][m]
    std::vector<std::vector<std::vector<double>>> sum_x;      // [q][m][d]
    std::vector<std::vector<std::vector<double>>> sum_x2;

    Accumulators(std::size_t q, std::size_t m, std::size_t d)
        : pi(q, 0.0),
          trans(q, std::vector<double>(q, 0.0)),
          occ(q, std::vector<double>(m, 0.0)),
          sum_x(q, std::vector<std::vector<double>>(m, std::vector<double>(d, 0.0))),
          sum_x2(q, std::vector<std::vector<double>>(m, std::vector<double>(d, 0.0))) {}
};

// Returns total log-likelihood of all sequences under `model`.
double expectation(const HmmModel& model, const std::vector<FeatureSequence>& sequences, Accumulators& acc) {
    const LogModel lm(model);
    const std::size_t q_len = model.n_states();
    const std::size_t m_len = model.emissions.front().components.size();
    const std::size_t dim = model.dim;
    double total = 0.0;

    std::vector<std::vector<double>> alpha, beta, log_b;
    std::vector<std::vector<std::vector<double>>> log_comp;
    for (const auto& seq : sequences) {
        const std::size_t t_len = seq.size();
        log_b.assign(t_len, std::vector<double>(q_len));
        log_comp.assign(t_len, std::vector<std::vector<double>>(q_len, std::vector<double>(m_len)));
        for (std::size_t t = 0; t < t_len; ++t)
            for (std::size_t q = 0; q < q_len; ++q) {
                const auto& em = model.emissions[q];
                for (std::size_t m = 0; m < m_len; ++m)
                    log_comp[t][q][m] =
                        em.weights[m] > 0.0 ? std::log(em.weights[m]) + em.components[m].log_pdf(seq.frames[t]) : kNegInf;
                log_b[t][q] = log_sum_exp(log_comp[t][q]);
            }
        const double ll = forward_pass(lm, log_b, alpha);
        if (!std::isfinite(ll))
            throw Error(ErrorKind::DegenerateData, fmt::format("sequence '{}' has zero likelihood", seq.clip_id));
        backward_pass(lm, log_b, beta);
        total += ll;

        for (std::size_t t = 0; t < t_len; ++t) {
            for (std::size_t q = 0; q < q_len; ++q) {
                const double gamma = std::exp(alpha[t][q] + beta[t][q] - ll);
                if (t == 0) acc.pi[q] += gamma;
                if (gamma == 0.0) continue;
                for (std::size_t m = 0; m < m_len; ++m) {
                    const double g = gamma * std::exp(log_comp[t][q][m] - log_b[t][q]);
                    if (g == 0.0) continue;
                    acc.occ[q][m] += g;
                    const auto& x = seq.frames[t];
                    for (std::size_t d = 0; d < dim; ++d) {
                        acc.sum_x[q][m][d] += g * x[d];
                        acc.sum_x2[q][m][d] += g * x[d] * x[d];
                    }
                }
            }
            if (t + 1 < t_len)
                for (std::size_t p = 0; p < q_len; ++p)
                    for (std::size_t q = 0; q < q_len; ++q) {
                        if (lm.log_trans[p][q] == kNegInf) continue;
                        acc.trans[p][q] += std::exp(alpha[t][p] + lm.log_trans[p][q] + log_b[t + 1][q] +
                                                    beta[t + 1][q] - ll);
                    }
        }
    }
    return total;
}

void normalize(std::vector<double>& p) {
    double s = 0.0;
    for (double v : p) s += v;
    for (double& v : p) v /= s;
}

void maximization(HmmModel& model, const Accumulators& acc, double floor) {
    const std::size_t q_len = model.n_states();
    model.pi = acc.pi;
    normalize(model.pi);
    for (std::size_t p = 0; p < q_len; ++p) {
        double row = 0.0;
        for (double v : acc.trans[p]) row += v;
        if (row > 0.0) {
            model.trans[p] = acc.trans[p];
            normalize(model.trans[p]);
        }
    }
    for (std::size_t q = 0; q < q_len; ++q) {
        auto& em = model.emissions[q];
        double state_occ = 0.0;
        for (double v : acc.occ[q]) state_occ += v;
        if (!(state_occ > 0.0)) continue;
        for (std::size_t m = 0; m < em.components.size(); ++m) {
            const double occ = acc.occ[q][m];
            em.weights[m] = occ / state_occ;
            if (!(occ > 0.0)) continue;
            auto& comp = em.components[m];
            for (std::size_t d = 0; d < model.dim; ++d) {
                const double mean = acc.sum_x[q][m][d] / occ;
                comp.mean[d] = mean;
                comp.variance[d] = std::max(acc.sum_x2[q][m][d] / occ - mean * mean, floor);
            }
            comp.refresh();
        }
        normalize(em.weights);
    }
}

}  // namespace

HmmModel train(const std::vector<FeatureSequence>& sequences, const TrainingConfig& cfg, TrainingTrace* trace,
               const TrainingObserver& observer) {
    HmmModel model = initialize_left_to_right(sequences, cfg);
    const std::size_t q_len = model.n_states();
    const std::size_t m_len = std::size_t(cfg.n_mix);

    TrainingTrace local;
    TrainingTrace& tr = trace ? *trace : local;
    tr = {};

    Accumulators acc(q_len, m_len, model.dim);
    double ll = expectation(model, sequences, acc);
    tr.log_likelihood.push_back(ll);
    for (int iter = 1; iter <= cfg.max_iters; ++iter) {
        maximization(model, acc, cfg.variance_floor);
        acc = Accumulators(q_len, m_len, model.dim);
        const double next = expectation(model, sequences, acc);
        tr.log_likelihood.push_back(next);
        if (observer) observer(iter, next, model);
        const double gain = next - ll;
        ll = next;
        if (gain <= cfg.rel_tol * std::abs(ll)) {
            tr.converged = true;
            break;
        }
    }
    return model;
}

}  // namespace vowelrec
