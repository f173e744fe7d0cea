#pragma once

#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "vowelrec/hmm.hpp"

namespace testing_support {

inline std::vector<double> random_simplex(std::mt19937_64& rng, std::size_t n) {
    std::uniform_real_distribution<double> u(0.05, 1.0);
    std::vector<double> p(n);
    double s = 0.0;
    for (double& v : p) s += (v = u(rng));
    for (double& v : p) v /= s;
    return p;
}

/// Fully connected model with random parameters.
inline vowelrec::HmmModel random_model(std::mt19937_64& rng, std::size_t q, std::size_t m, std::size_t d) {
    std::normal_distribution<double> n01(0.0, 1.0);
    std::uniform_real_distribution<double> var(0.3, 2.0);
    vowelrec::HmmModel model;
    model.dim = d;
    model.pi = random_simplex(rng, q);
    for (std::size_t s = 0; s < q; ++s) model.trans.push_back(random_simplex(rng, q));
    for (std::size_t s = 0; s < q; ++s) {
        vowelrec::GmmEmission em;
        em.weights = random_simplex(rng, m);
        for (std::size_t c = 0; c < m; ++c) {
            std::vector<double> mu(d), v(d);
            for (std::size_t k = 0; k < d; ++k) {
                mu[k] = n01(rng);
                v[k] = var(rng);
            }
            em.components.emplace_back(mu, v);
        }
        model.emissions.push_back(std::move(em));
    }
    return model;
}

inline std::vector<std::vector<double>> random_frames(std::mt19937_64& rng, std::size_t t, std::size_t d) {
    std::normal_distribution<double> n01(0.0, 1.0);
    std::vector<std::vector<double>> xs(t, std::vector<double>(d));
    for (auto& x : xs)
        for (double& v : x) v = n01(rng);
    return xs;
}

/// Sequences drawn from a few well separated Gaussian clusters that drift
/// over time, so a left-to-right model has structure to learn.
inline std::vector<vowelrec::FeatureSequence> drifting_sequences(std::mt19937_64& rng, std::size_t count,
                                                                 std::size_t d) {
    std::normal_distribution<double> n01(0.0, 1.0);
    std::uniform_int_distribution<std::size_t> len(12, 30);
    std::vector<vowelrec::FeatureSequence> out;
    for (std::size_t i = 0; i < count; ++i) {
        vowelrec::FeatureSequence seq;
        seq.clip_id = "seq" + std::to_string(i);
        const std::size_t t_len = len(rng);
        for (std::size_t t = 0; t < t_len; ++t) {
            const double phase = 3.0 * double(t) / double(t_len);
            std::vector<double> x(d);
            for (std::size_t k = 0; k < d; ++k)
                x[k] = 2.0 * std::floor(phase) * (k % 2 ? -1.0 : 1.0) + (n01(rng) > 0 ? 0.7 : -0.7) + 0.4 * n01(rng);
            seq.frames.push_back(std::move(x));
        }
        out.push_back(std::move(seq));
    }
    return out;
}

/// Fresh empty directory under the system temp dir, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& name) {
        path_ = std::filesystem::temp_directory_path() /
                (name + "_" + std::to_string(std::random_device{}()));
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
};

}  // namespace testing_support
