#include "vowelrec/frontend.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>

#include <fftw3.h>
#include <fmt/format.h>

#include "vowelrec/error.hpp"
#include "vowelrec/parallel.hpp"

namespace vowelrec {

const char* to_string(WindowKind w) noexcept {
    switch (w) {
        case WindowKind::Hamming: return "hamming";
        case WindowKind::Hann: return "hann";
        case WindowKind::Rectangular: return "rectangular";
    }
    return "hamming";
}

WindowKind parse_window(const std::string& name) {
    if (name == "hamming") return WindowKind::Hamming;
    if (name == "hann") return WindowKind::Hann;
    if (name == "rectangular") return WindowKind::Rectangular;
    throw Error(ErrorKind::Configuration, fmt::format("unknown window '{}'", name));
}

void validate(const FrontendConfig& cfg) {
    if (!(cfg.frame_ms > 0.0)) throw Error(ErrorKind::Configuration, "frontend.frame_ms: must be positive");
    if (!(cfg.hop_ms > 0.0) || cfg.hop_ms > cfg.frame_ms)
        throw Error(ErrorKind::Configuration, "frontend.hop_ms: must satisfy 0 < hop_ms <= frame_ms");
    if (cfg.n_filters < 2) throw Error(ErrorKind::Configuration, "frontend.n_filters: must be at least 2");
    if (cfg.n_ceps < 1 || cfg.n_ceps > cfg.n_filters - 1)
        throw Error(ErrorKind::Configuration, "frontend.n_ceps: must satisfy 1 <= n_ceps <= n_filters - 1");
    if (!(cfg.log_floor > 0.0)) throw Error(ErrorKind::Configuration, "frontend.log_floor: must be positive");
    if (cfg.low_hz < 0.0) throw Error(ErrorKind::Configuration, "frontend.low_hz: must be non-negative");
    if (cfg.high_hz && !(*cfg.high_hz > cfg.low_hz))
        throw Error(ErrorKind::Configuration, "frontend.high_hz: must exceed low_hz");
}

std::size_t frame_length(const FrontendConfig& cfg, int sample_rate) {
    return std::size_t(std::max(1LL, std::llround(cfg.frame_ms * sample_rate / 1000.0)));
}

std::size_t hop_length(const FrontendConfig& cfg, int sample_rate) {
    return std::size_t(std::max(1LL, std::llround(cfg.hop_ms * sample_rate / 1000.0)));
}

std::size_t fft_size(const FrontendConfig& cfg, std::size_t frame_len) {
    if (!cfg.fft_pad) return frame_len;
    std::size_t n = 1;
    while (n < frame_len) n <<= 1;
    return n;
}

std::vector<Frame> frame_signal(std::span<const double> samples, std::size_t frame_len, std::size_t hop) {
    if (frame_len == 0 || hop == 0) throw Error(ErrorKind::Precondition, "frame length and hop must be positive");
    if (samples.size() < frame_len)
        throw Error(ErrorKind::TooShort,
                    fmt::format("clip has {} samples, shorter than one {}-sample frame", samples.size(), frame_len));
    const std::size_t count = (samples.size() - frame_len) / hop + 1;
    std::vector<Frame> frames;
    frames.reserve(count);
    for (std::size_t f = 0; f < count; ++f) {
        auto start = samples.begin() + std::ptrdiff_t(f * hop);
        frames.emplace_back(start, start + std::ptrdiff_t(frame_len));
    }
    return frames;
}

std::vector<Frame> frame_signal(const AudioClip& clip, const FrontendConfig& cfg) {
    validate(cfg);
    if (clip.sample_rate <= 0) throw Error(ErrorKind::Precondition, "clip sample rate must be positive");
    return frame_signal(clip.samples, frame_length(cfg, clip.sample_rate), hop_length(cfg, clip.sample_rate));
}

std::vector<double> make_window(WindowKind kind, std::size_t n) {
    std::vector<double> w(n, 1.0);
    if (kind == WindowKind::Rectangular || n < 2) return w;
    const double a = kind == WindowKind::Hamming ? 0.54 : 0.5;
    const double b = 1.0 - a;
    for (std::size_t i = 0; i < n; ++i)
        w[i] = a - b * std::cos(2.0 * std::numbers::pi * double(i) / double(n - 1));
    return w;
}

Frame apply_window(const Frame& frame, WindowKind kind) {
    if (kind == WindowKind::Rectangular) return frame;
    auto w = make_window(kind, frame.size());
    Frame out(frame.size());
    for (std::size_t i = 0; i < frame.size(); ++i) out[i] = frame[i] * w[i];
    return out;
}

// ---------------------------------------------------------------------------
// DFT

namespace {

struct FftwBuffer {
    double* in = nullptr;
    fftw_complex* out = nullptr;
    explicit FftwBuffer(std::size_t n)
        : in(fftw_alloc_real(n)), out(fftw_alloc_complex(n / 2 + 1)) {}
    ~FftwBuffer() {
        fftw_free(in);
        fftw_free(out);
    }
    FftwBuffer(const FftwBuffer&) = delete;
    FftwBuffer& operator=(const FftwBuffer&) = delete;
};

// FFTW planning is not thread-safe; execution on fresh fftw_malloc'd
// buffers is.
class PlanCache {
public:
    fftw_plan get(std::size_t n) {
        std::lock_guard lock(mutex_);
        auto it = plans_.find(n);
        if (it != plans_.end()) return it->second;
        FftwBuffer scratch(n);
        fftw_plan plan = fftw_plan_dft_r2c_1d(int(n), scratch.in, scratch.out, FFTW_ESTIMATE);
        if (!plan) throw Error(ErrorKind::Precondition, fmt::format("cannot plan a {}-point DFT", n));
        plans_.emplace(n, plan);
        return plan;
    }
    ~PlanCache() {
        for (auto& [n, plan] : plans_) fftw_destroy_plan(plan);
    }

private:
    std::mutex mutex_;
    std::map<std::size_t, fftw_plan> plans_;
};

PlanCache& plan_cache() {
    static PlanCache cache;
    return cache;
}

}  // namespace

PowerSpectrum power_spectrum(std::span<const double> frame, std::size_t nfft, int sample_rate) {
    const std::size_t n = frame.size();
    if (n == 0) throw Error(ErrorKind::Precondition, "empty frame");
    if (nfft < n) throw Error(ErrorKind::Precondition, "DFT size smaller than frame");

    fftw_plan plan = plan_cache().get(nfft);
    FftwBuffer buf(nfft);
    std::copy(frame.begin(), frame.end(), buf.in);
    std::fill(buf.in + n, buf.in + nfft, 0.0);
    fftw_execute_dft_r2c(plan, buf.in, buf.out);

    PowerSpectrum ps;
    ps.bins.resize(nfft / 2 + 1);
    for (std::size_t m = 0; m < ps.bins.size(); ++m) {
        const double re = buf.out[m][0], im = buf.out[m][1];
        ps.bins[m] = (re * re + im * im) / double(n);
    }
    ps.bin_hz = sample_rate > 0 ? double(sample_rate) / double(nfft) : 0.0;
    return ps;
}

PowerSpectrum power_spectrum(const Frame& frame, const FrontendConfig& cfg, int sample_rate) {
    return power_spectrum(frame, fft_size(cfg, frame.size()), sample_rate);
}

// ---------------------------------------------------------------------------
// Mel scale and filterbank

double hz_to_mel(double hz) {
    if (!(hz >= 0.0)) throw Error(ErrorKind::Precondition, fmt::format("hz_to_mel: negative frequency {}", hz));
    return 2595.0 * std::log10(1.0 + hz / 700.0);
}

double mel_to_hz(double mel) {
    if (!(mel >= 0.0)) throw Error(ErrorKind::Precondition, fmt::format("mel_to_hz: negative mel {}", mel));
    return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0);
}

std::vector<double> MelFilterBank::dense_row(std::size_t k) const {
    std::vector<double> row(n_bins, 0.0);
    const auto& f = filters.at(k);
    std::copy(f.weights.begin(), f.weights.end(), row.begin() + std::ptrdiff_t(f.first));
    return row;
}

MelFilterBank build_filterbank(const FrontendConfig& cfg, int sample_rate, std::size_t nfft) {
    validate(cfg);
    if (sample_rate <= 0 || nfft < 2) throw Error(ErrorKind::Precondition, "invalid sample rate or DFT size");
    const double nyquist = sample_rate / 2.0;
    const double high = cfg.high_hz.value_or(nyquist);
    if (high > nyquist)
        throw Error(ErrorKind::Configuration, "frontend.high_hz: exceeds the Nyquist frequency");
    if (cfg.low_hz >= high) throw Error(ErrorKind::Configuration, "frontend.low_hz: must be below high_hz");

    const std::size_t k_count = std::size_t(cfg.n_filters);
    MelFilterBank bank;
    bank.n_bins = nfft / 2 + 1;
    bank.low_hz = cfg.low_hz;
    bank.high_hz = high;

    const double mel_lo = hz_to_mel(cfg.low_hz);
    const double mel_hi = hz_to_mel(high);
    const double bin_hz = double(sample_rate) / double(nfft);
    for (std::size_t e = 0; e < k_count + 2; ++e) {
        const double mel = mel_lo + (mel_hi - mel_lo) * double(e) / double(k_count + 1);
        bank.edge_mel.push_back(mel);
        auto bin = std::size_t(std::llround(mel_to_hz(mel) / bin_hz));
        bank.edge_bins.push_back(std::min(bin, bank.n_bins - 1));
    }
    for (std::size_t e = 1; e < bank.edge_bins.size(); ++e) {
        if (bank.edge_bins[e] <= bank.edge_bins[e - 1])
            throw Error(ErrorKind::Configuration,
                        fmt::format("frontend.n_filters: {} filters do not fit in {} DFT bins "
                                    "(edges {} and {} snap to the same bin)",
                                    cfg.n_filters, bank.n_bins, e - 1, e));
    }

    for (std::size_t k = 0; k < k_count; ++k) {
        const std::size_t lo = bank.edge_bins[k], mid = bank.edge_bins[k + 1], hi = bank.edge_bins[k + 2];
        MelFilter f;
        f.first = lo + 1;
        for (std::size_t b = lo + 1; b < hi; ++b) {
            f.weights.push_back(b <= mid ? double(b - lo) / double(mid - lo) : double(hi - b) / double(hi - mid));
        }
        bank.filters.push_back(std::move(f));
    }
    return bank;
}

std::vector<std::vector<double>> dct_matrix(int n_ceps, int n_filters) {
    std::vector<std::vector<double>> m(static_cast<std::size_t>(n_ceps), std::vector<double>(static_cast<std::size_t>(n_filters)));
    for (int i = 1; i <= n_ceps; ++i)
        for (int k = 1; k <= n_filters; ++k)
            m[std::size_t(i - 1)][std::size_t(k - 1)] =
                std::cos(double(i) * std::numbers::pi / double(n_filters) * (double(k) - 0.5));
    return m;
}

// ---------------------------------------------------------------------------
// MFCC

MfccExtractor::MfccExtractor(const FrontendConfig& cfg, int sample_rate)
    : cfg_(cfg), sample_rate_(sample_rate) {
    validate(cfg_);
    if (sample_rate <= 0) throw Error(ErrorKind::Precondition, "sample rate must be positive");
    frame_len_ = frame_length(cfg_, sample_rate);
    hop_ = hop_length(cfg_, sample_rate);
    nfft_ = fft_size(cfg_, frame_len_);
    window_ = make_window(cfg_.window, frame_len_);
    bank_ = build_filterbank(cfg_, sample_rate, nfft_);
    dct_ = dct_matrix(cfg_.n_ceps, cfg_.n_filters);
}

std::vector<double> MfccExtractor::filterbank_energies(std::span<const double> frame) const {
    if (frame.size() != frame_len_) throw Error(ErrorKind::Precondition, "frame length mismatch");
    std::vector<double> windowed(frame_len_);
    for (std::size_t i = 0; i < frame_len_; ++i) windowed[i] = frame[i] * window_[i];
    const PowerSpectrum ps = power_spectrum(windowed, nfft_, sample_rate_);
    std::vector<double> energies(bank_.filters.size(), 0.0);
    for (std::size_t k = 0; k < bank_.filters.size(); ++k) {
        const auto& f = bank_.filters[k];
        double s = 0.0;
        for (std::size_t j = 0; j < f.weights.size(); ++j) s += f.weights[j] * ps.bins[f.first + j];
        energies[k] = s;
    }
    return energies;
}

FeatureVector MfccExtractor::frame_cepstra(std::span<const double> frame) const {
    auto energies = filterbank_energies(frame);
    for (double& s : energies) s = std::log(std::max(s, cfg_.log_floor));
    FeatureVector ceps(dct_.size(), 0.0);
    for (std::size_t i = 0; i < dct_.size(); ++i) {
        double c = 0.0;
        for (std::size_t k = 0; k < energies.size(); ++k) c += energies[k] * dct_[i][k];
        ceps[i] = c;
    }
    return ceps;
}

FeatureSequence MfccExtractor::extract(const AudioClip& clip) const {
    if (clip.sample_rate != sample_rate_)
        throw Error(ErrorKind::Precondition,
                    fmt::format("clip rate {} Hz differs from extractor rate {} Hz", clip.sample_rate, sample_rate_));
    FeatureSequence seq;
    seq.label = clip.label;
    seq.clip_id = clip.id;
    for (const auto& frame : frame_signal(clip.samples, frame_len_, hop_)) seq.frames.push_back(frame_cepstra(frame));
    return seq;
}

FeatureSequence mfcc(const AudioClip& clip, const FrontendConfig& cfg) {
    return MfccExtractor(cfg, clip.sample_rate).extract(clip);
}

std::vector<FeatureSequence> extract_corpus(const Corpus& corpus, const FrontendConfig& cfg, int jobs) {
    std::map<int, std::unique_ptr<MfccExtractor>> extractors;
    for (const auto& clip : corpus.clips)
        if (!extractors.count(clip.sample_rate))
            extractors.emplace(clip.sample_rate, std::make_unique<MfccExtractor>(cfg, clip.sample_rate));

    std::vector<FeatureSequence> out(corpus.clips.size());
    parallel_for(corpus.clips.size(), jobs, [&](std::size_t i) {
        const auto& clip = corpus.clips[i];
        try {
            out[i] = extractors.at(clip.sample_rate)->extract(clip);
        } catch (const Error& e) {
            throw Error(e.kind(), fmt::format("clip '{}': {}", clip.id, e.what()));
        }
    });
    return out;
}

}  // namespace vowelrec
