#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "vowelrec/corpus.hpp"

namespace vowelrec {

enum class WindowKind { Hamming, Hann, Rectangular };

const char* to_string(WindowKind w) noexcept;
WindowKind parse_window(const std::string& name);

struct FrontendConfig {
    double frame_ms = 30.0;
    double hop_ms = 15.0;
    int n_filters = 26;
    int n_ceps = 12;
    WindowKind window = WindowKind::Hamming;
    double log_floor = 1e-10;
    bool fft_pad = true;
    double low_hz = 0.0;
    /// Upper filterbank edge; unset means Nyquist.
    std::optional<double> high_hz;
};

void validate(const FrontendConfig& cfg);

/// Frame length N in samples for a given rate.
std::size_t frame_length(const FrontendConfig& cfg, int sample_rate);
std::size_t hop_length(const FrontendConfig& cfg, int sample_rate);
/// DFT size: N, or the next power of two when padding is enabled.
std::size_t fft_size(const FrontendConfig& cfg, std::size_t frame_len);

using Frame = std::vector<double>;

struct PowerSpectrum {
    std::vector<double> bins;  // one-sided, 0..floor(Nfft/2)
    double bin_hz = 0.0;
};

/// Triangular filters over power-spectrum bins. Each row is stored sparsely
/// as [first, first + weights.size()).
struct MelFilter {
    std::size_t first = 0;
    std::vector<double> weights;

    std::size_t last() const { return first + weights.size(); }  // one past the end
    double weight(std::size_t bin) const {
        return bin >= first && bin < last() ? weights[bin - first] : 0.0;
    }
};

struct MelFilterBank {
    std::vector<MelFilter> filters;
    std::size_t n_bins = 0;
    double low_hz = 0.0;
    double high_hz = 0.0;
    /// K + 2 edges in mel, and the DFT bins they were snapped to.
    std::vector<double> edge_mel;
    std::vector<std::size_t> edge_bins;

    std::vector<double> dense_row(std::size_t k) const;
};

using FeatureVector = std::vector<double>;

struct FeatureSequence {
    std::vector<FeatureVector> frames;
    std::optional<std::string> label;
    std::string clip_id;

    std::size_t dim() const { return frames.empty() ? 0 : frames.front().size(); }
    std::size_t size() const { return frames.size(); }
};

std::vector<Frame> frame_signal(const AudioClip& clip, const FrontendConfig& cfg);
std::vector<Frame> frame_signal(std::span<const double> samples, std::size_t frame_len, std::size_t hop);

std::vector<double> make_window(WindowKind kind, std::size_t n);
Frame apply_window(const Frame& frame, WindowKind kind);

/// P[m] = |X[m]|^2 / N over the one-sided half, where N is the unpadded
/// frame length. `nfft` must be >= frame.size(); shorter frames are
/// zero-padded.
PowerSpectrum power_spectrum(std::span<const double> frame, std::size_t nfft, int sample_rate = 0);
PowerSpectrum power_spectrum(const Frame& frame, const FrontendConfig& cfg, int sample_rate = 0);

double hz_to_mel(double hz);
double mel_to_hz(double mel);

MelFilterBank build_filterbank(const FrontendConfig& cfg, int sample_rate, std::size_t nfft);

/// L x K matrix of cos(i*pi/K*(k - 1/2)), i = 1..L, k = 1..K.
std::vector<std::vector<double>> dct_matrix(int n_ceps, int n_filters);

/// Reusable extractor: caches the window, filterbank and DCT table for one
/// sample rate.
class MfccExtractor {
public:
    MfccExtractor(const FrontendConfig& cfg, int sample_rate);

    FeatureSequence extract(const AudioClip& clip) const;
    /// Cepstra of a single frame (window applied here).
    FeatureVector frame_cepstra(std::span<const double> frame) const;
    /// Filterbank energies S_k of a single frame before the log.
    std::vector<double> filterbank_energies(std::span<const double> frame) const;

    const MelFilterBank& filterbank() const { return bank_; }
    const FrontendConfig& config() const { return cfg_; }
    int sample_rate() const { return sample_rate_; }

private:
    FrontendConfig cfg_;
    int sample_rate_;
    std::size_t frame_len_;
    std::size_t hop_;
    std::size_t nfft_;
    std::vector<double> window_;
    MelFilterBank bank_;
    std::vector<std::vector<double>> dct_;
};

FeatureSequence mfcc(const AudioClip& clip, const FrontendConfig& cfg);

/// Extracts every clip of a corpus; clips may have different rates.
std::vector<FeatureSequence> extract_corpus(const Corpus& corpus, const FrontendConfig& cfg, int jobs = 1);

}  // namespace vowelrec
