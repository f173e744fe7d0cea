#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace vowelrec {

/// Mono PCM audio with samples normalized to [-1, 1].
struct AudioClip {
    std::vector<double> samples;
    int sample_rate = 0;
    std::optional<std::string> label;
    std::string id;

    double duration() const { return sample_rate > 0 ? double(samples.size()) / sample_rate : 0.0; }
};

/// A labeled set of clips. `classes` lists the distinct labels in a fixed
/// order; class indices used elsewhere refer to positions in this list.
struct Corpus {
    std::vector<AudioClip> clips;
    std::vector<std::string> classes;

    /// Index of `label` in `classes`; throws Precondition if unknown.
    std::size_t class_index(const std::string& label) const;
    /// Class index per clip, parallel to `clips`.
    std::vector<std::size_t> label_indices() const;
};

/// Checks the corpus invariants: labeled clips, every label listed in
/// `classes`, and at least two clips per class.
void validate_corpus(const Corpus& corpus);

struct Formant {
    double frequency_hz = 0.0;
    double bandwidth_hz = 0.0;
};

/// Parameters of one synthetic vowel token.
struct VowelSpec {
    std::string label;
    std::vector<Formant> formants;
    double fundamental_hz = 200.0;
    double duration_s = 0.4;
    std::uint64_t jitter_seed = 0;
    /// Relative cycle-to-cycle pitch jitter (fraction of the period).
    double jitter = 0.01;
    /// Relative cycle-to-cycle amplitude variation of the excitation.
    double shimmer = 0.05;
    /// RMS of white aspiration noise added to the excitation, relative to
    /// the pulse amplitude.
    double aspiration = 0.0;
};

// WAV I/O ------------------------------------------------------------------

/// Reads a RIFF/WAVE file holding integer PCM (8/16/24/32 bit) or 32-bit
/// IEEE float. Multichannel input is averaged to mono.
AudioClip load_wav(const std::filesystem::path& path, std::optional<std::string> label = std::nullopt);

/// Same as load_wav, over an in-memory byte image of a file.
AudioClip parse_wav(const std::vector<std::uint8_t>& bytes, std::optional<std::string> label = std::nullopt);

/// Writes 16-bit PCM mono, scaled by 32768 (the inverse of the reader) and
/// clipped to the int16 range.
void write_wav(const std::filesystem::path& path, const AudioClip& clip);
std::vector<std::uint8_t> encode_wav16(const AudioClip& clip);

/// Loads `<root>/<label>/<file>.wav`, label taken from the directory name.
/// Files are visited in lexicographic order.
Corpus load_directory(const std::filesystem::path& root);

/// Loads a CSV manifest with header `path,label`. Relative paths resolve
/// against the manifest's directory.
Corpus load_manifest(const std::filesystem::path& manifest);

// Synthesis ----------------------------------------------------------------

/// Impulse-train excitation through a cascade of second-order resonators.
AudioClip synthesize_vowel(const VowelSpec& spec, int sample_rate);

/// Formant templates (F1..F3) for the five classes a, i, u, e, o.
std::vector<VowelSpec> vowel_templates();

struct SyntheticCorpusOptions {
    int n_per_class = 25;
    int sample_rate = 16000;
    std::uint64_t seed = 1;
    double duration_s = 0.4;
    double formant_perturbation = 0.05;
    double pitch_perturbation = 0.10;
    double base_fundamental_hz = 210.0;
    double aspiration = 0.0;
};

Corpus build_synthetic_corpus(const SyntheticCorpusOptions& options);
Corpus build_synthetic_corpus(int n_per_class, int sample_rate, std::uint64_t seed);

}  // namespace vowelrec
