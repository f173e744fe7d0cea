#include "vowelrec/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <map>
#include <numbers>
#include <random>
#include <sstream>

#include <fmt/format.h>

#include "vowelrec/error.hpp"
#include "vowelrec/rng.hpp"

namespace fs = std::filesystem;

namespace vowelrec {

std::size_t Corpus::class_index(const std::string& label) const {
    auto it = std::find(classes.begin(), classes.end(), label);
    if (it == classes.end())
        throw Error(ErrorKind::Precondition, fmt::format("unknown class label '{}'", label));
    return std::size_t(it - classes.begin());
}

std::vector<std::size_t> Corpus::label_indices() const {
    std::vector<std::size_t> out;
    out.reserve(clips.size());
    for (const auto& clip : clips) {
        if (!clip.label)
            throw Error(ErrorKind::Precondition, fmt::format("clip '{}' has no label", clip.id));
        out.push_back(class_index(*clip.label));
    }
    return out;
}

void validate_corpus(const Corpus& corpus) {
    if (corpus.clips.empty()) throw Error(ErrorKind::EmptyInput, "corpus has no clips");
    std::vector<std::size_t> counts(corpus.classes.size(), 0);
    for (std::size_t idx : corpus.label_indices()) ++counts[idx];
    for (std::size_t c = 0; c < counts.size(); ++c) {
        if (counts[c] < 2)
            throw Error(ErrorKind::DegenerateClass,
                        fmt::format("class '{}' has {} clip(s); at least 2 are required", corpus.classes[c],
                                    counts[c]));
    }
}

// ---------------------------------------------------------------------------
// WAV

namespace {

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

class ByteReader {
public:
    explicit ByteReader(const std::vector<std::uint8_t>& bytes) : bytes_(bytes) {}

    bool has(std::size_t n) const { return pos_ + n <= bytes_.size(); }
    std::size_t pos() const { return pos_; }
    std::size_t remaining() const { return bytes_.size() - pos_; }
    void seek(std::size_t p) { pos_ = std::min(p, bytes_.size()); }

    std::string tag() {
        need(4);
        std::string s(reinterpret_cast<const char*>(bytes_.data() + pos_), 4);
        pos_ += 4;
        return s;
    }
    std::uint16_t u16() {
        need(2);
        std::uint16_t v = std::uint16_t(bytes_[pos_] | (bytes_[pos_ + 1] << 8));
        pos_ += 2;
        return v;
    }
    std::uint32_t u32() {
        need(4);
        std::uint32_t v = std::uint32_t(bytes_[pos_]) | (std::uint32_t(bytes_[pos_ + 1]) << 8) |
                          (std::uint32_t(bytes_[pos_ + 2]) << 16) | (std::uint32_t(bytes_[pos_ + 3]) << 24);
        pos_ += 4;
        return v;
    }

private:
    void need(std::size_t n) const {
        if (!has(n)) throw Error(ErrorKind::Format, "truncated WAV header");
    }

    const std::vector<std::uint8_t>& bytes_;
    std::size_t pos_ = 0;
};

double decode_sample(const std::uint8_t* p, std::uint16_t format, std::uint16_t bits) {
    if (format == kFormatFloat) {
        float f;
        std::uint32_t raw = std::uint32_t(p[0]) | (std::uint32_t(p[1]) << 8) | (std::uint32_t(p[2]) << 16) |
                            (std::uint32_t(p[3]) << 24);
        std::memcpy(&f, &raw, sizeof f);
        return std::clamp(double(f), -1.0, 1.0);
    }
    switch (bits) {
        case 8:
            return (double(p[0]) - 128.0) / 128.0;
        case 16: {
            auto v = std::int16_t(std::uint16_t(p[0] | (p[1] << 8)));
            return double(v) / 32768.0;
        }
        case 24: {
            std::int32_t v = std::int32_t(p[0]) | (std::int32_t(p[1]) << 8) | (std::int32_t(p[2]) << 16);
            if (v & 0x800000) v -= 0x1000000;
            return double(v) / 8388608.0;
        }
        case 32: {
            auto v = std::int32_t(std::uint32_t(p[0]) | (std::uint32_t(p[1]) << 8) | (std::uint32_t(p[2]) << 16) |
                                  (std::uint32_t(p[3]) << 24));
            return double(v) / 2147483648.0;
        }
    }
    throw Error(ErrorKind::UnsupportedFormat, fmt::format("unsupported PCM bit depth {}", bits));
}

void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
    out.push_back(std::uint8_t(v & 0xff));
    out.push_back(std::uint8_t(v >> 8));
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(std::uint8_t((v >> (8 * i)) & 0xff));
}

void put_tag(std::vector<std::uint8_t>& out, const char* tag) { out.insert(out.end(), tag, tag + 4); }

}  // namespace

AudioClip parse_wav(const std::vector<std::uint8_t>& bytes, std::optional<std::string> label) {
    ByteReader in(bytes);
    if (!in.has(12)) throw Error(ErrorKind::Format, "file too small to be a WAV file");
    if (in.tag() != "RIFF") throw Error(ErrorKind::Format, "missing RIFF magic");
    in.u32();
    if (in.tag() != "WAVE") throw Error(ErrorKind::Format, "missing WAVE form type");

    std::uint16_t format = 0, channels = 0, bits = 0, block_align = 0;
    std::uint32_t rate = 0;
    bool have_fmt = false;
    std::optional<std::pair<std::size_t, std::size_t>> data;  // offset, size

    while (in.has(8)) {
        std::string id = in.tag();
        std::uint32_t size = in.u32();
        std::size_t body = in.pos();
        if (id == "fmt ") {
            if (size < 16) throw Error(ErrorKind::Format, "fmt chunk too small");
            format = in.u16();
            channels = in.u16();
            rate = in.u32();
            in.u32();  // byte rate
            block_align = in.u16();
            bits = in.u16();
            if (format == kFormatExtensible) {
                if (size < 40) throw Error(ErrorKind::Format, "extensible fmt chunk too small");
                in.u16();  // cbSize
                in.u16();  // valid bits
                in.u32();  // channel mask
                format = in.u16();  // first two bytes of the subformat GUID
            }
            have_fmt = true;
        } else if (id == "data") {
            // Streamed files sometimes carry an oversized length; keep what is present.
            std::size_t avail = std::min<std::size_t>(size, in.remaining());
            data = {body, avail};
        }
        std::size_t next = body + std::size_t(size) + (size & 1u);
        if (next <= body) break;
        in.seek(next);
        if (data && have_fmt) break;
    }
    if (!have_fmt) throw Error(ErrorKind::Format, "missing fmt chunk");
    if (!data) throw Error(ErrorKind::Format, "missing data chunk");
    if (format != kFormatPcm && format != kFormatFloat)
        throw Error(ErrorKind::UnsupportedFormat, fmt::format("unsupported WAV codec 0x{:04x}", format));
    if (format == kFormatFloat && bits != 32)
        throw Error(ErrorKind::UnsupportedFormat, fmt::format("unsupported float bit depth {}", bits));
    if (format == kFormatPcm && bits != 8 && bits != 16 && bits != 24 && bits != 32)
        throw Error(ErrorKind::UnsupportedFormat, fmt::format("unsupported PCM bit depth {}", bits));
    if (channels == 0 || rate == 0) throw Error(ErrorKind::Format, "zero channels or sample rate");
    std::size_t bytes_per_sample = bits / 8u;
    if (block_align != channels * bytes_per_sample)
        throw Error(ErrorKind::Format, "block alignment inconsistent with channels and bit depth");

    std::size_t n_frames = data->second / block_align;
    if (n_frames == 0) throw Error(ErrorKind::EmptyInput, "empty data chunk");

    AudioClip clip;
    clip.sample_rate = int(rate);
    clip.label = std::move(label);
    clip.samples.resize(n_frames);
    const std::uint8_t* p = bytes.data() + data->first;
    for (std::size_t i = 0; i < n_frames; ++i) {
        double acc = 0.0;
        for (std::uint16_t c = 0; c < channels; ++c) {
            acc += decode_sample(p, format, bits);
            p += bytes_per_sample;
        }
        clip.samples[i] = acc / channels;
    }
    return clip;
}

AudioClip load_wav(const fs::path& path, std::optional<std::string> label) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::Io, fmt::format("cannot open '{}'", path.string()));
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    try {
        AudioClip clip = parse_wav(bytes, std::move(label));
        clip.id = path.stem().string();
        return clip;
    } catch (const Error& e) {
        throw Error(e.kind(), fmt::format("{}: {}", path.string(), e.what()));
    }
}

std::vector<std::uint8_t> encode_wav16(const AudioClip& clip) {
    if (clip.sample_rate <= 0) throw Error(ErrorKind::Precondition, "sample rate must be positive");
    const auto data_bytes = std::uint32_t(clip.samples.size() * 2);
    std::vector<std::uint8_t> out;
    out.reserve(44 + data_bytes);
    put_tag(out, "RIFF");
    put_u32(out, 36 + data_bytes);
    put_tag(out, "WAVE");
    put_tag(out, "fmt ");
    put_u32(out, 16);
    put_u16(out, kFormatPcm);
    put_u16(out, 1);
    put_u32(out, std::uint32_t(clip.sample_rate));
    put_u32(out, std::uint32_t(clip.sample_rate) * 2);
    put_u16(out, 2);
    put_u16(out, 16);
    put_tag(out, "data");
    put_u32(out, data_bytes);
    for (double s : clip.samples) {
        auto v = std::int16_t(std::clamp(std::lround(s * 32768.0), -32768L, 32767L));
        put_u16(out, std::uint16_t(v));
    }
    return out;
}

void write_wav(const fs::path& path, const AudioClip& clip) {
    auto bytes = encode_wav16(clip);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorKind::Io, fmt::format("cannot write '{}'", path.string()));
    out.write(reinterpret_cast<const char*>(bytes.data()), std::streamsize(bytes.size()));
}

namespace {

Corpus assemble(std::vector<AudioClip> clips) {
    Corpus corpus;
    for (const auto& clip : clips) {
        if (std::find(corpus.classes.begin(), corpus.classes.end(), *clip.label) == corpus.classes.end())
            corpus.classes.push_back(*clip.label);
    }
    std::sort(corpus.classes.begin(), corpus.classes.end());
    corpus.clips = std::move(clips);
    return corpus;
}

std::string trim(std::string s) {
    auto not_space = [](unsigned char c) { return !std::isspace(c); };
    s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
    s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
    if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = s.substr(1, s.size() - 2);
    return s;
}

}  // namespace

Corpus load_directory(const fs::path& root) {
    if (!fs::is_directory(root))
        throw Error(ErrorKind::Io, fmt::format("'{}' is not a directory", root.string()));
    std::vector<fs::path> files;
    for (const auto& entry : fs::recursive_directory_iterator(root)) {
        if (!entry.is_regular_file()) continue;
        auto ext = entry.path().extension().string();
        std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return char(std::tolower(c)); });
        if (ext == ".wav") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    std::vector<AudioClip> clips;
    for (const auto& f : files) {
        std::string label = f.parent_path().filename().string();
        AudioClip clip = load_wav(f, label);
        clip.id = fs::relative(f, root).replace_extension().generic_string();
        clips.push_back(std::move(clip));
    }
    if (clips.empty()) throw Error(ErrorKind::EmptyInput, fmt::format("no .wav files under '{}'", root.string()));
    return assemble(std::move(clips));
}

Corpus load_manifest(const fs::path& manifest) {
    std::ifstream in(manifest);
    if (!in) throw Error(ErrorKind::Io, fmt::format("cannot open manifest '{}'", manifest.string()));
    std::string line;
    if (!std::getline(in, line) || trim(line) != "path,label")
        throw Error(ErrorKind::Format, fmt::format("{}: expected header 'path,label'", manifest.string()));

    std::vector<AudioClip> clips;
    std::vector<std::string> failures;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        auto comma = line.rfind(',');
        if (comma == std::string::npos) {
            failures.push_back(fmt::format("line {}: expected 'path,label'", line_no));
            continue;
        }
        fs::path rel = trim(line.substr(0, comma));
        std::string label = trim(line.substr(comma + 1));
        fs::path path = rel.is_absolute() ? rel : manifest.parent_path() / rel;
        try {
            AudioClip clip = load_wav(path, label);
            clip.id = rel.replace_extension().generic_string();
            clips.push_back(std::move(clip));
        } catch (const Error& e) {
            failures.push_back(fmt::format("line {}: {}", line_no, e.what()));
        }
    }
    if (!failures.empty()) {
        std::string msg = fmt::format("{} manifest entr{} failed to load:", failures.size(),
                                      failures.size() == 1 ? "y" : "ies");
        for (const auto& f : failures) msg += "\n  " + f;
        throw Error(ErrorKind::Format, msg);
    }
    if (clips.empty()) throw Error(ErrorKind::EmptyInput, fmt::format("manifest '{}' lists no clips", manifest.string()));
    return assemble(std::move(clips));
}

// ---------------------------------------------------------------------------
// Synthesis

namespace {

void validate_vowel(const VowelSpec& spec, int sample_rate) {
    if (sample_rate <= 0) throw Error(ErrorKind::Precondition, "sample rate must be positive");
    const double nyquist = sample_rate / 2.0;
    if (!(spec.duration_s > 0.0)) throw Error(ErrorKind::Precondition, "duration must be positive");
    if (spec.formants.size() < 2) throw Error(ErrorKind::Precondition, "at least two formants are required");
    if (!(spec.fundamental_hz > 0.0) || spec.fundamental_hz >= nyquist)
        throw Error(ErrorKind::Precondition, "fundamental must lie in (0, Nyquist)");
    for (const auto& f : spec.formants) {
        if (!(f.frequency_hz > 0.0) || f.frequency_hz >= nyquist)
            throw Error(ErrorKind::Precondition,
                        fmt::format("formant {} Hz outside (0, {} Hz)", f.frequency_hz, nyquist));
        if (!(f.bandwidth_hz > 0.0) || f.bandwidth_hz >= nyquist)
            throw Error(ErrorKind::Precondition, fmt::format("formant bandwidth {} Hz invalid", f.bandwidth_hz));
    }
    if (spec.jitter < 0.0 || spec.jitter >= 0.5 || spec.shimmer < 0.0 || spec.shimmer >= 1.0 || spec.aspiration < 0.0)
        throw Error(ErrorKind::Precondition, "jitter, shimmer or aspiration out of range");
}

// Two-pole resonator with unity gain at DC.
void resonate(std::vector<double>& x, const Formant& f, int sample_rate) {
    const double r = std::exp(-std::numbers::pi * f.bandwidth_hz / sample_rate);
    const double theta = 2.0 * std::numbers::pi * f.frequency_hz / sample_rate;
    const double a1 = 2.0 * r * std::cos(theta);
    const double a2 = -r * r;
    const double gain = 1.0 - a1 - a2;
    double y1 = 0.0, y2 = 0.0;
    for (double& v : x) {
        double y = gain * v + a1 * y1 + a2 * y2;
        y2 = y1;
        y1 = y;
        v = y;
    }
}

}  // namespace

AudioClip synthesize_vowel(const VowelSpec& spec, int sample_rate) {
    validate_vowel(spec, sample_rate);
    const auto n = std::size_t(std::llround(spec.duration_s * sample_rate));
    if (n == 0) throw Error(ErrorKind::Precondition, "duration shorter than one sample");

    Rng rng(spec.jitter_seed);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    std::normal_distribution<double> noise(0.0, 1.0);

    std::vector<double> x(n, 0.0);
    const double period = sample_rate / spec.fundamental_hz;
    double t = period * 0.5 * (unit(rng) + 1.0);
    while (t < double(n)) {
        double amp = 1.0 + spec.shimmer * unit(rng);
        // Split each pulse between its two neighbouring samples so the pitch
        // is not quantized to whole-sample periods.
        auto i0 = std::size_t(t);
        double frac = t - double(i0);
        x[i0] += amp * (1.0 - frac);
        if (i0 + 1 < n) x[i0 + 1] += amp * frac;
        t += period * (1.0 + spec.jitter * unit(rng));
    }
    if (spec.aspiration > 0.0)
        for (double& v : x) v += spec.aspiration * noise(rng);

    for (const auto& f : spec.formants) resonate(x, f, sample_rate);

    double peak = 0.0;
    for (double v : x) peak = std::max(peak, std::abs(v));
    if (peak > 0.0)
        for (double& v : x) v *= 0.9 / peak;

    AudioClip clip;
    clip.samples = std::move(x);
    clip.sample_rate = sample_rate;
    clip.label = spec.label;
    return clip;
}

std::vector<VowelSpec> vowel_templates() {
    auto make = [](std::string label, double f1, double f2, double f3) {
        VowelSpec v;
        v.label = std::move(label);
        v.formants = {{f1, 60.0}, {f2, 90.0}, {f3, 120.0}};
        return v;
    };
    return {make("a", 730, 1090, 2440), make("i", 270, 2290, 3010), make("u", 300, 870, 2240),
            make("e", 530, 1840, 2480), make("o", 570, 840, 2410)};
}

Corpus build_synthetic_corpus(const SyntheticCorpusOptions& opt) {
    if (opt.n_per_class < 2) throw Error(ErrorKind::Precondition, "n_per_class must be at least 2");
    if (opt.sample_rate <= 0) throw Error(ErrorKind::Precondition, "sample rate must be positive");

    Rng rng(opt.seed);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);

    Corpus corpus;
    const auto templates = vowel_templates();
    for (const auto& tmpl : templates) corpus.classes.push_back(tmpl.label);
    for (const auto& tmpl : templates) {
        for (int j = 0; j < opt.n_per_class; ++j) {
            VowelSpec spec = tmpl;
            for (auto& f : spec.formants) f.frequency_hz *= 1.0 + opt.formant_perturbation * unit(rng);
            spec.fundamental_hz = opt.base_fundamental_hz * (1.0 + opt.pitch_perturbation * unit(rng));
            spec.duration_s = opt.duration_s;
            spec.aspiration = opt.aspiration;
            spec.jitter_seed = rng();
            AudioClip clip = synthesize_vowel(spec, opt.sample_rate);
            clip.id = fmt::format("{}_{:03d}", tmpl.label, j);
            corpus.clips.push_back(std::move(clip));
        }
    }
    return corpus;
}

Corpus build_synthetic_corpus(int n_per_class, int sample_rate, std::uint64_t seed) {
    SyntheticCorpusOptions opt;
    opt.n_per_class = n_per_class;
    opt.sample_rate = sample_rate;
    opt.seed = seed;
    return build_synthetic_corpus(opt);
}

}  // namespace vowelrec
