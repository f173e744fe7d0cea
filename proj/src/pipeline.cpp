#include "vowelrec/pipeline.hpp"

#include <fstream>
#include <set>

#include <fmt/format.h>

#include "vowelrec/error.hpp"

using nlohmann::json;

namespace vowelrec {

void PipelineConfig::propagate() {
    training.seed = seed;
    evaluation.seed = seed;
    evaluation.jobs = jobs;
}

PipelineConfig default_pipeline_config() {
    PipelineConfig cfg;
    cfg.corpus.synthetic.seed = 7;
    cfg.propagate();
    return cfg;
}

namespace {

const char* to_string(CorpusKind k) {
    switch (k) {
        case CorpusKind::Synthetic: return "synthetic";
        case CorpusKind::Directory: return "directory";
        case CorpusKind::Manifest: return "manifest";
    }
    return "synthetic";
}

CorpusKind parse_corpus_kind(const std::string& s) {
    if (s == "synthetic") return CorpusKind::Synthetic;
    if (s == "directory") return CorpusKind::Directory;
    if (s == "manifest") return CorpusKind::Manifest;
    throw Error(ErrorKind::Configuration, fmt::format("corpus.source: unknown value '{}'", s));
}

// Reads typed fields out of one JSON object, tracking the dotted path for
// error messages and rejecting keys nobody asked for.
class Section {
public:
    Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) throw Error(ErrorKind::Configuration, fmt::format("{}: expected an object", label()));
    }

    template <typename T>
    void read(const char* key, T& out) {
        seen_.insert(key);
        auto it = j_.find(key);
        if (it == j_.end()) return;
        try {
            out = it->template get<T>();
        } catch (const json::exception&) {
            throw Error(ErrorKind::Configuration,
                        fmt::format("{}: expected {}, got {}", field(key), type_name<T>(), it->dump()));
        }
    }

    const json* child(const char* key) {
        seen_.insert(key);
        auto it = j_.find(key);
        return it == j_.end() ? nullptr : &*it;
    }

    std::string field(const char* key) const { return path_.empty() ? key : path_ + "." + key; }

    void finish() const {
        for (const auto& [key, value] : j_.items())
            if (!seen_.count(key))
                throw Error(ErrorKind::Configuration, fmt::format("{}: unknown key", field(key.c_str())));
    }

private:
    std::string label() const { return path_.empty() ? "config" : path_; }

    template <typename T>
    static const char* type_name() {
        if constexpr (std::is_same_v<T, bool>) return "a boolean";
        else if constexpr (std::is_integral_v<T>) return "an integer";
        else if constexpr (std::is_floating_point_v<T>) return "a number";
        else if constexpr (std::is_same_v<T, std::string>) return "a string";
        else return "an array of integers";
    }

    const json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

}  // namespace

json to_json(const PipelineConfig& cfg) {
    const auto& fe = cfg.frontend;
    const auto& tr = cfg.training;
    const auto& ev = cfg.evaluation;
    const auto& syn = cfg.corpus.synthetic;
    json corpus = {{"source", to_string(cfg.corpus.kind)}};
    if (cfg.corpus.kind == CorpusKind::Synthetic) {
        corpus["per_class"] = syn.n_per_class;
        corpus["sample_rate"] = syn.sample_rate;
        corpus["seed"] = syn.seed;
        corpus["duration_s"] = syn.duration_s;
        corpus["formant_perturbation"] = syn.formant_perturbation;
        corpus["pitch_perturbation"] = syn.pitch_perturbation;
        corpus["fundamental_hz"] = syn.base_fundamental_hz;
        corpus["aspiration"] = syn.aspiration;
    } else {
        corpus["path"] = cfg.corpus.path.generic_string();
    }
    return {
        {"seed", cfg.seed},
        {"jobs", cfg.jobs},
        {"output_dir", cfg.output_dir.generic_string()},
        {"corpus", corpus},
        {"frontend",
         {{"frame_ms", fe.frame_ms},
          {"hop_ms", fe.hop_ms},
          {"n_filters", fe.n_filters},
          {"n_ceps", fe.n_ceps},
          {"window", to_string(fe.window)},
          {"log_floor", fe.log_floor},
          {"fft_pad", fe.fft_pad},
          {"low_hz", fe.low_hz},
          {"high_hz", fe.high_hz ? json(*fe.high_hz) : json(nullptr)}}},
        {"training",
         {{"n_states", tr.n_states},
          {"n_mix", tr.n_mix},
          {"max_iters", tr.max_iters},
          {"rel_tol", tr.rel_tol},
          {"variance_floor", tr.variance_floor}}},
        {"evaluation",
         {{"train_fraction", ev.train_fraction},
          {"n_iterations", ev.n_iterations},
          {"subset_sizes", ev.subset_sizes},
          {"fratio_scope", to_string(ev.fratio_scope)},
          {"feature_selection", ev.feature_selection}}},
    };
}

PipelineConfig apply_json(const json& j, PipelineConfig cfg) {
    Section root(j, "");
    root.read("seed", cfg.seed);
    root.read("jobs", cfg.jobs);
    std::string out = cfg.output_dir.generic_string();
    root.read("output_dir", out);
    cfg.output_dir = out;

    if (const json* c = root.child("corpus")) {
        Section s(*c, "corpus");
        std::string source = to_string(cfg.corpus.kind), path = cfg.corpus.path.generic_string();
        s.read("source", source);
        cfg.corpus.kind = parse_corpus_kind(source);
        s.read("path", path);
        cfg.corpus.path = path;
        auto& syn = cfg.corpus.synthetic;
        s.read("per_class", syn.n_per_class);
        s.read("sample_rate", syn.sample_rate);
        s.read("seed", syn.seed);
        s.read("duration_s", syn.duration_s);
        s.read("formant_perturbation", syn.formant_perturbation);
        s.read("pitch_perturbation", syn.pitch_perturbation);
        s.read("fundamental_hz", syn.base_fundamental_hz);
        s.read("aspiration", syn.aspiration);
        s.finish();
    }
    if (const json* f = root.child("frontend")) {
        Section s(*f, "frontend");
        auto& fe = cfg.frontend;
        s.read("frame_ms", fe.frame_ms);
        s.read("hop_ms", fe.hop_ms);
        s.read("n_filters", fe.n_filters);
        s.read("n_ceps", fe.n_ceps);
        std::string window = to_string(fe.window);
        s.read("window", window);
        fe.window = parse_window(window);
        s.read("log_floor", fe.log_floor);
        s.read("fft_pad", fe.fft_pad);
        s.read("low_hz", fe.low_hz);
        if (const json* h = s.child("high_hz")) {
            if (h->is_null()) {
                fe.high_hz.reset();
            } else if (h->is_number()) {
                fe.high_hz = h->get<double>();
            } else {
                throw Error(ErrorKind::Configuration, "frontend.high_hz: expected a number or null");
            }
        }
        s.finish();
    }
    if (const json* t = root.child("training")) {
        Section s(*t, "training");
        auto& tr = cfg.training;
        s.read("n_states", tr.n_states);
        s.read("n_mix", tr.n_mix);
        s.read("max_iters", tr.max_iters);
        s.read("rel_tol", tr.rel_tol);
        s.read("variance_floor", tr.variance_floor);
        s.finish();
    }
    if (const json* e = root.child("evaluation")) {
        Section s(*e, "evaluation");
        auto& ev = cfg.evaluation;
        s.read("train_fraction", ev.train_fraction);
        s.read("n_iterations", ev.n_iterations);
        s.read("subset_sizes", ev.subset_sizes);
        std::string scope = to_string(ev.fratio_scope);
        s.read("fratio_scope", scope);
        ev.fratio_scope = parse_fratio_scope(scope);
        s.read("feature_selection", ev.feature_selection);
        s.finish();
    }
    // run.json records these too; they are informational here.
    root.child("command");
    root.child("options");
    root.finish();
    cfg.propagate();
    return cfg;
}

PipelineConfig load_pipeline_config(const std::filesystem::path& path, PipelineConfig base) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::Io, fmt::format("cannot open config '{}'", path.string()));
    json j;
    try {
        j = json::parse(in, nullptr, true, true);
    } catch (const json::exception& e) {
        throw Error(ErrorKind::Configuration, fmt::format("{}: {}", path.string(), e.what()));
    }
    return apply_json(j, std::move(base));
}

void validate(const PipelineConfig& cfg) {
    validate(cfg.frontend);
    validate(cfg.training);
    validate(cfg.evaluation, std::size_t(cfg.frontend.n_ceps));
    if (cfg.corpus.kind == CorpusKind::Synthetic) {
        if (cfg.corpus.synthetic.n_per_class < 2)
            throw Error(ErrorKind::Configuration, "corpus.per_class: must be at least 2");
        if (cfg.corpus.synthetic.sample_rate <= 0)
            throw Error(ErrorKind::Configuration, "corpus.sample_rate: must be positive");
        if (!(cfg.corpus.synthetic.duration_s > 0.0))
            throw Error(ErrorKind::Configuration, "corpus.duration_s: must be positive");
    } else if (cfg.corpus.path.empty()) {
        throw Error(ErrorKind::Configuration, "corpus.path: required for directory and manifest sources");
    }
}

Corpus load_corpus(const CorpusSource& source) {
    Corpus corpus;
    switch (source.kind) {
        case CorpusKind::Synthetic: corpus = build_synthetic_corpus(source.synthetic); break;
        case CorpusKind::Directory: corpus = load_directory(source.path); break;
        case CorpusKind::Manifest: corpus = load_manifest(source.path); break;
    }
    validate_corpus(corpus);
    return corpus;
}

std::vector<std::size_t> parse_subset_sizes(const std::string& text) {
    auto parse_int = [&](const std::string& s) -> std::size_t {
        try {
            std::size_t pos = 0;
            const long v = std::stol(s, &pos);
            if (pos != s.size() || v < 0) throw std::invalid_argument(s);
            return std::size_t(v);
        } catch (const std::exception&) {
            throw Error(ErrorKind::Configuration, fmt::format("evaluation.subset_sizes: cannot parse '{}'", text));
        }
    };
    std::vector<std::size_t> out;
    if (auto dots = text.find(".."); dots != std::string::npos) {
        const std::size_t lo = parse_int(text.substr(0, dots)), hi = parse_int(text.substr(dots + 2));
        if (lo > hi) throw Error(ErrorKind::Configuration, fmt::format("evaluation.subset_sizes: empty range '{}'", text));
        for (std::size_t k = lo; k <= hi; ++k) out.push_back(k);
        return out;
    }
    std::size_t start = 0;
    while (start <= text.size()) {
        const auto comma = text.find(',', start);
        out.push_back(parse_int(text.substr(start, comma == std::string::npos ? std::string::npos : comma - start)));
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return out;
}

}  // namespace vowelrec
