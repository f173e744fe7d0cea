// vowelrec: MFCC extraction, F-ratio coefficient ranking and GMM-HMM vowel
// classification from the command line.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ranges.h>

#include "vowelrec/corpus.hpp"
#include "vowelrec/error.hpp"
#include "vowelrec/eval.hpp"
#include "vowelrec/fratio.hpp"
#include "vowelrec/frontend.hpp"
#include "vowelrec/model_io.hpp"
#include "vowelrec/pipeline.hpp"
#include "vowelrec/report.hpp"

namespace fs = std::filesystem;
using namespace vowelrec;

namespace {

// Flag values; only the ones the user actually passed override the config.
struct Flags {
    std::string config;
    std::uint64_t seed = 0;
    int jobs = 0;
    std::string out;

    std::string data, manifest;
    bool synthetic = false;
    int per_class = 0;
    int sample_rate = 0;
    std::uint64_t corpus_seed = 0;
    double duration = 0.0;

    double frame_ms = 0.0, hop_ms = 0.0;
    int n_filters = 0, n_ceps = 0;
    std::string window;
    bool no_pad = false;

    int states = 0, mix = 0, max_iters = 0;
    double rel_tol = 0.0, variance_floor = 0.0;

    int iterations = 0;
    double train_fraction = 0.0;
    std::string k;
    std::string fratio_scope;
    std::size_t summary_k = 8;
    std::string models;
};

bool given(const CLI::App& app, const char* name) {
    const CLI::Option* opt = app.get_option_no_throw(name);
    if (!opt) opt = app.get_parent() ? app.get_parent()->get_option_no_throw(name) : nullptr;
    return opt && opt->count() > 0;
}

void add_source_flags(CLI::App& cmd, Flags& f) {
    cmd.add_option("--data", f.data, "Directory laid out as <root>/<label>/<file>.wav");
    cmd.add_option("--manifest", f.manifest, "CSV manifest with header path,label");
    cmd.add_flag("--synthetic", f.synthetic, "Use the built-in synthetic vowel corpus");
    cmd.add_option("--per-class", f.per_class, "Synthetic clips per class");
    cmd.add_option("--sample-rate", f.sample_rate, "Synthetic sample rate in Hz");
    cmd.add_option("--corpus-seed", f.corpus_seed, "Seed of the synthetic corpus");
    cmd.add_option("--duration", f.duration, "Synthetic clip duration in seconds");
}

void add_frontend_flags(CLI::App& cmd, Flags& f) {
    cmd.add_option("--frame-ms", f.frame_ms, "Frame length in ms");
    cmd.add_option("--hop-ms", f.hop_ms, "Frame hop in ms");
    cmd.add_option("--n-filters", f.n_filters, "Mel filters");
    cmd.add_option("--n-ceps", f.n_ceps, "Cepstral coefficients per frame");
    cmd.add_option("--window", f.window, "hamming | hann | rectangular");
    cmd.add_flag("--no-pad", f.no_pad, "Do not zero-pad frames to a power of two");
}

void add_training_flags(CLI::App& cmd, Flags& f) {
    cmd.add_option("--states", f.states, "HMM states per class");
    cmd.add_option("--mix", f.mix, "Gaussian components per state");
    cmd.add_option("--max-iters", f.max_iters, "Maximum EM iterations");
    cmd.add_option("--rel-tol", f.rel_tol, "Relative log-likelihood improvement to stop EM");
    cmd.add_option("--variance-floor", f.variance_floor, "Lower bound on Gaussian variances");
}

void add_eval_flags(CLI::App& cmd, Flags& f) {
    cmd.add_option("--iterations", f.iterations, "Hold-out iterations");
    cmd.add_option("--train-fraction", f.train_fraction, "Fraction of each class used for training");
}

PipelineConfig resolve(const CLI::App& cmd, const Flags& f) {
    PipelineConfig cfg = default_pipeline_config();
    if (!f.config.empty()) cfg = load_pipeline_config(f.config, cfg);

    if (given(cmd, "--seed")) cfg.seed = f.seed;
    if (given(cmd, "--jobs")) cfg.jobs = f.jobs;
    if (given(cmd, "--out")) cfg.output_dir = f.out;

    const int sources = int(given(cmd, "--data")) + int(given(cmd, "--manifest")) + int(given(cmd, "--synthetic"));
    if (sources > 1) throw Error(ErrorKind::Configuration, "corpus: choose one of --data, --manifest, --synthetic");
    if (given(cmd, "--data")) {
        cfg.corpus.kind = CorpusKind::Directory;
        cfg.corpus.path = f.data;
    } else if (given(cmd, "--manifest")) {
        cfg.corpus.kind = CorpusKind::Manifest;
        cfg.corpus.path = f.manifest;
    } else if (given(cmd, "--synthetic")) {
        cfg.corpus.kind = CorpusKind::Synthetic;
    }
    auto& syn = cfg.corpus.synthetic;
    if (given(cmd, "--per-class")) syn.n_per_class = f.per_class;
    if (given(cmd, "--sample-rate")) syn.sample_rate = f.sample_rate;
    if (given(cmd, "--corpus-seed")) syn.seed = f.corpus_seed;
    if (given(cmd, "--duration")) syn.duration_s = f.duration;

    auto& fe = cfg.frontend;
    if (given(cmd, "--frame-ms")) fe.frame_ms = f.frame_ms;
    if (given(cmd, "--hop-ms")) fe.hop_ms = f.hop_ms;
    if (given(cmd, "--n-filters")) fe.n_filters = f.n_filters;
    if (given(cmd, "--n-ceps")) fe.n_ceps = f.n_ceps;
    if (given(cmd, "--window")) fe.window = parse_window(f.window);
    if (given(cmd, "--no-pad")) fe.fft_pad = false;

    auto& tr = cfg.training;
    if (given(cmd, "--states")) tr.n_states = f.states;
    if (given(cmd, "--mix")) tr.n_mix = f.mix;
    if (given(cmd, "--max-iters")) tr.max_iters = f.max_iters;
    if (given(cmd, "--rel-tol")) tr.rel_tol = f.rel_tol;
    if (given(cmd, "--variance-floor")) tr.variance_floor = f.variance_floor;

    auto& ev = cfg.evaluation;
    if (given(cmd, "--iterations")) ev.n_iterations = f.iterations;
    if (given(cmd, "--train-fraction")) ev.train_fraction = f.train_fraction;
    if (given(cmd, "--k")) ev.subset_sizes = parse_subset_sizes(f.k);
    if (given(cmd, "--fratio-scope")) ev.fratio_scope = parse_fratio_scope(f.fratio_scope);

    cfg.propagate();
    if (cfg.output_dir.empty()) throw Error(ErrorKind::Configuration, "output_dir: --out is required");
    return cfg;
}

void prepare_output(const PipelineConfig& cfg, const std::string& command, nlohmann::json extra = {}) {
    std::error_code ec;
    fs::create_directories(cfg.output_dir, ec);
    if (ec) throw Error(ErrorKind::Io, fmt::format("cannot create '{}': {}", cfg.output_dir.string(), ec.message()));
    nlohmann::json run = to_json(cfg);
    run["command"] = command;
    if (!extra.is_null()) run["options"] = extra;
    write_text(cfg.output_dir / "run.json", run.dump(2) + "\n");
}

FeatureCorpus load_features(const PipelineConfig& cfg) {
    const Corpus corpus = load_corpus(cfg.corpus);
    return make_feature_corpus(extract_corpus(corpus, cfg.frontend, cfg.jobs), corpus.classes);
}

std::vector<std::size_t> all_clips(const FeatureCorpus& data) {
    std::vector<std::size_t> idx(data.sequences.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    return idx;
}

// ---------------------------------------------------------------------------

int cmd_synth(const CLI::App& cmd, const Flags& f) {
    PipelineConfig cfg = resolve(cmd, f);
    if (given(cmd, "--seed")) cfg.corpus.synthetic.seed = f.seed;
    cfg.corpus.kind = CorpusKind::Synthetic;
    validate(cfg);
    prepare_output(cfg, "synth");
    const Corpus corpus = build_synthetic_corpus(cfg.corpus.synthetic);
    std::string manifest = "path,label\n";
    for (const auto& clip : corpus.clips) {
        const fs::path rel = fs::path(*clip.label) / (clip.id + ".wav");
        fs::create_directories(cfg.output_dir / rel.parent_path());
        write_wav(cfg.output_dir / rel, clip);
        manifest += fmt::format("{},{}\n", rel.generic_string(), *clip.label);
    }
    write_text(cfg.output_dir / "manifest.csv", manifest);
    fmt::print("wrote {} clips ({} classes) to {}\n", corpus.clips.size(), corpus.classes.size(),
               cfg.output_dir.string());
    return 0;
}

int cmd_extract(const CLI::App& cmd, const Flags& f) {
    const PipelineConfig cfg = resolve(cmd, f);
    validate(cfg.frontend);
    prepare_output(cfg, "extract");
    const Corpus corpus = load_corpus(cfg.corpus);
    const auto features = extract_corpus(corpus, cfg.frontend, cfg.jobs);
    write_text(cfg.output_dir / "features.csv", features_csv(features));
    std::size_t rows = 0;
    for (const auto& s : features) rows += s.size();
    fmt::print("extracted {} frames from {} clips\n", rows, features.size());
    return 0;
}

int cmd_fratio(const CLI::App& cmd, const Flags& f) {
    const PipelineConfig cfg = resolve(cmd, f);
    validate(cfg.frontend);
    prepare_output(cfg, "fratio", {{"k", f.summary_k}});
    const FeatureCorpus data = load_features(cfg);
    const FRatioReport rep = rank_coefficients(data, all_clips(data));
    const std::string summary = subset_summary(rep, std::min(f.summary_k, rep.f.size()));
    write_text(cfg.output_dir / "fratio.csv", fratio_csv(rep));
    write_text(cfg.output_dir / "fratio_summary.txt", summary);
    fmt::print("{}", summary);
    return 0;
}

int cmd_train(const CLI::App& cmd, const Flags& f) {
    const PipelineConfig cfg = resolve(cmd, f);
    validate(cfg.frontend);
    validate(cfg.training);
    const bool select = given(cmd, "--k");
    prepare_output(cfg, "train", select ? nlohmann::json{{"k", f.k}} : nlohmann::json{});
    const FeatureCorpus data = load_features(cfg);
    CoefficientSubset subset = full_subset(data.dim());
    if (select) {
        const auto sizes = parse_subset_sizes(f.k);
        if (sizes.size() != 1) throw Error(ErrorKind::Configuration, "--k: train takes a single subset size");
        if (sizes[0] < 1 || sizes[0] > data.dim())
            throw Error(ErrorKind::Configuration, fmt::format("--k: {} outside 1..{}", sizes[0], data.dim()));
        subset = select_top_k(rank_coefficients(data, all_clips(data)), sizes[0]);
    }
    ModelSet set;
    set.config = to_json(cfg);
    set.subset = subset.indices;
    std::sort(set.subset.begin(), set.subset.end());
    set.models = train_class_models(data, {}, subset, cfg.training);
    save_model_set(cfg.output_dir / "models.json", set);
    fmt::print("trained {} models on coefficients {}\n", set.models.size(), fmt::join(set.subset, " "));
    return 0;
}

void write_sweep_outputs(const PipelineConfig& cfg, const SweepReport& rep, const std::string& stem) {
    write_text(cfg.output_dir / (stem + ".csv"), sweep_csv(rep));
    write_text(cfg.output_dir / (stem + "_iterations.csv"), sweep_iterations_csv(rep));
    write_text(cfg.output_dir / (stem + "_confusion.csv"), confusion_csv(rep));
    for (const auto& e : rep.entries)
        fmt::print("k={:>2}  accuracy {:7.3f}% (sd {:.3f})\n", e.k, e.mean_accuracy, e.std_accuracy);
}

int cmd_evaluate(const CLI::App& cmd, const Flags& f) {
    PipelineConfig cfg = resolve(cmd, f);
    cfg.evaluation.feature_selection = false;
    validate(cfg);

    if (!f.models.empty()) {
        // Score the whole corpus against previously trained models.
        prepare_output(cfg, "evaluate", {{"models", f.models}});
        const ModelSet set = load_model_set(f.models);
        const FeatureCorpus data = load_features(cfg);
        CoefficientSubset subset;
        subset.indices = set.subset.empty() ? full_subset(data.dim()).indices : set.subset;
        std::vector<std::string> model_classes;
        for (const auto& m : set.models) model_classes.push_back(m.class_label);
        ConfusionMatrix cm(model_classes.size());
        for (std::size_t i = 0; i < data.sequences.size(); ++i) {
            const auto& label = data.classes[data.labels[i]];
            auto it = std::find(model_classes.begin(), model_classes.end(), label);
            if (it == model_classes.end())
                throw Error(ErrorKind::Precondition, fmt::format("no model for class '{}'", label));
            const auto decision = classify(set.models, project(data.sequences[i], subset));
            cm.add(std::size_t(it - model_classes.begin()), decision.predicted);
        }
        std::string csv = "actual,predicted,count\n";
        for (std::size_t a = 0; a < cm.size(); ++a)
            for (std::size_t p = 0; p < cm.size(); ++p)
                csv += fmt::format("{},{},{}\n", model_classes[a], model_classes[p], cm.at(a, p));
        write_text(cfg.output_dir / "scored_confusion.csv", csv);
        fmt::print("accuracy {:.3f}% over {} clips\n", cm.accuracy(), cm.total());
        return 0;
    }

    prepare_output(cfg, "evaluate");
    const FeatureCorpus data = load_features(cfg);
    write_sweep_outputs(cfg, sweep(data, cfg.evaluation, cfg.training), "evaluate");
    return 0;
}

int cmd_sweep(const CLI::App& cmd, const Flags& f) {
    PipelineConfig cfg = resolve(cmd, f);
    cfg.evaluation.feature_selection = true;
    validate(cfg);
    prepare_output(cfg, "sweep");
    const FeatureCorpus data = load_features(cfg);
    const SweepReport rep = sweep(data, cfg.evaluation, cfg.training);
    write_sweep_outputs(cfg, rep, "sweep");
    write_text(cfg.output_dir / "fratio.csv", fratio_csv(rank_coefficients(data, all_clips(data))));
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"MFCC / F-ratio / GMM-HMM vowel classification toolkit", "vowelrec"};
    app.require_subcommand(1);
    Flags f;
    app.add_option("--config", f.config, "JSON config file; flags override its values");
    app.add_option("--seed", f.seed, "Experiment seed");
    app.add_option("--jobs", f.jobs, "Worker threads (0: all cores)");

    app.fallthrough();  // global flags may follow the subcommand

    auto* synth = app.add_subcommand("synth", "Write the synthetic vowel corpus as WAV files plus manifest.csv");
    synth->add_option("--out", f.out, "Output directory");
    synth->add_option("--per-class", f.per_class, "Clips per class");
    synth->add_option("--sample-rate", f.sample_rate, "Sample rate in Hz");
    synth->add_option("--duration", f.duration, "Clip duration in seconds");

    auto* extract = app.add_subcommand("extract", "Extract MFCC features to features.csv");
    extract->add_option("--out", f.out, "Output directory");
    add_source_flags(*extract, f);
    add_frontend_flags(*extract, f);

    auto* fratio = app.add_subcommand("fratio", "Rank coefficients by F-ratio");
    fratio->add_option("--out", f.out, "Output directory");
    fratio->add_option("--top-k", f.summary_k, "Size of the subset named in the summary");
    add_source_flags(*fratio, f);
    add_frontend_flags(*fratio, f);

    auto* train = app.add_subcommand("train", "Train one HMM per class on the whole corpus");
    train->add_option("--out", f.out, "Output directory");
    train->add_option("--k", f.k, "Train on the top-k coefficients by F-ratio");
    add_source_flags(*train, f);
    add_frontend_flags(*train, f);
    add_training_flags(*train, f);

    auto* evaluate = app.add_subcommand("evaluate", "Hold-out evaluation on all coefficients");
    evaluate->add_option("--out", f.out, "Output directory");
    evaluate->add_option("--models", f.models, "Score the corpus against a saved model set instead");
    add_source_flags(*evaluate, f);
    add_frontend_flags(*evaluate, f);
    add_training_flags(*evaluate, f);
    add_eval_flags(*evaluate, f);

    auto* sweep_cmd = app.add_subcommand("sweep", "Hold-out accuracy for each top-k F-ratio subset");
    sweep_cmd->add_option("--out", f.out, "Output directory");
    sweep_cmd->add_option("--k", f.k, "Subset sizes: 3..12, 3,5,8 or 12");
    sweep_cmd->add_option("--fratio-scope", f.fratio_scope, "Rank on 'train' clips only or on 'all' clips");
    add_source_flags(*sweep_cmd, f);
    add_frontend_flags(*sweep_cmd, f);
    add_training_flags(*sweep_cmd, f);
    add_eval_flags(*sweep_cmd, f);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    }

    try {
        if (synth->parsed()) return cmd_synth(*synth, f);
        if (extract->parsed()) return cmd_extract(*extract, f);
        if (fratio->parsed()) return cmd_fratio(*fratio, f);
        if (train->parsed()) return cmd_train(*train, f);
        if (evaluate->parsed()) return cmd_evaluate(*evaluate, f);
        if (sweep_cmd->parsed()) return cmd_sweep(*sweep_cmd, f);
    } catch (const Error& e) {
        fmt::print(stderr, "error ({}): {}\n", to_string(e.kind()), e.what());
        return exit_code_for(e.kind());
    } catch (const std::exception& e) {
        fmt::print(stderr, "error: {}\n", e.what());
        return 2;
    }
    return 1;
}
