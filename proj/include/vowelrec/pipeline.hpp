#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

#include "vowelrec/corpus.hpp"
#include "vowelrec/eval.hpp"
#include "vowelrec/frontend.hpp"
#include "vowelrec/hmm.hpp"

namespace vowelrec {

enum class CorpusKind { Synthetic, Directory, Manifest };

struct CorpusSource {
    CorpusKind kind = CorpusKind::Synthetic;
    std::filesystem::path path;  // directory or manifest
    SyntheticCorpusOptions synthetic;
};

/// Everything a run depends on. `seed` drives splits and model
/// initialization; the synthetic corpus has its own seed so the data can
/// stay fixed while the experiment seed varies.
struct PipelineConfig {
    FrontendConfig frontend;
    TrainingConfig training;
    EvalConfig evaluation;
    CorpusSource corpus;
    std::filesystem::path output_dir;
    std::uint64_t seed = 1;
    int jobs = 0;

    /// Copies `seed` and `jobs` into the nested configs.
    void propagate();
};

PipelineConfig default_pipeline_config();

nlohmann::json to_json(const PipelineConfig& cfg);

/// Overlays the keys present in `j` onto `base`. Unknown keys and type
/// mismatches raise Configuration errors naming the field path.
PipelineConfig apply_json(const nlohmann::json& j, PipelineConfig base);
PipelineConfig load_pipeline_config(const std::filesystem::path& path, PipelineConfig base);

/// Validates every nested config; messages carry field paths such as
/// "evaluation.n_iterations".
void validate(const PipelineConfig& cfg);

Corpus load_corpus(const CorpusSource& source);

/// Parses "3..12", "3,5,8" or "12" into subset sizes.
std::vector<std::size_t> parse_subset_sizes(const std::string& text);

}  // namespace vowelrec
