#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "test_support.hpp"
#include "vowelrec/report.hpp"

namespace fs = std::filesystem;

namespace {

int run(const std::string& args) {
    const std::string cmd = std::string(VOWELREC_CLI) + " " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::size_t line_count(const fs::path& p) {
    std::ifstream in(p);
    std::size_t n = 0;
    for (std::string line; std::getline(in, line);) ++n;
    return n;
}

std::string slurp(const fs::path& p) { return vowelrec::read_text(p); }

// Line of a sweep-style CSV whose first field is `k`.
std::string row_for_k(const fs::path& p, const std::string& k) {
    std::istringstream in(slurp(p));
    for (std::string line; std::getline(in, line);)
        if (line.rfind(k + ",", 0) == 0) return line;
    return {};
}

const std::string kSmall = "--synthetic --per-class 4 --corpus-seed 3 --jobs 1";
const std::string kQuick = kSmall + " --max-iters 3 --iterations 2";

}  // namespace

TEST(Cli, SynthWritesCorpusAndManifest) {
    testing_support::TempDir dir("vowelrec_cli_synth");
    ASSERT_EQ(run("synth --per-class 2 --seed 7 --out " + dir.path().string()), 0);
    std::size_t wavs = 0;
    for (const auto& e : fs::recursive_directory_iterator(dir.path()))
        if (e.path().extension() == ".wav") ++wavs;
    EXPECT_EQ(wavs, 10u);
    EXPECT_EQ(line_count(dir.path() / "manifest.csv"), 11u);
    EXPECT_TRUE(fs::exists(dir.path() / "run.json"));
    EXPECT_EQ(run("synth --per-class 2"), 1);
    EXPECT_EQ(run("frobnicate"), 1);
}

TEST(Cli, ExtractRowCountsAndCorruptInput) {
    testing_support::TempDir dir("vowelrec_cli_extract");
    const auto data = dir.path() / "data";
    ASSERT_EQ(run("synth --per-class 2 --out " + data.string()), 0);
    const std::string manifest = " --manifest " + (data / "manifest.csv").string();

    ASSERT_EQ(run("extract" + manifest + " --out " + (dir.path() / "a").string()), 0);
    EXPECT_EQ(line_count(dir.path() / "a" / "features.csv"), 1u + 10u * 25u);
    std::ifstream in(dir.path() / "a" / "features.csv");
    std::string header;
    std::getline(in, header);
    EXPECT_EQ(header, "clip_id,label,frame_idx,c1,c2,c3,c4,c5,c6,c7,c8,c9,c10,c11,c12");

    ASSERT_EQ(run("extract --frame-ms 30 --hop-ms 30" + manifest + " --out " + (dir.path() / "b").string()), 0);
    EXPECT_EQ(line_count(dir.path() / "b" / "features.csv"), 1u + 10u * 13u);

    std::ofstream(data / "e" / "e_001.wav") << "not audio";
    EXPECT_NE(run("extract" + manifest + " --out " + (dir.path() / "c").string()), 0);
}

TEST(Cli, SweepIsReproducibleAndMatchesEvaluate) {
    testing_support::TempDir dir("vowelrec_cli_sweep");
    const auto a = dir.path() / "a", b = dir.path() / "b", e = dir.path() / "e", r = dir.path() / "r";
    ASSERT_EQ(run("--seed 5 sweep --k 3,12 " + kQuick + " --out " + a.string()), 0);
    ASSERT_EQ(run("--seed 5 sweep --k 3,12 " + kQuick + " --out " + b.string()), 0);
    for (const char* name : {"sweep.csv", "sweep_iterations.csv", "sweep_confusion.csv", "fratio.csv"})
        EXPECT_EQ(slurp(a / name), slurp(b / name)) << name;

    ASSERT_EQ(run("--seed 5 evaluate " + kQuick + " --out " + e.string()), 0);
    const auto swept = row_for_k(a / "sweep.csv", "12");
    ASSERT_FALSE(swept.empty());
    EXPECT_EQ(swept, row_for_k(e / "evaluate.csv", "12"));

    // The recorded run.json alone reproduces the run.
    ASSERT_EQ(run("--config " + (a / "run.json").string() + " sweep --out " + r.string()), 0);
    EXPECT_EQ(slurp(a / "sweep.csv"), slurp(r / "sweep.csv"));
}

TEST(Cli, ValidationErrorsExitWithUsageCode) {
    testing_support::TempDir dir("vowelrec_cli_bad");
    EXPECT_EQ(run("sweep --iterations 0 --synthetic --out " + dir.path().string()), 1);
    EXPECT_EQ(run("sweep --k 13 --synthetic --out " + dir.path().string()), 1);
    EXPECT_EQ(run("extract --window kaiser --synthetic --out " + dir.path().string()), 1);
    std::ofstream(dir.path() / "bad.json") << R"({"training": {"n_state": 3}})";
    EXPECT_EQ(run("--config " + (dir.path() / "bad.json").string() + " train --synthetic --out " +
                  dir.path().string()),
              1);
}

TEST(Cli, TrainThenScoreSavedModels) {
    testing_support::TempDir dir("vowelrec_cli_train");
    const auto m = dir.path() / "m", s = dir.path() / "s", f = dir.path() / "f";
    ASSERT_EQ(run("train --k 6 --max-iters 3 " + kSmall + " --out " + m.string()), 0);
    ASSERT_TRUE(fs::exists(m / "models.json"));
    ASSERT_EQ(run("evaluate --models " + (m / "models.json").string() + " " + kSmall + " --out " + s.string()), 0);
    EXPECT_EQ(line_count(s / "scored_confusion.csv"), 1u + 25u);

    ASSERT_EQ(run("fratio --top-k 4 " + kSmall + " --out " + f.string()), 0);
    EXPECT_EQ(line_count(f / "fratio.csv"), 13u);
    EXPECT_EQ(slurp(f / "fratio_summary.txt").rfind("top-4 coefficients by F-ratio:", 0), 0u);
}
