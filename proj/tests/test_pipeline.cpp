#include <gtest/gtest.h>

#include <fstream>

#include "test_support.hpp"
#include "vowelrec/error.hpp"
#include "vowelrec/pipeline.hpp"
#include "vowelrec/report.hpp"

using namespace vowelrec;

TEST(PipelineConfigJson, RoundTrip) {
    PipelineConfig cfg = default_pipeline_config();
    cfg.seed = 99;
    cfg.frontend.window = WindowKind::Hann;
    cfg.frontend.high_hz = 7000.0;
    cfg.training.n_mix = 3;
    cfg.evaluation.subset_sizes = {4, 8};
    cfg.evaluation.fratio_scope = FRatioScope::All;
    cfg.output_dir = "out/x";
    const auto back = apply_json(to_json(cfg), default_pipeline_config());
    EXPECT_EQ(to_json(back), to_json(cfg));
    EXPECT_EQ(back.training.seed, 99u);
    EXPECT_EQ(back.evaluation.seed, 99u);
}

TEST(PipelineConfigJson, ErrorsNameTheField) {
    auto message = [](const nlohmann::json& j) {
        try {
            apply_json(j, default_pipeline_config());
        } catch (const Error& e) {
            EXPECT_EQ(e.kind(), ErrorKind::Configuration);
            return std::string(e.what());
        }
        return std::string();
    };
    EXPECT_NE(message({{"training", {{"n_mixes", 2}}}}).find("training.n_mixes"), std::string::npos);
    EXPECT_NE(message({{"evaluation", {{"n_iterations", "many"}}}}).find("evaluation.n_iterations"),
              std::string::npos);
    EXPECT_NE(message({{"corpus", {{"source", "tape"}}}}).find("corpus.source"), std::string::npos);
    EXPECT_NE(message({{"bogus", 1}}).find("bogus"), std::string::npos);
}

TEST(PipelineConfigJson, ValidateReportsNestedPaths) {
    PipelineConfig cfg = default_pipeline_config();
    cfg.evaluation.n_iterations = 0;
    try {
        validate(cfg);
        FAIL();
    } catch (const Error& e) {
        EXPECT_NE(std::string(e.what()).find("evaluation.n_iterations"), std::string::npos);
    }
}

TEST(PipelineConfigJson, LoadsFileWithComments) {
    testing_support::TempDir dir("vowelrec_cfg");
    std::ofstream(dir.path() / "c.json") << "{\n  // quick run\n  \"seed\": 5, \"evaluation\": {\"n_iterations\": 2}\n}\n";
    const auto cfg = load_pipeline_config(dir.path() / "c.json", default_pipeline_config());
    EXPECT_EQ(cfg.seed, 5u);
    EXPECT_EQ(cfg.evaluation.n_iterations, 2);
    EXPECT_EQ(cfg.frontend.n_ceps, 12);
}

TEST(SubsetSizes, Parsing) {
    EXPECT_EQ(parse_subset_sizes("3..12"), (std::vector<std::size_t>{3, 4, 5, 6, 7, 8, 9, 10, 11, 12}));
    EXPECT_EQ(parse_subset_sizes("3,5,8"), (std::vector<std::size_t>{3, 5, 8}));
    EXPECT_EQ(parse_subset_sizes("12"), (std::vector<std::size_t>{12}));
    EXPECT_THROW(parse_subset_sizes("8..3"), Error);
    EXPECT_THROW(parse_subset_sizes("x"), Error);
}

TEST(Reports, CsvShapes) {
    FRatioReport rep;
    rep.f = {0.5, 2.0, 1.0};
    rep.ranking = {1, 2, 0};
    EXPECT_EQ(fratio_csv(rep), "coefficient,f_ratio,rank\n1,0.5,3\n2,2,1\n3,1,2\n");
    EXPECT_EQ(subset_summary(rep, 2), "top-2 coefficients by F-ratio: 2 3\n");

    FeatureSequence s;
    s.clip_id = "a_000";
    s.label = "a";
    s.frames = {{0.25, -1.0}};
    EXPECT_EQ(features_csv({s}), "clip_id,label,frame_idx,c1,c2\na_000,a,0,0.25,-1\n");
}
