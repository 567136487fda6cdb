#include "faith/pipeline.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "faith/error.hpp"
#include "faith/image.hpp"
#include "faith/util.hpp"
#include "testing/generators.hpp"
#include "testing/helpers.hpp"

namespace fs = std::filesystem;
using faith::BiasKind;
using faith::BiasSpec;
using faith::ContextMode;
using faith::ContextSetting;
using faith::Error;
using faith::Group;
using faith::Label;
using faith::ModelEndpoint;
using faith::Pipeline;
using faith::Question;
using faith::QueryMode;
using faith::RunConfig;
using faith::StageResult;
using testing_support::TempDir;

namespace {

ModelEndpoint oracle_endpoint(const std::string& name, const std::string& params) {
    ModelEndpoint endpoint;
    endpoint.base_url = "oracle://synthetic?" + params;
    endpoint.model_name = name;
    return endpoint;
}

fs::path write_demo_dataset(const fs::path& dir, long n) {
    faith::SeededRng rng(11);
    fs::create_directories(dir / "images");
    std::vector<Question> questions;
    for (long i = 0; i < n; ++i) {
        Question q = testing_support::random_question(rng, "q" + std::to_string(i));
        const std::string name = "images/q" + std::to_string(i) + ".png";
        faith::write_png(dir / name, testing_support::random_image(rng, 200, 150));
        q.image = name;
        q.boxes = testing_support::side_by_side_boxes(q, 200, 150, true);
        questions.push_back(std::move(q));
    }
    const fs::path path = dir / "questions.jsonl";
    faith::write_dataset(path, questions);
    return path;
}

RunConfig demo_config(const fs::path& root, const fs::path& dataset,
                      const std::string& run_id = "demo") {
    RunConfig config;
    config.run_id = run_id;
    config.runs_dir = root / "runs";
    config.dataset = dataset;
    config.cache_dir = root / "cache";
    config.seed = 3;
    config.pairs = 6;
    config.pool_size = 4;
    config.biases = {BiasSpec{BiasKind::TextHint, {}}, BiasSpec{BiasKind::ImageHint, {}}};
    config.settings = {ContextSetting{ContextMode::NoContext, 1, 0},
                       ContextSetting{ContextMode::Biased, 3, 5}};
    config.models = {oracle_endpoint(
        "demo-model", "base_accuracy=1.0&flip_prob=1.0&articulate_prob=1.0&seed=9")};
    return config;
}

nlohmann::json read_json(const fs::path& path) {
    return nlohmann::json::parse(faith::read_file(path));
}

}  // namespace

TEST(ModelSegment, SanitizesPathHostileCharacters) {
    EXPECT_EQ(faith::model_segment("meta/llama:8b"), "meta_llama_8b");
    EXPECT_EQ(faith::model_segment("gpt-4.1_mini"), "gpt-4.1_mini");
    EXPECT_EQ(faith::model_segment("a b"), "a_b");
}

TEST(RunConfigJson, ResolvesRelativePathsAgainstConfigDir) {
    TempDir dir;
    const fs::path dataset = write_demo_dataset(dir.path(), 12);
    const nlohmann::json j{
        {"run_id", "r1"},
        {"dataset", "questions.jsonl"},
        {"runs_dir", "out"},
        {"cache_dir", "cache"},
        {"biases", {{{"kind", "text_hint"}}}},
        {"settings", {{{"mode", "no_context"}}}},
        {"models",
         {{{"base_url", "oracle://synthetic"}, {"model_name", "m"}}}},
    };
    const RunConfig config = faith::run_config_from_json(j, dir.path());
    EXPECT_EQ(config.dataset, dataset.lexically_normal());
    EXPECT_EQ(config.runs_dir, (dir.path() / "out").lexically_normal());
    EXPECT_EQ(config.cache_dir, (dir.path() / "cache").lexically_normal());
    EXPECT_EQ(config.models[0].model_name, "m");
    EXPECT_EQ(config.settings[0].mode, ContextMode::NoContext);

    const nlohmann::json echoed = faith::run_config_to_json(config);
    const RunConfig reparsed = faith::run_config_from_json(echoed, "/");
    EXPECT_EQ(faith::run_config_to_json(reparsed).dump(), echoed.dump());
}

TEST(RunConfigJson, UnknownKeysAreErrors) {
    const fs::path base = "/";
    EXPECT_THROW(faith::run_config_from_json({{"run_idd", "x"}}, base), Error);
    EXPECT_THROW(
        faith::run_config_from_json({{"judge", {{"modes", "rules"}}}}, base), Error);
    EXPECT_THROW(
        faith::run_config_from_json({{"biases", {{{"kind", "text_hint"}, {"x", 1}}}}}, base),
        Error);
    EXPECT_THROW(
        faith::run_config_from_json(
            {{"biases", {{{"kind", "text_hint"}, {"params", {{"n", 3}}}}}}}, base),
        Error);
    EXPECT_THROW(faith::run_config_from_json({{"prompt", {{"tone", "curt"}}}}, base), Error);
}

TEST(RunConfigValidation, CatchesBadInputs) {
    TempDir dir;
    const fs::path dataset = write_demo_dataset(dir.path(), 12);
    const RunConfig good = demo_config(dir.path(), dataset);
    EXPECT_NO_THROW(faith::validate_run_config(good));

    RunConfig bad = good;
    bad.run_id = "a/b";
    EXPECT_THROW(faith::validate_run_config(bad), Error);

    bad = good;
    bad.dataset = dir.path() / "missing.jsonl";
    EXPECT_THROW(faith::validate_run_config(bad), Error);

    bad = good;
    bad.biases = {BiasSpec{BiasKind::TextHint, {}}, BiasSpec{BiasKind::TextHint, {}}};
    EXPECT_THROW(faith::validate_run_config(bad), Error);

    bad = good;
    bad.settings.push_back(good.settings[0]);
    EXPECT_THROW(faith::validate_run_config(bad), Error);

    bad = good;
    bad.settings[1].n_examples = 9;  // pool only holds 4
    EXPECT_THROW(faith::validate_run_config(bad), Error);

    bad = good;
    bad.models.clear();
    EXPECT_THROW(faith::validate_run_config(bad), Error);

    bad = good;
    bad.models.push_back(oracle_endpoint("demo:model", "seed=1"));
    bad.models.push_back(oracle_endpoint("demo?model", "seed=1"));  // same segment
    EXPECT_THROW(faith::validate_run_config(bad), Error);

    bad = good;
    bad.judge.kind = faith::JudgeMode::Model;
    EXPECT_THROW(faith::validate_run_config(bad), Error);  // no endpoint

    bad.judge.endpoint = good.models[0];
    EXPECT_THROW(faith::validate_run_config(bad), Error);  // oracle judge

    bad = good;
    bad.judge.endpoint = good.models[0];
    EXPECT_THROW(faith::validate_run_config(bad), Error);  // rules judge with endpoint
}

TEST(PipelineStages, InjectWritesPairsPoolsAndImages) {
    TempDir dir;
    Pipeline pipeline(demo_config(dir.path(), write_demo_dataset(dir.path(), 12)));

    const StageResult result = pipeline.inject();
    EXPECT_EQ(result.stage, "inject");
    EXPECT_FALSE(result.skipped);
    EXPECT_EQ(result.items, 24);  // 2 biases x 6 pairs x 2 directions

    for (const BiasSpec& spec : pipeline.config().biases) {
        EXPECT_TRUE(fs::exists(pipeline.pair_path(spec, Group::Plus)));
        EXPECT_TRUE(fs::exists(pipeline.pair_path(spec, Group::Minus)));
        EXPECT_TRUE(fs::exists(pipeline.pool_path(spec, false)));
        EXPECT_TRUE(fs::exists(pipeline.pool_path(spec, true)));
        EXPECT_TRUE(fs::exists(pipeline.bias_dir(spec) / "warnings.json"));
    }

    const BiasSpec text = pipeline.config().biases[0];
    const std::vector<Question> plus = pipeline.load_side(text, Group::Plus);
    const std::vector<Question> minus = pipeline.load_side(text, Group::Minus);
    ASSERT_EQ(plus.size(), 6u);
    ASSERT_EQ(minus.size(), 6u);
    for (std::size_t i = 0; i < plus.size(); ++i) {
        EXPECT_EQ(plus[i].id, minus[i].id);
        EXPECT_EQ(plus[i].group, Group::Plus);
        EXPECT_EQ(minus[i].group, Group::Minus);
        ASSERT_TRUE(plus[i].hint.has_value());
        ASSERT_TRUE(minus[i].hint.has_value());
        EXPECT_NE(plus[i].hint->find(to_string(plus[i].ground_truth)), std::string::npos);
        EXPECT_NE(minus[i].hint->find(to_string(faith::other(minus[i].ground_truth))),
                  std::string::npos);
    }

    const BiasSpec visual = pipeline.config().biases[1];
    const std::vector<Question> vplus = pipeline.load_side(visual, Group::Plus);
    ASSERT_EQ(vplus.size(), 6u);
    for (const Question& q : vplus) {
        ASSERT_TRUE(q.image.has_value());
        EXPECT_TRUE(fs::exists(*q.image));
        EXPECT_NE(q.image->find("images/" + q.id + "_plus.png"), std::string::npos);
    }
    const std::vector<Question> vpool = faith::load_pair_file(pipeline.pool_path(visual, true));
    ASSERT_EQ(vpool.size(), 4u);
    for (const Question& q : vpool) {
        EXPECT_EQ(q.group, Group::Plus);
        EXPECT_TRUE(fs::exists(pipeline.bias_dir(visual) / *q.image));
    }
}

TEST(PipelineStages, RequestingMorePairsThanTheSplitHoldsIsAnError) {
    TempDir dir;
    RunConfig config = demo_config(dir.path(), write_demo_dataset(dir.path(), 12));
    config.pairs = 9;  // split keeps 12 - 4 = 8
    Pipeline pipeline(config);
    EXPECT_THROW(pipeline.inject(), Error);
}

TEST(PipelineStages, PromptNeedsInjectFirst) {
    TempDir dir;
    Pipeline pipeline(demo_config(dir.path(), write_demo_dataset(dir.path(), 12)));
    EXPECT_THROW(pipeline.prompt(), Error);
    EXPECT_THROW(pipeline.query(), Error);
}

TEST(PipelineStages, PromptWritesBundlesForEverySettingAndDirection) {
    TempDir dir;
    Pipeline pipeline(demo_config(dir.path(), write_demo_dataset(dir.path(), 12)));
    pipeline.inject();

    const StageResult result = pipeline.prompt();
    EXPECT_FALSE(result.skipped);
    EXPECT_EQ(result.items, 48);  // 2 biases x 2 settings x 2 directions x 6 pairs

    const BiasSpec text = pipeline.config().biases[0];
    const ContextSetting no_context = pipeline.config().settings[0];
    const ContextSetting biased = pipeline.config().settings[1];
    const Question first = pipeline.load_side(text, Group::Plus)[0];

    const auto bare = faith::bundle_from_json(
        read_json(pipeline.bundle_path(text, no_context, first.id, Group::Plus)));
    EXPECT_EQ(bare.messages.size(), 1u);
    EXPECT_EQ(bare.test_question_id, first.id);

    const auto in_context = faith::bundle_from_json(
        read_json(pipeline.bundle_path(text, biased, first.id, Group::Plus)));
    EXPECT_EQ(in_context.messages.size(), 7u);  // 3 examples x 2 + the test turn
    EXPECT_EQ(in_context.messages.back().role, "user");
    ASSERT_EQ(in_context.messages.back().image_paths.size(), 1u);
    EXPECT_TRUE(fs::exists(in_context.messages.back().image_paths[0]));
}

TEST(PipelineStages, FullRunProducesLabelsMetricsAndReport) {
    TempDir dir;
    Pipeline pipeline(demo_config(dir.path(), write_demo_dataset(dir.path(), 12)));

    const std::vector<StageResult> results = pipeline.run_all();
    ASSERT_EQ(results.size(), 6u);
    for (const StageResult& result : results) {
        EXPECT_FALSE(result.skipped) << result.stage;
    }
    EXPECT_EQ(results[2].stage, "query");
    EXPECT_EQ(results[2].items, 48);
    EXPECT_EQ(results[3].items, 48);
    EXPECT_EQ(results[4].items, 4);  // cells: 1 model x 2 biases x 2 settings

    const fs::path run_dir = pipeline.run_dir();
    for (const char* name :
         {"metrics.json", "gaps.csv", "scatter.svg", "distributions.svg", "manifest.json"}) {
        EXPECT_TRUE(fs::exists(run_dir / name)) << name;
    }

    // base_accuracy 1 and flip_prob 1 leave every pair flipped.
    const nlohmann::json metrics = read_json(run_dir / "metrics.json");
    ASSERT_EQ(metrics.at("cells").size(), 4u);
    for (const auto& cell : metrics.at("cells")) {
        EXPECT_DOUBLE_EQ(cell.at("gap").at("gap").get<double>(), 1.0);
        EXPECT_TRUE(cell.at("gap").at("significant").get<bool>());
        EXPECT_EQ(cell.at("flip_pairs").size(), 6u);
        EXPECT_DOUBLE_EQ(
            cell.at("articulation_flips").at("minus").at("relied_rate").get<double>(), 1.0);
    }
    EXPECT_EQ(metrics.at("scatter").size(), 4u);

    const std::string gaps = faith::read_file(run_dir / "gaps.csv");
    EXPECT_NE(gaps.find("demo-model,image_hint,biased_n3_s5,plus,6,1"), std::string::npos);
    EXPECT_NE(gaps.find("mcnemar"), std::string::npos);

    const nlohmann::json manifest = read_json(run_dir / "manifest.json");
    EXPECT_EQ(manifest.at("run_id"), "demo");
    EXPECT_EQ(manifest.at("judge").at("mode"), "rules");
    EXPECT_FALSE(manifest.at("stages").at("query").get<std::string>().empty());
    EXPECT_TRUE(manifest.at("bias_warnings").at("text_hint").empty());
}

TEST(PipelineStages, SecondRunSkipsEveryStage) {
    TempDir dir;
    Pipeline pipeline(demo_config(dir.path(), write_demo_dataset(dir.path(), 12)));
    pipeline.run_all();

    for (const StageResult& result : pipeline.run_all()) {
        EXPECT_TRUE(result.skipped) << result.stage;
        EXPECT_EQ(result.items, 0) << result.stage;
    }
}

TEST(PipelineStages, ChangedBiasParamsInvalidateTheStamps) {
    TempDir dir;
    const fs::path dataset = write_demo_dataset(dir.path(), 12);
    Pipeline first(demo_config(dir.path(), dataset));
    first.run_all();

    RunConfig changed = demo_config(dir.path(), dataset);
    changed.biases[0].params["hint_template"] = "Psst, it is ({label}).";
    Pipeline second(changed);
    const std::vector<StageResult> results = second.run_all();
    for (const StageResult& result : results) {
        EXPECT_FALSE(result.skipped) << result.stage;
    }

    const Question q = second.load_side(changed.biases[0], Group::Plus)[0];
    ASSERT_TRUE(q.hint.has_value());
    const std::string stem_and_hint =
        faith::read_file(second.bundle_path(changed.biases[0], changed.settings[0], q.id,
                                            Group::Plus));
    EXPECT_NE(stem_and_hint.find("Psst, it is"), std::string::npos);
}

TEST(PipelineStages, DeletedArtifactsAreRebuilt) {
    TempDir dir;
    Pipeline pipeline(demo_config(dir.path(), write_demo_dataset(dir.path(), 12)));
    pipeline.run_all();

    fs::remove(pipeline.run_dir() / "metrics.json");
    const StageResult analyze = pipeline.analyze();
    EXPECT_FALSE(analyze.skipped);
    EXPECT_TRUE(fs::exists(pipeline.run_dir() / "metrics.json"));
}

TEST(PipelineStages, EmptyModelRepliesBecomeUnansweredLabels) {
    TempDir dir;
    RunConfig config = demo_config(dir.path(), write_demo_dataset(dir.path(), 12));
    config.biases = {BiasSpec{BiasKind::TextHint, {}}};
    config.settings = {ContextSetting{ContextMode::NoContext, 1, 0}};
    Pipeline pipeline(config);
    pipeline.inject();
    pipeline.prompt();
    pipeline.query();

    const BiasSpec spec = config.biases[0];
    const ContextSetting setting = config.settings[0];
    const Question q = pipeline.load_side(spec, Group::Plus)[0];
    const fs::path path = pipeline.transcript_path(config.models[0], spec, setting, q.id,
                                                   Group::Plus);
    nlohmann::json doc = read_json(path);
    doc["raw_cot"] = "";
    faith::write_file(path, doc.dump(2) + "\n");

    pipeline.judge();
    const nlohmann::json label = read_json(
        pipeline.label_path(config.models[0], spec, setting, q.id, Group::Plus));
    EXPECT_TRUE(label.at("final_answer").is_null());
    EXPECT_TRUE(label.at("articulation").is_null());

    pipeline.analyze();
    const nlohmann::json metrics = read_json(pipeline.run_dir() / "metrics.json");
    EXPECT_EQ(metrics.at("cells").size(), 1u);
    EXPECT_EQ(metrics.at("cells")[0].at("flip_pairs").size(), 5u);
}

TEST(PipelineStages, ReplayRunsAreByteIdenticalAcrossRunDirs) {
    TempDir dir;
    const fs::path dataset = write_demo_dataset(dir.path(), 12);
    RunConfig record = demo_config(dir.path(), dataset, "record");
    Pipeline(record).run_all();

    RunConfig replay_a = demo_config(dir.path(), dataset, "replay-a");
    replay_a.mode = QueryMode::Replay;
    RunConfig replay_b = demo_config(dir.path(), dataset, "replay-b");
    replay_b.mode = QueryMode::Replay;
    Pipeline a(replay_a);
    Pipeline b(replay_b);
    a.run_all();
    b.run_all();

    for (const char* name : {"gaps.csv", "metrics.json", "scatter.svg", "distributions.svg"}) {
        EXPECT_EQ(faith::read_file(a.run_dir() / name), faith::read_file(b.run_dir() / name))
            << name;
    }
}

TEST(PipelineStages, ReplayWithoutACacheEntryIsAnError) {
    TempDir dir;
    RunConfig config = demo_config(dir.path(), write_demo_dataset(dir.path(), 12), "cold");
    config.mode = QueryMode::Replay;
    config.biases = {BiasSpec{BiasKind::TextHint, {}}};
    config.settings = {ContextSetting{ContextMode::NoContext, 1, 0}};
    Pipeline pipeline(config);
    pipeline.inject();
    pipeline.prompt();
    EXPECT_THROW(pipeline.query(), Error);
}
