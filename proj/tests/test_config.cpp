#include "support.hpp"

#include "memeprobe/config.hpp"
#include "memeprobe/errors.hpp"

#include <gtest/gtest.h>

using namespace memeprobe;
using namespace memeprobe::testing;

namespace {

std::string field_of(const std::function<void()>& fn)
{
    try {
        fn();
    } catch (const InvalidConfig& e) {
        return e.field();
    }
    return "<no error>";
}

} // namespace

TEST(Config, EmptyFileGivesDefaults)
{
    auto c = parse_config("  \n", "/base");
    EXPECT_EQ(c.params.miner_count, 3);
    EXPECT_EQ(c.params.candidate_count, 3);
    EXPECT_EQ(c.params.seed_set_size, 10u);
    EXPECT_EQ(c.params.max_iterations, 10);
    EXPECT_EQ(c.params.retrieval_k, 3u);
    EXPECT_DOUBLE_EQ(c.params.fr_threshold, 4.0);
    EXPECT_EQ(c.params.per_category_cap, 200u);
    EXPECT_DOUBLE_EQ(c.params.bm25_k1, 1.2);
    EXPECT_DOUBLE_EQ(c.params.bm25_b, 0.75);
    EXPECT_EQ(c.params.in_flight_limit, 4u);
    EXPECT_EQ(c.params.avg_mode, AvgMode::micro);
    EXPECT_EQ(c.temperatures.of(Role::Miner), 1.0);
    EXPECT_EQ(c.temperatures.of(Role::Scorer), 0.0);
    EXPECT_EQ(c.temperatures.of(Role::Target), 0.0);
    EXPECT_EQ(c.controller.kind, "mock");
    EXPECT_TRUE(c.output_dir.empty());
}

TEST(Config, ThresholdGivenAsWordIsRejected)
{
    EXPECT_EQ(field_of([] { parse_config(R"({"stage_params": {"fr_threshold": "ten"}})", "/"); }), "fr_threshold");
    RunConfig c;
    EXPECT_EQ(field_of([&] { apply_stage_param(c, "fr_threshold=ten"); }), "fr_threshold");
}

TEST(Config, StageParamOverrideShowsInEffectiveConfig)
{
    RunConfig c;
    apply_stage_param(c, "max_iterations=3");
    apply_stage_param(c, " avg_mode = macro ");
    EXPECT_EQ(c.params.max_iterations, 3);
    auto j = config_to_json(c);
    EXPECT_EQ(j.at("stage_params").at("max_iterations"), 3);
    EXPECT_EQ(j.at("stage_params").at("avg_mode"), "macro");
    EXPECT_EQ(field_of([&] { apply_stage_param(c, "max_iterations=0"); }), "max_iterations");
    EXPECT_EQ(field_of([&] { apply_stage_param(c, "depth=3"); }), "depth");
    EXPECT_EQ(field_of([&] { apply_stage_param(c, "max_iterations"); }), "max_iterations");
}

TEST(Config, CredentialsInFileAreRefused)
{
    EXPECT_EQ(field_of([] { parse_config(R"({"api_key": "sk-123"})", "/"); }), "api_key");
    EXPECT_EQ(field_of([] {
                  parse_config(R"({"controller": {"backend": "http", "base_url": "http://x", "api_key": "sk"}})", "/");
              }),
              "controller.api_key");
    EXPECT_EQ(field_of([] { parse_config(R"({"target": {"token": "t"}})", "/"); }), "target.token");
    auto ok = parse_config(R"({"controller": {"backend": "http", "base_url": "http://x", "api_key_env": "KEY"}})", "/");
    EXPECT_EQ(ok.controller.api_key_env, "KEY");
}

TEST(Config, UnknownAndMistypedFields)
{
    EXPECT_EQ(field_of([] { parse_config(R"({"colour": 1})", "/"); }), "colour");
    EXPECT_EQ(field_of([] { parse_config(R"({"controller": {"backend": "grpc"}})", "/"); }), "controller.backend");
    EXPECT_EQ(field_of([] { parse_config(R"({"controller": {"backend": "http"}})", "/"); }), "controller.base_url");
    EXPECT_EQ(field_of([] { parse_config(R"({"rng_seed": -1})", "/"); }), "rng_seed");
    EXPECT_EQ(field_of([] { parse_config(R"({"temperatures": {"poet": 1}})", "/"); }), "temperatures.poet");
    EXPECT_EQ(field_of([] { parse_config(R"({"stage_params": {"bm25_b": 2}})", "/"); }), "bm25_b");
    EXPECT_EQ(field_of([] { parse_config("[1]", "/"); }), "<document>");
    EXPECT_EQ(field_of([] { parse_config("{", "/"); }), "<document>");
}

TEST(Config, PathsResolveAgainstBaseAndRoundTrip)
{
    auto c = parse_config(R"({
        "target": {"backend": "mock", "model": "vision-1"},
        "manifest": "data/m.jsonl",
        "mock_scenario": "/abs/s.json",
        "rng_seed": 9,
        "temperatures": {"Miner": 0.5},
        "category_order": ["Race", "Gender"]
    })",
                          "/base");
    EXPECT_EQ(c.manifest, std::filesystem::path("/base/data/m.jsonl"));
    EXPECT_EQ(c.mock_scenario, std::filesystem::path("/abs/s.json"));
    EXPECT_EQ(c.target_name, "vision-1");
    EXPECT_EQ(c.temperatures.of(Role::Miner), 0.5);

    auto again = parse_config(config_to_json(c).dump(), "/elsewhere");
    EXPECT_EQ(config_to_json(again), config_to_json(c));
}

TEST(Config, LoadFromFile)
{
    auto dir = scratch_dir("config_load");
    write_file_atomic(dir / "c.json", R"({"manifest": "m.jsonl", "stage_params": {"seed_set_size": 4}})");
    auto c = load_config(dir / "c.json");
    EXPECT_EQ(c.manifest, dir / "m.jsonl");
    EXPECT_EQ(c.params.seed_set_size, 4u);
    EXPECT_THROW(load_config(dir / "absent.json"), MissingFile);
}
