#include "memeprobe/config.hpp"
#include "memeprobe/errors.hpp"
#include "memeprobe/runner.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>

#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace memeprobe;

namespace {

struct StageFlags {
    std::string config;
    std::string out;
    std::optional<std::uint64_t> seed;
    std::string target;
    std::string mock_scenario;
    std::string manifest;
    std::vector<std::string> stage_params;
};

void add_stage_flags(CLI::App* cmd, StageFlags& f)
{
    cmd->add_option("--config", f.config, "JSON run configuration (optional; defaults apply)");
    cmd->add_option("--out", f.out, "run output directory");
    cmd->add_option("--seed", f.seed, "random seed for sampling and seed-set selection");
    cmd->add_option("--target", f.target, "target model name (also used as the HTTP model id)");
    cmd->add_option("--mock-scenario", f.mock_scenario, "scripted scenario file; switches both backends to mock");
    cmd->add_option("--manifest", f.manifest, "meme manifest (line-delimited JSON)");
    cmd->add_option("--stage-params", f.stage_params, "stage parameter override key=value (repeatable)")
        ->allow_extra_args(false);
}

RunConfig effective_config(const StageFlags& f)
{
    RunConfig config = f.config.empty() ? RunConfig{} : load_config(f.config);
    if (!f.out.empty()) {
        config.output_dir = fs::absolute(f.out).lexically_normal();
    }
    if (f.seed) {
        config.rng_seed = *f.seed;
    }
    if (!f.target.empty()) {
        config.target_name = f.target;
        if (config.target.kind == "http") {
            config.target.model = f.target;
        }
    }
    if (!f.mock_scenario.empty()) {
        config.mock_scenario = fs::absolute(f.mock_scenario).lexically_normal();
        config.controller.kind = "mock";
        config.target.kind = "mock";
    }
    if (!f.manifest.empty()) {
        config.manifest = fs::absolute(f.manifest).lexically_normal();
    }
    for (const auto& p : f.stage_params) {
        apply_stage_param(config, p);
    }
    return config;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"memeprobe: agent-based evaluation of how well a multimodal model explains harmful memes"};
    app.require_subcommand(1);

    StageFlags flags;
    std::vector<std::pair<CLI::App*, Stage>> stage_commands;
    for (auto [name, stage, help] : {
             std::tuple{"mine", Stage::mine, "assign memes to harm categories and write misbeliefs"},
             std::tuple{"score", Stage::score, "grade the target model on the mined samples"},
             std::tuple{"refine", Stage::refine, "rewrite meme texts into harder samples and re-grade"},
             std::tuple{"report", Stage::report, "compute metrics and write report.md and CSV files"},
             std::tuple{"full", Stage::full, "mine, score, refine and report in one run"},
         }) {
        auto* cmd = app.add_subcommand(name, help);
        add_stage_flags(cmd, flags);
        stage_commands.emplace_back(cmd, stage);
    }

    std::string resume_dir;
    bool repair = false;
    auto* resume_cmd = app.add_subcommand("resume", "finish an interrupted run from its event log");
    resume_cmd->add_option("dir", resume_dir, "run output directory")->required();
    resume_cmd->add_flag("--repair", repair, "drop a torn final event-log line before resuming");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*resume_cmd) {
            switch (resume(resume_dir, repair)) {
            case ResumeOutcome::already_complete:
                fmt::print("run in {} is already complete; nothing to do\n", resume_dir);
                break;
            case ResumeOutcome::nothing_to_resume:
                fmt::print("no run recorded in {}; nothing to do\n", resume_dir);
                break;
            case ResumeOutcome::resumed:
                fmt::print("resumed run in {} completed\n", resume_dir);
                break;
            }
            return 0;
        }
        for (auto [cmd, stage] : stage_commands) {
            if (*cmd) {
                auto config = effective_config(flags);
                run_stage(stage, config);
                fmt::print("{} finished; artifacts in {}\n", to_string(stage), config.output_dir.string());
            }
        }
        return 0;
    } catch (const InvalidConfig& e) {
        fmt::print(stderr, "error: {}\n", e.what());
        return 2;
    } catch (const Error& e) {
        fmt::print(stderr, "error [{}]: {}\n", e.kind(), e.what());
        return 1;
    } catch (const std::exception& e) {
        fmt::print(stderr, "error: {}\n", e.what());
        return 1;
    }
}
