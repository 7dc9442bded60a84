#include "memeprobe/runner.hpp"

#include "memeprobe/digest.hpp"
#include "memeprobe/domain.hpp"
#include "memeprobe/errors.hpp"
#include "memeprobe/events.hpp"
#include "memeprobe/http_backend.hpp"
#include "memeprobe/mining.hpp"
#include "memeprobe/mock_backend.hpp"
#include "memeprobe/refinement.hpp"
#include "memeprobe/report.hpp"
#include "memeprobe/scoring.hpp"

#include <map>

namespace memeprobe {

namespace fs = std::filesystem;
using nlohmann::json;

std::string_view to_string(Stage stage)
{
    switch (stage) {
    case Stage::mine: return "mine";
    case Stage::score: return "score";
    case Stage::refine: return "refine";
    case Stage::report: return "report";
    case Stage::full: return "full";
    }
    return "?";
}

std::optional<Stage> stage_from_string(std::string_view name)
{
    for (auto s : {Stage::mine, Stage::score, Stage::refine, Stage::report, Stage::full}) {
        if (to_string(s) == name) {
            return s;
        }
    }
    return std::nullopt;
}

namespace {

json config_echo(const RunConfig& config)
{
    auto j = config_to_json(config);
    j.erase("output_dir");
    return j;
}

class Run {
public:
    Run(const RunConfig& config, const RunHooks& hooks, std::shared_ptr<ReplayCache> replay,
        std::optional<std::uint64_t> replay_from)
        : config_(config), out_(config.output_dir), log_((fs::create_directories(out_), out_ / artifact::events))
    {
        auto [controller, target] = backends(hooks);
        GatewayOptions options;
        options.in_flight_limit = config.params.in_flight_limit;
        options.max_output_tokens = config.params.max_output_tokens;
        options.temperatures = config.temperatures;
        auto prompts = config.prompt_dir.empty() ? PromptLibrary::builtin() : PromptLibrary::with_overrides(config.prompt_dir);
        gateway_ = std::make_unique<Gateway>(std::move(controller), std::move(target), std::move(prompts), options);
        if (replay) {
            gateway_->set_replay(std::move(replay));
        }
        if (replay_from) {
            log_.begin_replay(*replay_from);
        }
    }

    void execute(Stage stage)
    {
        log_.append("run", "run_started", {{"command", std::string(to_string(stage))}, {"config", config_echo(config_)}});
        switch (stage) {
        case Stage::mine: mine(); break;
        case Stage::score: score(); break;
        case Stage::refine: refine(); break;
        case Stage::report: report(); break;
        case Stage::full:
            mine();
            score();
            refine();
            report();
            break;
        }
        write_run_record(stage);
        log_.append("run", "run_completed", {{"command", std::string(to_string(stage))}});
    }

private:
    std::pair<std::shared_ptr<ModelBackend>, std::shared_ptr<ModelBackend>> backends(const RunHooks& hooks)
    {
        std::shared_ptr<ModelBackend> mock;
        auto make = [&](const BackendConfig& b, const char* which) -> std::shared_ptr<ModelBackend> {
            if (b.kind == "http") {
                HttpEndpoint endpoint{b.base_url, b.path, b.model, b.api_key_env, b.timeout_seconds};
                RetryPolicy retry;
                retry.max_attempts = config_.params.retry_limit;
                retry.base_delay = std::chrono::milliseconds(config_.params.retry_base_delay_ms);
                return std::make_shared<HttpBackend>(endpoint, retry);
            }
            if (!mock) {
                if (config_.mock_scenario.empty()) {
                    throw InvalidConfig("mock_scenario", std::string("the ") + which +
                                                             " uses the mock backend but no scenario file is set");
                }
                mock = load_mock_scenario(config_.mock_scenario);
            }
            return mock;
        };
        auto controller = hooks.controller ? hooks.controller : make(config_.controller, "controller");
        auto target = hooks.target ? hooks.target : make(config_.target, "target");
        return {controller, target};
    }

    fs::path path(std::string_view name) const { return out_ / std::string(name); }

    std::string require(std::string_view name, const char* producing_stage) const
    {
        auto p = path(name);
        if (!fs::exists(p)) {
            throw MissingPriorArtifact(producing_stage, p.string());
        }
        return read_file(p);
    }

    Taxonomy taxonomy_or_empty() const
    {
        auto p = path(artifact::taxonomy);
        return fs::exists(p) ? Taxonomy::from_json(read_file(p)) : Taxonomy{};
    }

    void mine()
    {
        if (config_.manifest.empty()) {
            throw InvalidConfig("manifest", "the mine stage needs a manifest (--manifest or \"manifest\" in the config)");
        }
        auto memes = load_manifest(config_.manifest);
        MiningOptions options;
        options.miner_count = config_.params.miner_count;
        options.reask_limit = config_.params.reask_limit;
        auto result = run_mining_stage(*gateway_, memes, Taxonomy::initial(), options, log_);
        write_file_atomic(path(artifact::taxonomy), result.taxonomy.to_json());
        write_file_atomic(path(artifact::mined), serialize_mined(result.samples));
    }

    ScoringOptions scoring_options() const
    {
        ScoringOptions options;
        options.candidate_count = config_.params.candidate_count;
        options.reask_limit = config_.params.reask_limit;
        options.window = std::max<std::size_t>(1, config_.params.in_flight_limit * 2);
        options.target_model = config_.target_name;
        options.taxonomy = taxonomy_or_empty();
        return options;
    }

    void score()
    {
        auto mined = parse_mined(require(artifact::mined, "mine"));
        require(artifact::taxonomy, "mine");
        auto kept = sample_per_category(mined, config_.params.per_category_cap, config_.rng_seed);

        std::map<std::string, std::pair<std::size_t, std::size_t>> counts;
        for (const auto& s : mined) {
            ++counts[s.category].first;
        }
        for (const auto& s : kept) {
            ++counts[s.category].second;
        }
        json sampled = json::object();
        for (const auto& [category, c] : counts) {
            sampled[category] = {{"available", c.first}, {"kept", c.second}};
        }
        log_.append("score", "sampled", {{"cap", config_.params.per_category_cap}, {"categories", sampled}});

        auto scored = run_scoring_stage(*gateway_, std::move(kept), scoring_options(), log_);
        write_file_atomic(path(artifact::scored), serialize_scored(scored));
    }

    void refine()
    {
        auto scored = parse_scored(require(artifact::scored, "score"));
        RefinementOptions options;
        options.seed_set_size = config_.params.seed_set_size;
        options.max_iterations = config_.params.max_iterations;
        options.retrieval_k = config_.params.retrieval_k;
        options.reask_limit = config_.params.reask_limit;
        options.bm25 = {config_.params.bm25_k1, config_.params.bm25_b};
        options.rng_seed = config_.rng_seed;
        options.min_category_size_warning = config_.params.min_category_size_warning;
        auto result = run_refinement_stage(*gateway_, scored, options, scoring_options(), log_);
        write_file_atomic(path(artifact::history), serialize_scored(result.history));
    }

    void report()
    {
        auto history = parse_scored(require(artifact::history, "refine"));
        ReportOptions options;
        options.model = config_.target_name;
        options.threshold = config_.params.fr_threshold;
        options.avg_mode = config_.params.avg_mode;
        options.convergence_mode = config_.params.convergence_mode;
        options.histogram_top = config_.params.histogram_top;
        options.category_order = config_.category_order;
        if (options.category_order.empty()) {
            options.category_order = taxonomy_or_empty().names();
        }
        const auto echo = config_echo(config_);
        options.metadata = {{"model", config_.target_name},
                            {"controller_model", config_.controller.model},
                            {"rng_seed", config_.rng_seed},
                            {"samples", history.size()},
                            {"stage_params", echo.at("stage_params")},
                            {"temperatures", echo.at("temperatures")},
                            {"scorer_prompt_includes_category_explanation",
                             gateway_->prompts().references("scorer", "category_explanation")}};
        auto report = build_report(history, options);
        write_file_atomic(path(artifact::report), render_markdown(report));
        write_file_atomic(path(artifact::metrics), render_metrics_csv(report));
        write_file_atomic(path(artifact::convergence), render_convergence_csv(report));
        write_file_atomic(path(artifact::histogram), render_histogram_csv(report));
        log_.append("report", "stage_completed", {{"samples", history.size()}});
    }

    void write_run_record(Stage stage)
    {
        json artifacts = json::object();
        for (auto name : {artifact::taxonomy, artifact::mined, artifact::scored, artifact::history, artifact::report,
                          artifact::metrics, artifact::convergence, artifact::histogram}) {
            auto p = path(name);
            if (fs::exists(p)) {
                artifacts[std::string(name)] = sha256_hex(read_file(p));
            }
        }
        json record = {{"command", std::string(to_string(stage))},
                       {"config", config_echo(config_)},
                       {"artifacts", artifacts}};
        write_file_atomic(path(artifact::run), record.dump(2) + "\n");
    }

    RunConfig config_;
    fs::path out_;
    EventLog log_;
    std::unique_ptr<Gateway> gateway_;
};

} // namespace

void run_stage(Stage stage, const RunConfig& config, const RunHooks& hooks)
{
    if (config.output_dir.empty()) {
        throw InvalidConfig("output_dir", "no output directory given (--out or \"output_dir\" in the config)");
    }
    Run run(config, hooks, nullptr, std::nullopt);
    run.execute(stage);
}

ResumeOutcome resume(const fs::path& dir, bool repair, const RunHooks& hooks)
{
    const auto log_path = dir / std::string(artifact::events);
    if (!fs::exists(log_path)) {
        throw MissingFile(log_path.string());
    }
    if (repair) {
        repair_event_log(log_path);
    }
    const auto events = read_event_log(log_path);

    std::optional<std::size_t> started;
    for (std::size_t i = 0; i < events.size(); ++i) {
        if (events[i].kind == "run_started") {
            started = i;
        }
    }
    if (!started) {
        return ResumeOutcome::nothing_to_resume;
    }
    for (std::size_t i = *started + 1; i < events.size(); ++i) {
        if (events[i].kind == "run_completed") {
            return ResumeOutcome::already_complete;
        }
    }

    const auto& payload = events[*started].payload;
    auto stage = stage_from_string(payload.value("command", ""));
    if (!stage || !payload.contains("config")) {
        throw CorruptLog(events[*started].seq, "run_started event lacks a usable command or config");
    }
    auto config = parse_config(payload.at("config").dump(), fs::path("/"));
    config.output_dir = dir;

    std::vector<Event> tail(events.begin() + static_cast<std::ptrdiff_t>(*started), events.end());
    Run run(config, hooks, ReplayCache::from_events(tail), events[*started].seq);
    run.execute(*stage);
    return ResumeOutcome::resumed;
}

} // namespace memeprobe
