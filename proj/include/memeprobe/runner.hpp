#pragma once

#include "memeprobe/config.hpp"
#include "memeprobe/gateway.hpp"

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>

namespace memeprobe {

enum class Stage { mine, score, refine, report, full };

std::string_view to_string(Stage stage);
std::optional<Stage> stage_from_string(std::string_view name);

/// File names inside a run's output directory.
namespace artifact {
inline constexpr std::string_view taxonomy = "taxonomy.json";
inline constexpr std::string_view mined = "mined.jsonl";
inline constexpr std::string_view scored = "scored.jsonl";
inline constexpr std::string_view history = "history.jsonl";
inline constexpr std::string_view report = "report.md";
inline constexpr std::string_view metrics = "metrics.csv";
inline constexpr std::string_view convergence = "convergence.csv";
inline constexpr std::string_view histogram = "histogram.csv";
inline constexpr std::string_view events = "events.log";
inline constexpr std::string_view run = "run.json";
} // namespace artifact

/// Optional overrides for a run; tests use them to inject backends.
struct RunHooks {
    std::shared_ptr<ModelBackend> controller;
    std::shared_ptr<ModelBackend> target;
};

/// Runs one stage (or all four for `full`) into `config.output_dir`. Each
/// stage reads its input from the previous stage's artifact and throws
/// MissingPriorArtifact(previous stage) when it is absent. Every run is
/// framed by `run_started` / `run_completed` events.
void run_stage(Stage stage, const RunConfig& config, const RunHooks& hooks = {});

enum class ResumeOutcome { already_complete, resumed, nothing_to_resume };

/// Finishes the last unfinished run recorded in `<dir>/events.log`. Logged
/// model responses are served from the log instead of the backends, and
/// the logged events are verified rather than written again. With
/// `repair`, a torn final log line is dropped first; without it such a line
/// raises CorruptLog.
ResumeOutcome resume(const std::filesystem::path& dir, bool repair = false, const RunHooks& hooks = {});

} // namespace memeprobe
