// Regenerates the 40-meme mock fixture (manifest, scenario, config) by running
// the full pipeline against the rule backend and recording every exchange.

#include "fixture_rules.hpp"

#include "memeprobe/config.hpp"
#include "memeprobe/domain.hpp"
#include "memeprobe/mock_backend.hpp"
#include "memeprobe/runner.hpp"

#include <fmt/format.h>

#include <filesystem>

namespace fs = std::filesystem;
using namespace memeprobe;

int main(int argc, char** argv)
{
    if (argc != 2) {
        fmt::print(stderr, "usage: make_mock_fixture <fixture-dir>\n");
        return 2;
    }
    const fs::path dir = argv[1];
    fs::create_directories(dir);
    write_file_atomic(dir / "manifest.jsonl", serialize_manifest(fixture::manifest()));
    write_file_atomic(dir / "config.json", fixture::config_json());

    auto config = parse_config(fixture::config_json(), dir);
    const auto scratch = fs::temp_directory_path() / "memeprobe_fixture_recording";
    fs::remove_all(scratch);
    config.output_dir = scratch;

    auto recorder = std::make_shared<ScenarioRecorder>(std::make_shared<fixture::RuleBackend>());
    run_stage(Stage::full, config, RunHooks{recorder, recorder});

    const auto scenario = recorder->scenario();
    write_file_atomic(dir / "scenario.json", scenario.to_json());
    fmt::print("wrote {} scenario entries to {}\n", scenario.entries.size(), dir.string());
    fs::remove_all(scratch);
    return 0;
}
