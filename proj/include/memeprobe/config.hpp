#pragma once

#include "memeprobe/gateway.hpp"
#include "memeprobe/metrics.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace memeprobe {

struct BackendConfig {
    std::string kind = "mock"; ///< "mock" or "http"
    std::string base_url;
    std::string path = "/v1/chat/completions";
    std::string model;
    std::string api_key_env; ///< name of the environment variable holding the key
    int timeout_seconds = 120;
};

struct StageParams {
    int miner_count = 3;
    int candidate_count = 3;
    std::size_t seed_set_size = 10;
    int max_iterations = 10;
    std::size_t retrieval_k = 3;
    double fr_threshold = 4.0;
    std::size_t per_category_cap = 200;
    double bm25_k1 = 1.2;
    double bm25_b = 0.75;
    int reask_limit = 2;
    int retry_limit = 5;
    int retry_base_delay_ms = 500;
    std::size_t in_flight_limit = 4;
    int max_output_tokens = 1024;
    AvgMode avg_mode = AvgMode::micro;
    ConvergenceMode convergence_mode = ConvergenceMode::cumulative;
    std::size_t min_category_size_warning = 150;
    std::size_t histogram_top = 10;
};

struct RunConfig {
    BackendConfig controller;
    BackendConfig target;
    std::string target_name = "target"; ///< model name used in reports
    std::filesystem::path manifest;
    std::filesystem::path output_dir;
    std::filesystem::path mock_scenario;
    std::filesystem::path prompt_dir;
    std::uint64_t rng_seed = 0;
    StageParams params;
    RoleTemperatures temperatures;
    std::vector<std::string> category_order;
};

/// Parses a JSON config document. Relative paths are resolved against
/// `base_dir`. Empty or whitespace-only input gives the defaults. Unknown
/// fields, wrong types, out-of-range values and inline credentials raise
/// InvalidConfig(field).
RunConfig parse_config(std::string_view content, const std::filesystem::path& base_dir);

/// Reads and parses a config file; paths inside are relative to its folder.
RunConfig load_config(const std::filesystem::path& path);

/// Applies one `key=value` stage-parameter override. The value is read as
/// JSON when possible and as a plain string otherwise.
void apply_stage_param(RunConfig& config, std::string_view assignment);

/// The effective configuration, every field spelled out.
nlohmann::json config_to_json(const RunConfig& config);

} // namespace memeprobe
