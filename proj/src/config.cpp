#include "memeprobe/config.hpp"

#include "memeprobe/domain.hpp"
#include "memeprobe/errors.hpp"
#include "memeprobe/text.hpp"

#include <cmath>
#include <functional>
#include <limits>
#include <map>

namespace memeprobe {

using nlohmann::json;

namespace {

namespace fs = std::filesystem;

[[noreturn]] void invalid(const std::string& field, const std::string& reason) { throw InvalidConfig(field, reason); }

long long as_integer(const json& v, const std::string& field, long long lo, long long hi)
{
    if (!v.is_number_integer()) {
        invalid(field, "expected an integer, got " + v.dump());
    }
    const auto x = v.get<long long>();
    if (x < lo || x > hi) {
        invalid(field, "must lie in [" + std::to_string(lo) + ", " + std::to_string(hi) + "], got " + v.dump());
    }
    return x;
}

double as_real(const json& v, const std::string& field, double lo, double hi)
{
    if (!v.is_number()) {
        invalid(field, "expected a number, got " + v.dump());
    }
    const auto x = v.get<double>();
    if (!std::isfinite(x) || x < lo || x > hi) {
        invalid(field, "out of range: " + v.dump());
    }
    return x;
}

std::string as_string(const json& v, const std::string& field)
{
    if (!v.is_string()) {
        invalid(field, "expected a string, got " + v.dump());
    }
    return v.get<std::string>();
}

fs::path as_path(const json& v, const std::string& field, const fs::path& base)
{
    auto s = as_string(v, field);
    if (s.empty()) {
        return {};
    }
    fs::path p(s);
    return (p.is_absolute() ? p : base / p).lexically_normal();
}

constexpr long long kMaxCount = 1'000'000'000;

using ParamSetter = std::function<void(StageParams&, const json&, const std::string&)>;

const std::map<std::string, ParamSetter>& param_setters()
{
    static const std::map<std::string, ParamSetter> setters = {
        {"miner_count", [](StageParams& p, const json& v, const std::string& f) { p.miner_count = static_cast<int>(as_integer(v, f, 1, 99)); }},
        {"candidate_count", [](StageParams& p, const json& v, const std::string& f) { p.candidate_count = static_cast<int>(as_integer(v, f, 1, 9)); }},
        {"seed_set_size", [](StageParams& p, const json& v, const std::string& f) { p.seed_set_size = static_cast<std::size_t>(as_integer(v, f, 1, kMaxCount)); }},
        {"max_iterations", [](StageParams& p, const json& v, const std::string& f) { p.max_iterations = static_cast<int>(as_integer(v, f, 1, 100000)); }},
        {"retrieval_k", [](StageParams& p, const json& v, const std::string& f) { p.retrieval_k = static_cast<std::size_t>(as_integer(v, f, 1, kMaxCount)); }},
        {"fr_threshold", [](StageParams& p, const json& v, const std::string& f) { p.fr_threshold = as_real(v, f, -1e9, 1e9); }},
        {"per_category_cap", [](StageParams& p, const json& v, const std::string& f) { p.per_category_cap = static_cast<std::size_t>(as_integer(v, f, 1, kMaxCount)); }},
        {"bm25_k1", [](StageParams& p, const json& v, const std::string& f) { p.bm25_k1 = as_real(v, f, 0.0, 1e6); }},
        {"bm25_b", [](StageParams& p, const json& v, const std::string& f) { p.bm25_b = as_real(v, f, 0.0, 1.0); }},
        {"reask_limit", [](StageParams& p, const json& v, const std::string& f) { p.reask_limit = static_cast<int>(as_integer(v, f, 0, 100)); }},
        {"retry_limit", [](StageParams& p, const json& v, const std::string& f) { p.retry_limit = static_cast<int>(as_integer(v, f, 1, 100)); }},
        {"retry_base_delay_ms", [](StageParams& p, const json& v, const std::string& f) { p.retry_base_delay_ms = static_cast<int>(as_integer(v, f, 0, 3'600'000)); }},
        {"in_flight_limit", [](StageParams& p, const json& v, const std::string& f) { p.in_flight_limit = static_cast<std::size_t>(as_integer(v, f, 1, 1024)); }},
        {"max_output_tokens", [](StageParams& p, const json& v, const std::string& f) { p.max_output_tokens = static_cast<int>(as_integer(v, f, 1, 1'000'000)); }},
        {"avg_mode", [](StageParams& p, const json& v, const std::string& f) {
             try {
                 p.avg_mode = avg_mode_from_string(as_string(v, f));
             } catch (const std::invalid_argument& e) {
                 invalid(f, e.what());
             }
         }},
        {"convergence_mode", [](StageParams& p, const json& v, const std::string& f) {
             try {
                 p.convergence_mode = convergence_mode_from_string(as_string(v, f));
             } catch (const std::invalid_argument& e) {
                 invalid(f, e.what());
             }
         }},
        {"min_category_size_warning", [](StageParams& p, const json& v, const std::string& f) { p.min_category_size_warning = static_cast<std::size_t>(as_integer(v, f, 0, kMaxCount)); }},
        {"histogram_top", [](StageParams& p, const json& v, const std::string& f) { p.histogram_top = static_cast<std::size_t>(as_integer(v, f, 0, kMaxCount)); }},
    };
    return setters;
}

void reject_credentials(const json& obj, const std::string& where)
{
    for (const auto& key : {"api_key", "apikey", "key", "token", "password", "secret", "authorization"}) {
        if (obj.contains(key)) {
            invalid(where.empty() ? key : where + "." + key,
                    "credentials are never read from config files; put the key in an environment variable and name "
                    "it in api_key_env");
        }
    }
}

BackendConfig parse_backend(const json& j, const std::string& where, std::string* name)
{
    if (!j.is_object()) {
        invalid(where, "expected an object");
    }
    reject_credentials(j, where);
    BackendConfig b;
    for (const auto& [key, v] : j.items()) {
        const auto field = where + "." + key;
        if (key == "backend") {
            b.kind = as_string(v, field);
            if (b.kind != "mock" && b.kind != "http") {
                invalid(field, "must be 'mock' or 'http'");
            }
        } else if (key == "base_url") {
            b.base_url = as_string(v, field);
        } else if (key == "path") {
            b.path = as_string(v, field);
        } else if (key == "model") {
            b.model = as_string(v, field);
        } else if (key == "api_key_env") {
            b.api_key_env = as_string(v, field);
        } else if (key == "timeout_seconds") {
            b.timeout_seconds = static_cast<int>(as_integer(v, field, 1, 86400));
        } else if (key == "name" && name != nullptr) {
            *name = as_string(v, field);
        } else {
            invalid(field, "unknown field");
        }
    }
    if (b.kind == "http" && b.base_url.empty()) {
        invalid(where + ".base_url", "required for the http backend");
    }
    return b;
}

json backend_to_json(const BackendConfig& b)
{
    return {{"backend", b.kind},
            {"base_url", b.base_url},
            {"path", b.path},
            {"model", b.model},
            {"api_key_env", b.api_key_env},
            {"timeout_seconds", b.timeout_seconds}};
}

json params_to_json(const StageParams& p)
{
    return {{"miner_count", p.miner_count},
            {"candidate_count", p.candidate_count},
            {"seed_set_size", p.seed_set_size},
            {"max_iterations", p.max_iterations},
            {"retrieval_k", p.retrieval_k},
            {"fr_threshold", p.fr_threshold},
            {"per_category_cap", p.per_category_cap},
            {"bm25_k1", p.bm25_k1},
            {"bm25_b", p.bm25_b},
            {"reask_limit", p.reask_limit},
            {"retry_limit", p.retry_limit},
            {"retry_base_delay_ms", p.retry_base_delay_ms},
            {"in_flight_limit", p.in_flight_limit},
            {"max_output_tokens", p.max_output_tokens},
            {"avg_mode", std::string(to_string(p.avg_mode))},
            {"convergence_mode", std::string(to_string(p.convergence_mode))},
            {"min_category_size_warning", p.min_category_size_warning},
            {"histogram_top", p.histogram_top}};
}

} // namespace

RunConfig parse_config(std::string_view content, const fs::path& base_dir)
{
    RunConfig config;
    if (text::trim(content).empty()) {
        return config;
    }
    json doc;
    try {
        doc = json::parse(content);
    } catch (const json::exception& e) {
        invalid("<document>", std::string("not valid JSON: ") + e.what());
    }
    if (!doc.is_object()) {
        invalid("<document>", "top level must be an object");
    }
    reject_credentials(doc, "");

    bool target_named = false;
    for (const auto& [key, v] : doc.items()) {
        if (key == "controller") {
            config.controller = parse_backend(v, key, nullptr);
        } else if (key == "target") {
            std::string name;
            config.target = parse_backend(v, key, &name);
            if (!name.empty()) {
                config.target_name = name;
                target_named = true;
            }
        } else if (key == "manifest") {
            config.manifest = as_path(v, key, base_dir);
        } else if (key == "output_dir") {
            config.output_dir = as_path(v, key, base_dir);
        } else if (key == "mock_scenario") {
            config.mock_scenario = as_path(v, key, base_dir);
        } else if (key == "prompt_dir") {
            config.prompt_dir = as_path(v, key, base_dir);
        } else if (key == "rng_seed") {
            if (!v.is_number_integer()) {
                invalid(key, "expected a non-negative integer, got " + v.dump());
            }
            if (v.is_number_unsigned()) {
                config.rng_seed = v.get<std::uint64_t>();
            } else {
                invalid(key, "must be non-negative");
            }
        } else if (key == "stage_params") {
            if (!v.is_object()) {
                invalid(key, "expected an object");
            }
            for (const auto& [pkey, pv] : v.items()) {
                auto it = param_setters().find(pkey);
                if (it == param_setters().end()) {
                    invalid(pkey, "unknown stage parameter");
                }
                it->second(config.params, pv, pkey);
            }
        } else if (key == "temperatures") {
            if (!v.is_object()) {
                invalid(key, "expected an object keyed by role name");
            }
            for (const auto& [role, t] : v.items()) {
                auto r = role_from_name(role);
                if (!r) {
                    invalid("temperatures." + role, "unknown role");
                }
                config.temperatures.set(*r, as_real(t, "temperatures." + role, 0.0, 2.0));
            }
        } else if (key == "category_order") {
            if (!v.is_array()) {
                invalid(key, "expected an array of category names");
            }
            config.category_order.clear();
            for (const auto& c : v) {
                config.category_order.push_back(as_string(c, key));
            }
        } else {
            invalid(key, "unknown field");
        }
    }
    if (!target_named && !config.target.model.empty()) {
        config.target_name = config.target.model;
    }
    return config;
}

RunConfig load_config(const fs::path& path)
{
    auto base = fs::absolute(path).parent_path();
    return parse_config(read_file(path), base);
}

void apply_stage_param(RunConfig& config, std::string_view assignment)
{
    auto eq = assignment.find('=');
    if (eq == std::string_view::npos || eq == 0) {
        invalid(std::string(assignment), "stage parameters are given as key=value");
    }
    const std::string key = text::trim(assignment.substr(0, eq));
    const std::string raw = text::trim(assignment.substr(eq + 1));
    auto it = param_setters().find(key);
    if (it == param_setters().end()) {
        invalid(key, "unknown stage parameter");
    }
    json value;
    try {
        value = json::parse(raw);
    } catch (const json::exception&) {
        value = raw;
    }
    it->second(config.params, value, key);
}

json config_to_json(const RunConfig& c)
{
    json temps = json::object();
    for (auto r : all_roles) {
        temps[std::string(role_name(r))] = c.temperatures.of(r);
    }
    json target = backend_to_json(c.target);
    target["name"] = c.target_name;
    return {{"controller", backend_to_json(c.controller)},
            {"target", target},
            {"manifest", c.manifest.string()},
            {"output_dir", c.output_dir.string()},
            {"mock_scenario", c.mock_scenario.string()},
            {"prompt_dir", c.prompt_dir.string()},
            {"rng_seed", c.rng_seed},
            {"stage_params", params_to_json(c.params)},
            {"temperatures", temps},
            {"category_order", c.category_order}};
}

} // namespace memeprobe
