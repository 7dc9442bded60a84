#include "memeprobe/mock_backend.hpp"

#include "memeprobe/domain.hpp"
#include "memeprobe/errors.hpp"

#include <json.hpp>

#include <algorithm>
#include <tuple>

namespace memeprobe {

using nlohmann::json;

std::string MockScenario::to_json() const
{
    json list = json::array();
    for (const auto& e : entries) {
        json j = {{"role", e.role}, {"input_digest", e.input_digest}, {"responses", e.responses}};
        if (!e.note.empty()) {
            j["note"] = e.note;
        }
        list.push_back(std::move(j));
    }
    return json{{"entries", list}}.dump(2) + "\n";
}

MockScenario MockScenario::from_json(std::string_view content)
{
    MockScenario s;
    json doc;
    try {
        doc = json::parse(content);
    } catch (const json::exception& e) {
        throw MalformedScenario(e.what());
    }
    if (!doc.is_object() || !doc.contains("entries") || !doc["entries"].is_array()) {
        throw MalformedScenario("top level must be an object with an 'entries' array");
    }
    std::size_t i = 0;
    for (const auto& j : doc["entries"]) {
        auto where = "entry " + std::to_string(i++);
        if (!j.is_object() || !j.contains("role") || !j["role"].is_string() || !j.contains("input_digest") ||
            !j["input_digest"].is_string() || !j.contains("responses") || !j["responses"].is_array()) {
            throw MalformedScenario(where + " needs string 'role', string 'input_digest' and array 'responses'");
        }
        ScenarioEntry e;
        e.role = j["role"].get<std::string>();
        if (!role_from_name(e.role)) {
            throw MalformedScenario(where + " names unknown role " + e.role);
        }
        e.input_digest = j["input_digest"].get<std::string>();
        for (const auto& r : j["responses"]) {
            if (!r.is_string()) {
                throw MalformedScenario(where + " has a non-string response");
            }
            e.responses.push_back(r.get<std::string>());
        }
        if (e.responses.empty()) {
            throw MalformedScenario(where + " has no responses");
        }
        e.note = j.value("note", std::string());
        s.entries.push_back(std::move(e));
    }
    return s;
}

MockBackend::MockBackend(MockScenario scenario)
{
    for (auto& e : scenario.entries) {
        Key key{e.role, e.input_digest};
        if (scripts_.count(key) != 0) {
            throw MalformedScenario("duplicate entry for role " + e.role + " digest " + e.input_digest);
        }
        scripts_[key].responses = std::move(e.responses);
    }
}

ModelResponse MockBackend::complete(const ModelRequest& request)
{
    std::lock_guard lock(mutex_);
    auto digest = request.digest();
    auto it = scripts_.find({std::string(role_name(request.role)), digest});
    if (it == scripts_.end()) {
        throw UnscriptedRequest(std::string(role_name(request.role)), digest,
                                "slot: " + request.slot + "\n" + request.joined_text());
    }
    auto& script = it->second;
    auto idx = std::min(script.cursor, script.responses.size() - 1);
    ++script.cursor;
    ++served_;
    ModelResponse r;
    r.text = script.responses[idx];
    r.backend = BackendKind::mock;
    r.attempt = 1;
    return r;
}

void MockBackend::skip_replayed(const ModelRequest& request)
{
    std::lock_guard lock(mutex_);
    auto it = scripts_.find({std::string(role_name(request.role)), request.digest()});
    if (it != scripts_.end()) {
        ++it->second.cursor;
    }
}

std::size_t MockBackend::served() const
{
    std::lock_guard lock(mutex_);
    return served_;
}

std::shared_ptr<MockBackend> load_mock_scenario(const std::filesystem::path& path)
{
    return std::make_shared<MockBackend>(MockScenario::from_json(read_file(path)));
}

ScenarioRecorder::ScenarioRecorder(std::shared_ptr<ModelBackend> inner) : inner_(std::move(inner)) {}

ModelResponse ScenarioRecorder::complete(const ModelRequest& request)
{
    auto response = inner_->complete(request);
    std::lock_guard lock(mutex_);
    std::pair key{std::string(role_name(request.role)), request.digest()};
    auto [it, fresh] = index_.emplace(key, entries_.size());
    if (fresh) {
        entries_.push_back({key.first, key.second, {}, request.slot});
    }
    entries_[it->second].responses.push_back(response.text);
    response.backend = BackendKind::mock;
    return response;
}

MockScenario ScenarioRecorder::scenario() const
{
    std::lock_guard lock(mutex_);
    auto entries = entries_;
    std::stable_sort(entries.begin(), entries.end(), [](const ScenarioEntry& a, const ScenarioEntry& b) {
        return std::tie(a.note, a.role, a.input_digest) < std::tie(b.note, b.role, b.input_digest);
    });
    return MockScenario{std::move(entries)};
}

} // namespace memeprobe
