#pragma once

#include "memeprobe/gateway.hpp"

#include <filesystem>
#include <map>
#include <mutex>
#include <string>
#include <utility>
#include <vector>

namespace memeprobe {

struct ScenarioEntry {
    std::string role;
    std::string input_digest;
    std::vector<std::string> responses;
    std::string note; ///< free text for scenario authors, ignored on lookup
};

struct MockScenario {
    std::vector<ScenarioEntry> entries;

    std::string to_json() const;
    static MockScenario from_json(std::string_view content);
};

/// Scripted backend. Requests are matched by (role name, request digest);
/// each entry's responses are handed out in order and the last one repeats
/// once the list is used up. Unmatched requests raise UnscriptedRequest.
class MockBackend : public ModelBackend {
public:
    explicit MockBackend(MockScenario scenario);

    ModelResponse complete(const ModelRequest& request) override;
    BackendKind kind() const override { return BackendKind::mock; }
    void skip_replayed(const ModelRequest& request) override;

    std::size_t served() const;

private:
    using Key = std::pair<std::string, std::string>;
    struct Script {
        std::vector<std::string> responses;
        std::size_t cursor = 0;
    };

    mutable std::mutex mutex_;
    std::map<Key, Script> scripts_;
    std::size_t served_ = 0;
};

std::shared_ptr<MockBackend> load_mock_scenario(const std::filesystem::path& path);

/// Wraps another backend and writes down every exchange as a scenario entry,
/// which is how mock scenarios for fixtures are authored.
class ScenarioRecorder : public ModelBackend {
public:
    explicit ScenarioRecorder(std::shared_ptr<ModelBackend> inner);

    ModelResponse complete(const ModelRequest& request) override;
    BackendKind kind() const override { return BackendKind::mock; }

    MockScenario scenario() const;

private:
    std::shared_ptr<ModelBackend> inner_;
    mutable std::mutex mutex_;
    std::vector<ScenarioEntry> entries_;
    std::map<std::pair<std::string, std::string>, std::size_t> index_;
};

} // namespace memeprobe
