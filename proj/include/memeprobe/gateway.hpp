#pragma once

#include "memeprobe/events.hpp"
#include "memeprobe/prompts.hpp"

#include <array>
#include <chrono>
#include <condition_variable>
#include <cstddef>
#include <deque>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace memeprobe {

enum class Role {
    Miner,
    Examiner,
    Judge,
    Narrator,
    CandidateAnswerer,
    SeniorSummarizer,
    Scorer,
    Refiner,
    Target,
};

inline constexpr std::array<Role, 9> all_roles = {
    Role::Miner,  Role::Examiner, Role::Judge,   Role::Narrator, Role::CandidateAnswerer,
    Role::SeniorSummarizer, Role::Scorer, Role::Refiner, Role::Target,
};

std::string_view role_name(Role role);
std::optional<Role> role_from_name(std::string_view name);
/// File stem of the role's prompt template (e.g. "candidate").
std::string_view role_template(Role role);
/// Miner and CandidateAnswerer sample at 1; every other role runs at 0.
double default_temperature(Role role);

class RoleTemperatures {
public:
    RoleTemperatures();
    double of(Role role) const { return values_[static_cast<std::size_t>(role)]; }
    void set(Role role, double t);

    bool operator==(const RoleTemperatures&) const = default;

private:
    std::array<double, all_roles.size()> values_{};
};

enum class BackendKind { live, mock };
enum class Channel { controller, target };

std::string_view to_string(BackendKind kind);
std::string_view to_string(Channel channel);

struct ModelRequest {
    Role role = Role::Miner;
    /// Call-site tag (`<unit>/<call>`), part of the digest so that identical
    /// prompts issued from different places stay distinguishable.
    std::string slot;
    std::vector<std::string> text_parts;
    std::optional<std::string> image;
    int max_output = 1024;
    double temperature = 0.0;

    std::string joined_text() const;
    /// Digest over role, slot, whitespace-normalized text and the image
    /// reference string (never image bytes).
    std::string digest() const;
};

struct ModelResponse {
    std::string text;
    BackendKind backend = BackendKind::mock;
    std::chrono::milliseconds latency{0};
    int attempt = 1;
    bool replayed = false;
};

class ModelBackend {
public:
    virtual ~ModelBackend() = default;
    virtual ModelResponse complete(const ModelRequest& request) = 0;
    virtual BackendKind kind() const = 0;
    /// Told about every request answered from the replay cache, so stateful
    /// backends (the scripted mock) can keep their cursors aligned.
    virtual void skip_replayed(const ModelRequest&) {}
};

/// Responses recovered from an event log, served in logged order per digest.
class ReplayCache {
public:
    static std::shared_ptr<ReplayCache> from_events(const std::vector<Event>& events);

    std::optional<ModelResponse> take(const std::string& digest);
    std::size_t size() const;

private:
    mutable std::mutex mutex_;
    std::map<std::string, std::deque<ModelResponse>> responses_;
};

struct GatewayOptions {
    std::size_t in_flight_limit = 4;
    int max_output_tokens = 1024;
    RoleTemperatures temperatures;
};

/// Routes agent requests to the controller backend and Target requests to
/// the target backend, renders prompt templates, bounds concurrent calls,
/// and records every call in the caller's event buffer.
class Gateway {
public:
    Gateway(std::shared_ptr<ModelBackend> controller, std::shared_ptr<ModelBackend> target, PromptLibrary prompts,
            GatewayOptions options = {});

    ModelResponse invoke(ModelRequest request, EventBuffer& events, std::string_view stage);

    /// Renders the role's template with `vars` (TemplateError on a missing
    /// value), appends `extra_parts` and invokes.
    ModelResponse ask(Role role, std::string slot, const TemplateVars& vars, std::optional<std::string> image,
                      const std::vector<std::string>& extra_parts, EventBuffer& events, std::string_view stage);

    void set_replay(std::shared_ptr<ReplayCache> cache);

    const PromptLibrary& prompts() const noexcept { return prompts_; }
    const GatewayOptions& options() const noexcept { return options_; }

    /// Requests that reached a backend (replayed ones excluded).
    std::size_t backend_calls() const;
    std::size_t peak_in_flight() const;

private:
    class Slot;

    std::shared_ptr<ModelBackend> controller_;
    std::shared_ptr<ModelBackend> target_;
    PromptLibrary prompts_;
    GatewayOptions options_;
    std::shared_ptr<ReplayCache> replay_;

    mutable std::mutex mutex_;
    std::condition_variable cv_;
    std::size_t in_flight_ = 0;
    std::size_t peak_ = 0;
    std::size_t calls_ = 0;
};

/// Asks `role` and hands the answer to `parse`, which returns an empty
/// optional when the answer is unusable. Unusable answers are asked again
/// with `reminder` appended, at most `reasks` times; the last parse result is
/// returned either way. Re-asks use the slot `<slot>/reask-<n>`.
template <class Parse>
auto ask_parsed(Gateway& gateway, Role role, const std::string& slot, const TemplateVars& vars,
                const std::optional<std::string>& image, int reasks, const std::string& reminder,
                EventBuffer& events, std::string_view stage, Parse&& parse)
    -> decltype(parse(std::string_view{}))
{
    for (int attempt = 0;; ++attempt) {
        std::vector<std::string> extra;
        std::string call_slot = slot;
        if (attempt > 0) {
            extra.push_back(reminder);
            call_slot += "/reask-" + std::to_string(attempt);
        }
        auto response = gateway.ask(role, call_slot, vars, image, extra, events, stage);
        auto parsed = parse(std::string_view(response.text));
        if (parsed || attempt >= reasks) {
            return parsed;
        }
        events.add(std::string(stage), "reask",
                   {{"role", std::string(role_name(role))}, {"slot", slot}, {"attempt", attempt + 1}});
    }
}

} // namespace memeprobe
