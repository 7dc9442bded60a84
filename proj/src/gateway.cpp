#include "memeprobe/gateway.hpp"

#include "memeprobe/digest.hpp"
#include "memeprobe/errors.hpp"
#include "memeprobe/text.hpp"

#include <stdexcept>

namespace memeprobe {

using nlohmann::json;

std::string_view role_name(Role role)
{
    switch (role) {
    case Role::Miner: return "Miner";
    case Role::Examiner: return "Examiner";
    case Role::Judge: return "Judge";
    case Role::Narrator: return "Narrator";
    case Role::CandidateAnswerer: return "CandidateAnswerer";
    case Role::SeniorSummarizer: return "SeniorSummarizer";
    case Role::Scorer: return "Scorer";
    case Role::Refiner: return "Refiner";
    case Role::Target: return "Target";
    }
    return "?";
}

std::optional<Role> role_from_name(std::string_view name)
{
    for (auto r : all_roles) {
        if (role_name(r) == name) {
            return r;
        }
    }
    return std::nullopt;
}

std::string_view role_template(Role role)
{
    switch (role) {
    case Role::Miner: return "miner";
    case Role::Examiner: return "examiner";
    case Role::Judge: return "judge";
    case Role::Narrator: return "narrator";
    case Role::CandidateAnswerer: return "candidate";
    case Role::SeniorSummarizer: return "summarizer";
    case Role::Scorer: return "scorer";
    case Role::Refiner: return "refiner";
    case Role::Target: return "target";
    }
    return "?";
}

double default_temperature(Role role)
{
    return (role == Role::Miner || role == Role::CandidateAnswerer) ? 1.0 : 0.0;
}

RoleTemperatures::RoleTemperatures()
{
    for (auto r : all_roles) {
        values_[static_cast<std::size_t>(r)] = default_temperature(r);
    }
}

void RoleTemperatures::set(Role role, double t)
{
    if (!(t >= 0.0 && t <= 2.0)) {
        throw std::invalid_argument("temperature must lie in [0, 2]");
    }
    values_[static_cast<std::size_t>(role)] = t;
}

std::string_view to_string(BackendKind kind) { return kind == BackendKind::live ? "live" : "mock"; }
std::string_view to_string(Channel channel) { return channel == Channel::target ? "target" : "controller"; }

std::string ModelRequest::joined_text() const
{
    std::string out;
    for (std::size_t i = 0; i < text_parts.size(); ++i) {
        if (i != 0) {
            out += "\n\n";
        }
        out += text_parts[i];
    }
    return out;
}

std::string ModelRequest::digest() const
{
    std::string material;
    material += role_name(role);
    material += '\x1f';
    material += slot;
    material += '\x1f';
    material += text::collapse_whitespace(joined_text());
    material += '\x1f';
    material += image.value_or("");
    return sha256_hex(material).substr(0, 32);
}

// ---- replay ----------------------------------------------------------------

std::shared_ptr<ReplayCache> ReplayCache::from_events(const std::vector<Event>& events)
{
    auto cache = std::make_shared<ReplayCache>();
    for (const auto& e : events) {
        if (e.kind != "model_call") {
            continue;
        }
        ModelResponse r;
        r.text = e.payload.at("response").get<std::string>();
        r.backend = e.payload.value("backend", "mock") == "live" ? BackendKind::live : BackendKind::mock;
        r.attempt = e.payload.value("attempt", 1);
        r.replayed = true;
        cache->responses_[e.payload.at("digest").get<std::string>()].push_back(std::move(r));
    }
    return cache;
}

std::optional<ModelResponse> ReplayCache::take(const std::string& digest)
{
    std::lock_guard lock(mutex_);
    auto it = responses_.find(digest);
    if (it == responses_.end() || it->second.empty()) {
        return std::nullopt;
    }
    auto r = std::move(it->second.front());
    it->second.pop_front();
    return r;
}

std::size_t ReplayCache::size() const
{
    std::lock_guard lock(mutex_);
    std::size_t n = 0;
    for (const auto& [_, q] : responses_) {
        n += q.size();
    }
    return n;
}

// ---- gateway ---------------------------------------------------------------

class Gateway::Slot {
public:
    explicit Slot(Gateway& g) : g_(g)
    {
        std::unique_lock lock(g_.mutex_);
        g_.cv_.wait(lock, [&] { return g_.in_flight_ < g_.options_.in_flight_limit; });
        ++g_.in_flight_;
        ++g_.calls_;
        g_.peak_ = std::max(g_.peak_, g_.in_flight_);
    }
    ~Slot()
    {
        {
            std::lock_guard lock(g_.mutex_);
            --g_.in_flight_;
        }
        g_.cv_.notify_one();
    }
    Slot(const Slot&) = delete;
    Slot& operator=(const Slot&) = delete;

private:
    Gateway& g_;
};

Gateway::Gateway(std::shared_ptr<ModelBackend> controller, std::shared_ptr<ModelBackend> target,
                 PromptLibrary prompts, GatewayOptions options)
    : controller_(std::move(controller)), target_(std::move(target)), prompts_(std::move(prompts)),
      options_(std::move(options))
{
    if (!controller_ || !target_) {
        throw std::invalid_argument("gateway needs both a controller and a target backend");
    }
    if (options_.in_flight_limit == 0) {
        throw std::invalid_argument("in-flight limit must be at least 1");
    }
}

void Gateway::set_replay(std::shared_ptr<ReplayCache> cache) { replay_ = std::move(cache); }

std::size_t Gateway::backend_calls() const
{
    std::lock_guard lock(mutex_);
    return calls_;
}

std::size_t Gateway::peak_in_flight() const
{
    std::lock_guard lock(mutex_);
    return peak_;
}

ModelResponse Gateway::invoke(ModelRequest request, EventBuffer& events, std::string_view stage)
{
    if (request.text_parts.empty()) {
        throw std::invalid_argument("model request needs at least one text part");
    }
    const Channel channel = request.role == Role::Target ? Channel::target : Channel::controller;
    ModelBackend& backend = channel == Channel::target ? *target_ : *controller_;
    request.temperature = options_.temperatures.of(request.role);
    request.max_output = options_.max_output_tokens;
    const auto digest = request.digest();

    json record = {{"role", std::string(role_name(request.role))},
                   {"channel", std::string(to_string(channel))},
                   {"slot", request.slot},
                   {"digest", digest},
                   {"temperature", request.temperature},
                   {"image", request.image ? json(*request.image) : json(nullptr)},
                   {"prompt", request.text_parts}};

    std::optional<ModelResponse> response;
    if (replay_) {
        response = replay_->take(digest);
        if (response) {
            backend.skip_replayed(request);
        }
    }
    if (!response) {
        try {
            Slot slot(*this);
            response = backend.complete(request);
        } catch (const Error& e) {
            record["error_kind"] = e.kind();
            record["error"] = e.what();
            events.add(std::string(stage), "model_error", std::move(record));
            throw;
        }
    }
    record["backend"] = std::string(to_string(response->backend));
    record["response"] = response->text;
    record["attempt"] = response->attempt;
    record["latency_ms"] = response->latency.count();
    record["replayed"] = response->replayed;
    events.add(std::string(stage), "model_call", std::move(record));
    return *response;
}

ModelResponse Gateway::ask(Role role, std::string slot, const TemplateVars& vars, std::optional<std::string> image,
                           const std::vector<std::string>& extra_parts, EventBuffer& events, std::string_view stage)
{
    ModelRequest request;
    request.role = role;
    request.slot = std::move(slot);
    request.text_parts.push_back(prompts_.render(role_template(role), vars));
    request.text_parts.insert(request.text_parts.end(), extra_parts.begin(), extra_parts.end());
    request.image = std::move(image);
    return invoke(std::move(request), events, stage);
}

} // namespace memeprobe
