#pragma once

#include "memeprobe/gateway.hpp"

#include <chrono>
#include <functional>
#include <string>
#include <string_view>

namespace memeprobe {

/// A chat-completion style endpoint. The API key is never stored here: only
/// the name of the environment variable that holds it.
struct HttpEndpoint {
    std::string base_url;                          ///< e.g. "https://api.openai.com"
    std::string path = "/v1/chat/completions";
    std::string model;
    std::string api_key_env;                       ///< empty: send no Authorization header
    int timeout_seconds = 120;
};

struct RetryPolicy {
    int max_attempts = 5;
    std::chrono::milliseconds base_delay{500};
    std::chrono::milliseconds max_delay{30000};

    /// Delay before attempt `next_attempt` (2-based): base * 2^(n-2), capped.
    std::chrono::milliseconds backoff(int next_attempt) const;
};

/// Live backend over HTTP. Connection failures, 408, 429 and 5xx responses
/// are retried with exponential backoff (a Retry-After header, when present
/// and longer, wins); other 4xx responses fail immediately.
class HttpBackend : public ModelBackend {
public:
    using Sleeper = std::function<void(std::chrono::milliseconds)>;

    HttpBackend(HttpEndpoint endpoint, RetryPolicy retry, Sleeper sleeper = {});

    ModelResponse complete(const ModelRequest& request) override;
    BackendKind kind() const override { return BackendKind::live; }

    static std::string build_request_body(const ModelRequest& request, const std::string& model);
    static std::string parse_completion(std::string_view body);
    /// Local paths become base64 data URLs; http(s) and data URLs pass through.
    static std::string image_url(const std::string& reference);

private:
    HttpEndpoint endpoint_;
    RetryPolicy retry_;
    Sleeper sleeper_;
};

} // namespace memeprobe
