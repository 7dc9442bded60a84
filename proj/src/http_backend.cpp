#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include "memeprobe/http_backend.hpp"

#include "memeprobe/digest.hpp"
#include "memeprobe/domain.hpp"
#include "memeprobe/errors.hpp"

#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <filesystem>
#include <thread>

namespace memeprobe {

using nlohmann::json;

std::chrono::milliseconds RetryPolicy::backoff(int next_attempt) const
{
    auto delay = base_delay;
    for (int i = 2; i < next_attempt && delay < max_delay; ++i) {
        delay *= 2;
    }
    return std::min(delay, max_delay);
}

HttpBackend::HttpBackend(HttpEndpoint endpoint, RetryPolicy retry, Sleeper sleeper)
    : endpoint_(std::move(endpoint)), retry_(retry), sleeper_(std::move(sleeper))
{
    if (!sleeper_) {
        sleeper_ = [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
    }
    if (retry_.max_attempts < 1) {
        throw std::invalid_argument("retry policy needs at least one attempt");
    }
}

std::string HttpBackend::image_url(const std::string& reference)
{
    if (reference.rfind("http://", 0) == 0 || reference.rfind("https://", 0) == 0 ||
        reference.rfind("data:", 0) == 0) {
        return reference;
    }
    auto ext = std::filesystem::path(reference).extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    std::string mime = "image/png";
    if (ext == ".jpg" || ext == ".jpeg") {
        mime = "image/jpeg";
    } else if (ext == ".gif") {
        mime = "image/gif";
    } else if (ext == ".webp") {
        mime = "image/webp";
    }
    return "data:" + mime + ";base64," + base64_encode(read_file(reference));
}

std::string HttpBackend::build_request_body(const ModelRequest& request, const std::string& model)
{
    json content = json::array();
    content.push_back({{"type", "text"}, {"text", request.joined_text()}});
    if (request.image) {
        content.push_back({{"type", "image_url"}, {"image_url", {{"url", image_url(*request.image)}}}});
    }
    json body = {{"model", model},
                 {"messages", json::array({{{"role", "user"}, {"content", content}}})},
                 {"temperature", request.temperature},
                 {"max_tokens", request.max_output}};
    return body.dump();
}

std::string HttpBackend::parse_completion(std::string_view body)
{
    json doc;
    try {
        doc = json::parse(body);
    } catch (const json::exception& e) {
        throw BackendProtocolError(std::string("body is not JSON: ") + e.what());
    }
    try {
        const auto& content = doc.at("choices").at(0).at("message").at("content");
        if (content.is_string()) {
            return content.get<std::string>();
        }
        std::string text;
        for (const auto& part : content) {
            if (part.value("type", "") == "text") {
                text += part.value("text", "");
            }
        }
        return text;
    } catch (const json::exception& e) {
        throw BackendProtocolError(std::string("no choices[0].message.content: ") + e.what());
    }
}

ModelResponse HttpBackend::complete(const ModelRequest& request)
{
    const auto body = build_request_body(request, endpoint_.model);
    httplib::Headers headers;
    if (!endpoint_.api_key_env.empty()) {
        if (const char* key = std::getenv(endpoint_.api_key_env.c_str()); key != nullptr && *key != '\0') {
            headers.emplace("Authorization", std::string("Bearer ") + key);
        }
    }

    httplib::Client client(endpoint_.base_url);
    client.set_connection_timeout(std::chrono::seconds(10));
    client.set_read_timeout(std::chrono::seconds(endpoint_.timeout_seconds));
    client.set_write_timeout(std::chrono::seconds(endpoint_.timeout_seconds));

    const auto started = std::chrono::steady_clock::now();
    std::string last_failure;
    bool last_was_rate_limit = false;
    for (int attempt = 1; attempt <= retry_.max_attempts; ++attempt) {
        if (attempt > 1) {
            sleeper_(retry_.backoff(attempt));
        }
        auto res = client.Post(endpoint_.path, headers, body, "application/json");
        if (!res) {
            last_failure = httplib::to_string(res.error());
            last_was_rate_limit = false;
            continue;
        }
        const int status = res->status;
        if (status >= 200 && status < 300) {
            ModelResponse r;
            r.text = parse_completion(res->body);
            r.backend = BackendKind::live;
            r.attempt = attempt;
            r.latency = std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() -
                                                                              started);
            return r;
        }
        if (status == 429 || status == 408 || status >= 500) {
            last_was_rate_limit = status == 429;
            last_failure = "HTTP " + std::to_string(status);
            if (attempt < retry_.max_attempts && res->has_header("Retry-After")) {
                try {
                    auto wait = std::chrono::milliseconds(std::stoll(res->get_header_value("Retry-After")) * 1000);
                    auto planned = retry_.backoff(attempt + 1);
                    if (wait > planned) {
                        sleeper_(std::min(wait - planned, retry_.max_delay));
                    }
                } catch (const std::exception&) {
                    // HTTP-date form; fall back to plain backoff
                }
            }
            continue;
        }
        throw BackendRejected(status, res->body.substr(0, 500));
    }
    if (last_was_rate_limit) {
        throw RateLimited(retry_.max_attempts);
    }
    throw BackendUnreachable(last_failure + " after " + std::to_string(retry_.max_attempts) + " attempts");
}

} // namespace memeprobe
