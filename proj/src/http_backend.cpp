#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include <cstdlib>
#include <fstream>
#include <random>
#include <thread>

#include <json.hpp>

#include "aamcbr/backends.hpp"
#include "aamcbr/util.hpp"

namespace aamcbr {

namespace {

struct SplitUrl {
    std::string origin;
    std::string path;
};

SplitUrl split_url(const std::string& url)
{
    const auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos)
        throw TransportError("endpoint must include a scheme: " + url);
    const auto path_start = url.find('/', scheme_end + 3);
    if (path_start == std::string::npos)
        return {url, "/"};
    return {url.substr(0, path_start), url.substr(path_start)};
}

class HttplibTransport : public HttpTransport {
public:
    HttpResponse post(const std::string& url, const HttpHeaders& headers, const std::string& body,
                      std::chrono::milliseconds timeout) override
    {
        const auto parts = split_url(url);
        httplib::Client client(parts.origin);
        const auto secs = std::chrono::duration_cast<std::chrono::seconds>(timeout);
        const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(timeout - secs);
        client.set_connection_timeout(secs.count(), usecs.count());
        client.set_read_timeout(secs.count(), usecs.count());
        client.set_write_timeout(secs.count(), usecs.count());

        httplib::Headers h;
        for (const auto& [k, v] : headers)
            h.emplace(k, v);
        auto res = client.Post(parts.path, h, body, "application/json");
        if (!res)
            return {0, {}, httplib::to_string(res.error())};
        return {res->status, res->body, {}};
    }
};

} // namespace

std::unique_ptr<HttpTransport> make_default_transport()
{
    return std::make_unique<HttplibTransport>();
}

HttpBackend::HttpBackend(HttpConfig config, std::unique_ptr<HttpTransport> transport, Sleeper sleeper)
    : config_(std::move(config)),
      transport_(transport ? std::move(transport) : make_default_transport()),
      sleeper_(sleeper ? std::move(sleeper) : Sleeper([](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); })),
      jitter_state_(std::random_device{}())
{
}

std::string HttpBackend::api_key() const
{
    const char* value = std::getenv(config_.api_key_env.c_str());
    if (value == nullptr || *value == '\0')
        throw AuthFailure("environment variable " + config_.api_key_env + " is not set");
    return value;
}

std::string HttpBackend::request_body(const std::string& prompt) const
{
    nlohmann::json body = {{"model", config_.model},
                           {"messages", nlohmann::json::array({{{"role", "user"}, {"content", prompt}}})}};
    if (config_.temperature)
        body["temperature"] = *config_.temperature;
    if (config_.max_tokens)
        body["max_tokens"] = *config_.max_tokens;
    return body.dump();
}

std::string HttpBackend::parse_completion(const std::string& body, CallMetadata* meta)
{
    auto j = nlohmann::json::parse(body, nullptr, false);
    if (j.is_discarded())
        throw TransportError("response body is not JSON");
    try {
        if (meta && j.contains("usage") && j["usage"].is_object()) {
            const auto& usage = j["usage"];
            if (usage.contains("prompt_tokens"))
                meta->prompt_tokens = usage["prompt_tokens"].get<long long>();
            if (usage.contains("completion_tokens"))
                meta->completion_tokens = usage["completion_tokens"].get<long long>();
        }
        const auto& content = j.at("choices").at(0).at("message").at("content");
        if (!content.is_string())
            throw TransportError("completion content is not a string");
        return content.get<std::string>();
    } catch (const nlohmann::json::exception& e) {
        throw TransportError(std::string("unexpected completion payload: ") + e.what());
    }
}

std::chrono::milliseconds HttpBackend::backoff_delay(int attempt)
{
    const auto cap = config_.backoff_max.count();
    long long delay = config_.backoff_base.count();
    for (int i = 0; i < attempt && delay < cap; ++i)
        delay *= 2;
    delay = std::min<long long>(delay, cap);
    std::uint64_t r;
    {
        std::lock_guard lock(mutex_);
        jitter_state_ = splitmix64(jitter_state_);
        r = jitter_state_;
    }
    // Full jitter over the upper half of the window.
    const long long half = delay / 2;
    const long long jitter = half > 0 ? static_cast<long long>(r % static_cast<std::uint64_t>(half + 1)) : 0;
    return std::chrono::milliseconds(half + jitter);
}

void HttpBackend::log_call(const CallMetadata& meta, const std::string& error) const
{
    if (config_.request_log.empty())
        return;
    nlohmann::json line = {{"backend", "http"},
                           {"model", config_.model},
                           {"status", meta.status},
                           {"attempts", meta.attempts},
                           {"latency_ms", meta.latency_ms}};
    if (meta.prompt_tokens)
        line["prompt_tokens"] = *meta.prompt_tokens;
    if (meta.completion_tokens)
        line["completion_tokens"] = *meta.completion_tokens;
    if (!error.empty())
        line["error"] = error;
    std::lock_guard lock(mutex_);
    if (config_.request_log.has_parent_path())
        std::filesystem::create_directories(config_.request_log.parent_path());
    std::ofstream out(config_.request_log, std::ios::app);
    out << line.dump() << '\n';
}

std::string HttpBackend::complete(const std::string& prompt)
{
    const auto key = api_key();
    const HttpHeaders headers = {{"Authorization", "Bearer " + key}};
    const auto body = request_body(prompt);

    CallMetadata meta;
    const auto start = std::chrono::steady_clock::now();
    auto elapsed_ms = [&] {
        return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    };
    std::string last_error;
    for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
        meta.attempts = attempt + 1;
        auto res = transport_->post(config_.endpoint, headers, body, config_.timeout);
        meta.status = res.status;

        if (res.status == 200) {
            std::string text;
            try {
                text = parse_completion(res.body, &meta);
            } catch (const BackendFailure& e) {
                meta.latency_ms = elapsed_ms();
                log_call(meta, e.what());
                throw;
            }
            meta.latency_ms = elapsed_ms();
            log_call(meta, {});
            std::lock_guard lock(mutex_);
            last_call_ = meta;
            return text;
        }
        if (res.status == 401 || res.status == 403) {
            meta.latency_ms = elapsed_ms();
            log_call(meta, "authentication rejected");
            throw AuthFailure("endpoint rejected credentials (HTTP " + std::to_string(res.status) + ")");
        }
        const bool retryable = res.status == 0 || res.status == 429 || res.status == 408 || res.status >= 500;
        last_error = res.status == 0 ? "transport error: " + res.transport_error
                                     : "HTTP " + std::to_string(res.status);
        if (!retryable) {
            meta.latency_ms = elapsed_ms();
            log_call(meta, last_error);
            throw BackendFailure("request failed: " + last_error);
        }
        if (attempt < config_.max_retries)
            sleeper_(backoff_delay(attempt));
    }
    meta.latency_ms = elapsed_ms();
    log_call(meta, last_error);
    if (meta.status == 429)
        throw RateLimited("rate limited after " + std::to_string(meta.attempts) + " attempts");
    throw TransportError(last_error + " after " + std::to_string(meta.attempts) + " attempts");
}

std::optional<CallMetadata> HttpBackend::last_call() const
{
    std::lock_guard lock(mutex_);
    return last_call_;
}

} // namespace aamcbr
