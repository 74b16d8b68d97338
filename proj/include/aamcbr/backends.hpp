#pragma once

#include <atomic>
#include <chrono>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "aamcbr/backend.hpp"
#include "aamcbr/core_model.hpp"
#include "aamcbr/prompts.hpp"

namespace aamcbr {

/// Scenario text -> ground-truth factor subset. Safe for concurrent use.
class TruthTable {
public:
    /// Throws std::invalid_argument if the text is already bound to another subset.
    void add(const std::string& text, const FactorSet& truth);
    std::optional<FactorSet> find(const std::string& text) const;
    std::size_t size() const;

private:
    mutable std::mutex mutex_;
    std::map<std::string, FactorSet> entries_;
};

/// Writes a description for the included factors; the second argument is a
/// per-subset attempt counter.
using ScenarioWriter = std::function<std::string(const FactorSet& included, std::uint64_t attempt)>;

/// Answers coverage and extraction prompts from the truth table. With a
/// ScenarioWriter it also answers scenario-generation prompts, registering
/// each description it writes.
class OracleBackend : public Backend {
public:
    struct CoverageQuery {
        FactorSet listed;
        FactorSet truth;
    };
    struct ExtractionQuery {
        /// Candidate ids in the order they were listed.
        std::vector<FactorId> candidates;
        FactorSet truth;
    };
    struct GenerationQuery {
        FactorSet included;
    };
    using Query = std::variant<CoverageQuery, ExtractionQuery, GenerationQuery>;

    OracleBackend(FactorDomain domain, std::shared_ptr<TruthTable> truth,
                  PromptTemplates templates = PromptTemplates::builtin());

    void enable_generation(ScenarioWriter writer);

    std::string complete(const std::string& prompt) override;
    BackendIdentity identity() const override { return {"oracle", "ground-truth"}; }

    /// Decodes a prompt into the question it asks. Throws UnrecognizedPromptShape
    /// or UnknownScenario.
    Query interpret(const std::string& prompt) const;

    std::string answer_coverage(const CoverageQuery& q) const;
    std::string answer_extraction(const std::vector<FactorId>& returned) const;
    std::string answer_generation(const GenerationQuery& q);

    const FactorDomain& domain() const noexcept { return domain_; }
    TruthTable& truth_table() noexcept { return *truth_; }

private:
    FactorSet ids_from_sentence_list(const std::string& list) const;
    FactorSet lookup(const std::string& text) const;

    FactorDomain domain_;
    std::shared_ptr<TruthTable> truth_;
    PromptTemplates templates_;
    ScenarioWriter writer_;
    std::mutex attempts_mutex_;
    std::map<FactorSet, std::uint64_t> attempts_;
};

struct NoiseConfig {
    double flip_prob = 0.0;
    double omit_prob = 0.0;
    double add_prob = 0.0;
    std::uint64_t seed = 0;
};

/// Oracle with seeded coverage flips and per-factor omissions/additions. The
/// noise stream for a call is derived from (seed, prompt), so answers do not
/// depend on call order or concurrency.
class NoisyOracleBackend : public Backend {
public:
    NoisyOracleBackend(std::shared_ptr<OracleBackend> inner, NoiseConfig noise);

    std::string complete(const std::string& prompt) override;
    BackendIdentity identity() const override;

    const NoiseConfig& noise() const noexcept { return noise_; }

private:
    std::shared_ptr<OracleBackend> inner_;
    NoiseConfig noise_;
};

struct HttpResponse {
    int status = 0;
    std::string body;
    /// Set when no HTTP response was received.
    std::string transport_error;
};

using HttpHeaders = std::vector<std::pair<std::string, std::string>>;

class HttpTransport {
public:
    virtual ~HttpTransport() = default;
    virtual HttpResponse post(const std::string& url, const HttpHeaders& headers,
                              const std::string& body, std::chrono::milliseconds timeout) = 0;
};

/// cpp-httplib based transport.
std::unique_ptr<HttpTransport> make_default_transport();

struct HttpConfig {
    /// Full chat-completions URL, e.g. https://api.openai.com/v1/chat/completions.
    std::string endpoint = "https://api.openai.com/v1/chat/completions";
    std::string model = "gpt-4o";
    /// Name of the environment variable that holds the API key.
    std::string api_key_env = "OPENAI_API_KEY";
    std::chrono::milliseconds timeout{60000};
    int max_retries = 5;
    std::chrono::milliseconds backoff_base{500};
    std::chrono::milliseconds backoff_max{30000};
    std::optional<double> temperature = 0.0;
    std::optional<int> max_tokens;
    /// JSON-lines request log; empty disables it.
    std::filesystem::path request_log;
};

struct CallMetadata {
    int status = 0;
    int attempts = 0;
    double latency_ms = 0.0;
    std::optional<long long> prompt_tokens;
    std::optional<long long> completion_tokens;
};

/// OpenAI-compatible chat-completions client (also serves Gemini through its
/// OpenAI-compatible endpoint).
class HttpBackend : public Backend {
public:
    using Sleeper = std::function<void(std::chrono::milliseconds)>;

    explicit HttpBackend(HttpConfig config, std::unique_ptr<HttpTransport> transport = nullptr,
                         Sleeper sleeper = nullptr);

    std::string complete(const std::string& prompt) override;
    BackendIdentity identity() const override { return {"http", config_.model}; }

    std::optional<CallMetadata> last_call() const;

    std::string request_body(const std::string& prompt) const;
    static std::string parse_completion(const std::string& body, CallMetadata* meta = nullptr);

private:
    std::string api_key() const;
    void log_call(const CallMetadata& meta, const std::string& error) const;
    std::chrono::milliseconds backoff_delay(int attempt);

    HttpConfig config_;
    std::unique_ptr<HttpTransport> transport_;
    Sleeper sleeper_;
    mutable std::mutex mutex_;
    std::optional<CallMetadata> last_call_;
    std::uint64_t jitter_state_;
};

/// Content-addressed response cache: `<dir>/<backend-id>/<digest>.txt`, keyed
/// by SHA-256 of the backend identity and the prompt.
class CachingBackend : public Backend {
public:
    CachingBackend(std::shared_ptr<Backend> inner, std::filesystem::path dir);

    std::string complete(const std::string& prompt) override;
    BackendIdentity identity() const override { return inner_->identity(); }
    bool single_flight() const override { return inner_->single_flight(); }

    std::filesystem::path entry_path(const std::string& prompt) const;
    std::size_t hits() const noexcept { return hits_; }
    std::size_t misses() const noexcept { return misses_; }

private:
    std::shared_ptr<Backend> inner_;
    std::filesystem::path dir_;
    std::atomic<std::size_t> hits_{0};
    std::atomic<std::size_t> misses_{0};
};

std::string sha256_hex(std::string_view data);

} // namespace aamcbr
