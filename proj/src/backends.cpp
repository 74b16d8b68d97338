#include "aamcbr/backends.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "aamcbr/agents.hpp"
#include "aamcbr/util.hpp"

namespace aamcbr {

ThrottledBackend::ThrottledBackend(std::shared_ptr<Backend> inner, std::ptrdiff_t limit)
    : inner_(std::move(inner)), slots_(inner_->single_flight() ? 1 : std::max<std::ptrdiff_t>(limit, 1))
{
}

std::string ThrottledBackend::complete(const std::string& prompt)
{
    slots_.acquire();
    struct Release {
        std::counting_semaphore<>& s;
        ~Release() { s.release(); }
    } release{slots_};
    return inner_->complete(prompt);
}

// ---------------------------------------------------------------------------

void TruthTable::add(const std::string& text, const FactorSet& truth)
{
    std::lock_guard lock(mutex_);
    auto [it, inserted] = entries_.emplace(text, truth);
    if (!inserted && it->second != truth)
        throw std::invalid_argument("scenario text already registered for " + to_string(it->second));
}

std::optional<FactorSet> TruthTable::find(const std::string& text) const
{
    std::lock_guard lock(mutex_);
    auto it = entries_.find(text);
    if (it == entries_.end())
        return std::nullopt;
    return it->second;
}

std::size_t TruthTable::size() const
{
    std::lock_guard lock(mutex_);
    return entries_.size();
}

// ---------------------------------------------------------------------------

OracleBackend::OracleBackend(FactorDomain domain, std::shared_ptr<TruthTable> truth, PromptTemplates templates)
    : domain_(std::move(domain)), truth_(std::move(truth)), templates_(std::move(templates))
{
    if (!truth_)
        truth_ = std::make_shared<TruthTable>();
}

void OracleBackend::enable_generation(ScenarioWriter writer)
{
    writer_ = std::move(writer);
}

FactorSet OracleBackend::ids_from_sentence_list(const std::string& list) const
{
    auto sentences = parse_sentence_list(trim(list));
    if (!sentences)
        throw UnrecognizedPromptShape("factor list is not a JSON array of sentences");
    FactorSet ids;
    for (const auto& s : *sentences) {
        const auto wanted = normalize_sentence(s);
        auto it = std::find_if(domain_.factors().begin(), domain_.factors().end(),
                               [&](const Factor& f) { return normalize_sentence(f.sentence) == wanted; });
        if (it == domain_.factors().end())
            throw UnrecognizedPromptShape("factor sentence not in domain: " + s);
        ids.insert(it->id);
    }
    return ids;
}

FactorSet OracleBackend::lookup(const std::string& text) const
{
    if (auto t = truth_->find(text))
        return *t;
    if (auto t = truth_->find(trim(text)))
        return *t;
    throw UnknownScenario("no ground truth for scenario text: " + text.substr(0, 80));
}

OracleBackend::Query OracleBackend::interpret(const std::string& prompt) const
{
    if (auto v = match_template(templates_.determine_coverage, prompt))
        return CoverageQuery{ids_from_sentence_list(v->at("factor_list")), lookup(v->at("case_description"))};
    if (auto v = match_template(templates_.extract_factors, prompt)) {
        const auto listed = ids_from_sentence_list(v->at("all_factor_sentences"));
        return ExtractionQuery{domain_.ordered(listed), lookup(v->at("description"))};
    }
    if (writer_) {
        if (auto v = match_template(templates_.generate_scenario, prompt))
            return GenerationQuery{ids_from_sentence_list(v->at("included_factor_list"))};
    }
    throw UnrecognizedPromptShape("oracle cannot answer this prompt");
}

std::string OracleBackend::answer_coverage(const CoverageQuery& q) const
{
    return is_subset(q.truth, q.listed) ? "YES" : "NO";
}

std::string OracleBackend::answer_extraction(const std::vector<FactorId>& returned) const
{
    std::vector<std::string> sentences;
    for (const auto& id : returned)
        sentences.push_back(domain_.at(id).sentence);
    return format_sentence_list(sentences);
}

std::string OracleBackend::answer_generation(const GenerationQuery& q)
{
    std::uint64_t attempt;
    {
        std::lock_guard lock(attempts_mutex_);
        attempt = attempts_[q.included]++;
    }
    auto text = writer_(q.included, attempt);
    truth_->add(text, q.included);
    return text;
}

std::string OracleBackend::complete(const std::string& prompt)
{
    const auto query = interpret(prompt);
    if (const auto* c = std::get_if<CoverageQuery>(&query))
        return answer_coverage(*c);
    if (const auto* e = std::get_if<ExtractionQuery>(&query)) {
        std::vector<FactorId> returned;
        for (const auto& id : e->candidates)
            if (e->truth.contains(id))
                returned.push_back(id);
        return answer_extraction(returned);
    }
    return answer_generation(std::get<GenerationQuery>(query));
}

// ---------------------------------------------------------------------------

NoisyOracleBackend::NoisyOracleBackend(std::shared_ptr<OracleBackend> inner, NoiseConfig noise)
    : inner_(std::move(inner)), noise_(noise)
{
    for (double p : {noise_.flip_prob, noise_.omit_prob, noise_.add_prob})
        if (!(p >= 0.0 && p <= 1.0))
            throw std::invalid_argument("noise probabilities must lie in [0, 1]");
}

BackendIdentity NoisyOracleBackend::identity() const
{
    std::ostringstream model;
    model << "flip=" << noise_.flip_prob << ",omit=" << noise_.omit_prob << ",add=" << noise_.add_prob
          << ",seed=" << noise_.seed;
    return {"noisy-oracle", model.str()};
}

std::string NoisyOracleBackend::complete(const std::string& prompt)
{
    const auto query = inner_->interpret(prompt);
    Rng rng(noise_.seed ^ fnv1a64(prompt));
    if (const auto* c = std::get_if<OracleBackend::CoverageQuery>(&query)) {
        bool covered = is_subset(c->truth, c->listed);
        if (rng.bernoulli(noise_.flip_prob))
            covered = !covered;
        return covered ? "YES" : "NO";
    }
    if (const auto* e = std::get_if<OracleBackend::ExtractionQuery>(&query)) {
        std::vector<FactorId> returned;
        for (const auto& id : e->candidates) {
            // One draw per candidate regardless of branch keeps streams aligned.
            const double u = rng.uniform01();
            if (e->truth.contains(id) ? u >= noise_.omit_prob : u < noise_.add_prob)
                returned.push_back(id);
        }
        return inner_->answer_extraction(returned);
    }
    return inner_->answer_generation(std::get<OracleBackend::GenerationQuery>(query));
}

// ---------------------------------------------------------------------------

std::string sha256_hex(std::string_view data)
{
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1)
        throw std::runtime_error("SHA-256 digest failed");
    static const char* hex = "0123456789abcdef";
    std::string out;
    out.reserve(len * 2);
    for (unsigned int i = 0; i < len; ++i) {
        out += hex[digest[i] >> 4];
        out += hex[digest[i] & 0xf];
    }
    return out;
}

namespace {

std::string sanitize_path_component(const std::string& s)
{
    std::string out;
    for (char c : s) {
        const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '-'
            || c == '_' || c == '.';
        out += ok ? c : '_';
    }
    return out;
}

} // namespace

CachingBackend::CachingBackend(std::shared_ptr<Backend> inner, std::filesystem::path dir)
    : inner_(std::move(inner)), dir_(std::move(dir))
{
}

std::filesystem::path CachingBackend::entry_path(const std::string& prompt) const
{
    const auto id = inner_->identity().key();
    std::string keyed = id;
    keyed += '\0';
    keyed += prompt;
    return dir_ / sanitize_path_component(id) / (sha256_hex(keyed) + ".txt");
}

std::string CachingBackend::complete(const std::string& prompt)
{
    const auto path = entry_path(prompt);
    if (std::filesystem::exists(path)) {
        ++hits_;
        return read_text_file(path);
    }
    ++misses_;
    auto response = inner_->complete(prompt);
    write_file_atomic(path, response);
    return response;
}

} // namespace aamcbr
