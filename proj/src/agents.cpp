#include "aamcbr/agents.hpp"

#include <map>

#include "aamcbr/util.hpp"

namespace aamcbr {

std::string to_string(ParseStatus s)
{
    switch (s) {
    case ParseStatus::Ok:
        return "ok";
    case ParseStatus::Retried:
        return "retried";
    case ParseStatus::Failed:
        return "failed";
    }
    return "failed";
}

namespace {

std::string strip_decoration(std::string_view response)
{
    auto s = trim(response);
    while (!s.empty() && (s.back() == '.' || s.back() == '!'))
        s.pop_back();
    while (s.size() >= 2 && (s.front() == '\'' || s.front() == '"' || s.front() == '`')
           && s.back() == s.front())
        s = trim(std::string_view(s).substr(1, s.size() - 2));
    return s;
}

std::optional<std::vector<std::string>> parse_json_array_response(std::string_view response)
{
    // Tolerate code fences or prose around the array.
    const auto open = response.find('[');
    const auto close = response.rfind(']');
    if (open == std::string_view::npos || close == std::string_view::npos || close < open)
        return std::nullopt;
    return parse_sentence_list(response.substr(open, close - open + 1));
}

} // namespace

std::optional<bool> parse_yes_no(std::string_view response)
{
    const auto s = to_lower(strip_decoration(response));
    if (s == "yes")
        return true;
    if (s == "no")
        return false;
    return std::nullopt;
}

std::string normalize_sentence(std::string_view sentence)
{
    auto s = trim(sentence);
    while (!s.empty() && std::string_view(".,;:!?").find(s.back()) != std::string_view::npos)
        s.pop_back();
    return to_lower(trim(s));
}

RelevanceVerdict determine_coverage(Backend& backend, const std::vector<std::string>& new_factor_sentences,
                                    const std::string& case_text, const AgentOptions& options)
{
    if (new_factor_sentences.empty())
        throw std::invalid_argument("coverage determination needs a non-empty factor list");
    if (trim(case_text).empty())
        throw std::invalid_argument("coverage determination needs a non-empty case description");

    const auto prompt = render(options.templates.determine_coverage,
                               {{"factor_list", format_sentence_list(new_factor_sentences)},
                                {"case_description", case_text}});
    RelevanceVerdict v;
    for (int attempt = 0; attempt <= options.max_retries; ++attempt) {
        v.attempts = attempt + 1;
        v.raw_response = backend.complete(prompt);
        if (auto answer = parse_yes_no(v.raw_response)) {
            v.relevant = *answer;
            v.parse_status = attempt == 0 ? ParseStatus::Ok : ParseStatus::Retried;
            return v;
        }
    }
    v.relevant = false;
    v.parse_status = ParseStatus::Failed;
    return v;
}

ExtractionResult extract_case_factors(Backend& backend, const FactorDomain& domain,
                                      const FactorSet& candidates, const std::string& case_text,
                                      const AgentOptions& options)
{
    ExtractionResult result;
    if (candidates.empty())
        return result;
    if (trim(case_text).empty())
        throw std::invalid_argument("factor extraction needs a non-empty case description");

    std::map<std::string, FactorId> by_sentence;
    for (const auto& id : domain.ordered(candidates))
        by_sentence.emplace(normalize_sentence(domain.at(id).sentence), id);

    const auto prompt = render(options.templates.extract_factors,
                               {{"description", case_text},
                                {"all_factor_sentences", format_sentence_list(domain.sentences(candidates))}});
    for (int attempt = 0; attempt <= options.max_retries; ++attempt) {
        result.attempts = attempt + 1;
        result.raw_response = backend.complete(prompt);
        auto sentences = parse_json_array_response(result.raw_response);
        if (!sentences)
            continue;
        for (const auto& s : *sentences) {
            auto it = by_sentence.find(normalize_sentence(s));
            if (it == by_sentence.end())
                ++result.unknown_sentences;
            else
                result.factors.insert(it->second);
        }
        return result;
    }
    result.failed = true;
    return result;
}

AamResult run_aam_cbr(Backend& backend, const FactorDomain& domain,
                      const std::vector<PreviousCaseText>& previous, const NewCase& new_case,
                      Outcome default_outcome, const AgentOptions& options)
{
    domain.validate(new_case.factors);
    if (new_case.factors.empty() && !previous.empty())
        throw std::invalid_argument("AAM-CBR needs a new case with at least one factor");
    const auto new_sentences = domain.sentences(new_case.factors);

    struct AgentOutcome {
        RelevanceVerdict relevance;
        std::optional<ExtractionResult> extraction;
        std::vector<AgentFailure> failures;
        bool coverage_call_failed = false;
    };
    std::vector<AgentOutcome> agents(previous.size());

    const std::size_t limit = backend.single_flight() ? 1 : options.concurrency;
    parallel_for(previous.size(), limit, [&](std::size_t i) {
        auto& agent = agents[i];
        agent.relevance.previous_case_index = i;
        try {
            agent.relevance = determine_coverage(backend, new_sentences, previous[i].text, options);
            agent.relevance.previous_case_index = i;
        } catch (const BackendFailure& e) {
            agent.relevance.parse_status = ParseStatus::Failed;
            agent.coverage_call_failed = true;
            agent.failures.push_back({i, "coverage", e.what()});
            return;
        }
        // Cases not deemed relevant are refused: nothing about them goes further.
        if (!agent.relevance.relevant || agent.relevance.parse_status == ParseStatus::Failed)
            return;
        try {
            agent.extraction = extract_case_factors(backend, domain, new_case.factors, previous[i].text, options);
        } catch (const BackendFailure& e) {
            agent.failures.push_back({i, "extraction", e.what()});
        }
    });

    AamResult result;
    bool all_coverage_calls_failed = !previous.empty();
    for (std::size_t i = 0; i < agents.size(); ++i) {
        auto& agent = agents[i];
        all_coverage_calls_failed = all_coverage_calls_failed && agent.coverage_call_failed;
        if (agent.relevance.parse_status == ParseStatus::Failed && !agent.coverage_call_failed)
            ++result.coverage_parse_failures;
        result.relevance.push_back(agent.relevance);
        for (auto& f : agent.failures)
            result.failures.push_back(std::move(f));
        if (!agent.extraction)
            continue;
        result.unknown_sentences += agent.extraction->unknown_sentences;
        if (agent.extraction->failed) {
            ++result.extraction_parse_failures;
            continue;
        }
        if (agent.extraction->factors.empty())
            ++result.empty_extractions;
        result.factorized.push_back({i, agent.extraction->factors, previous[i].outcome});
    }
    if (all_coverage_calls_failed)
        throw BackendFailure("backend unavailable for every agent: " + result.failures.front().message);

    std::map<FactorSet, std::set<Outcome>> outcomes_by_situation;
    for (const auto& f : result.factorized)
        outcomes_by_situation[f.factors].insert(f.outcome);

    std::vector<FactorizedCase> surviving;
    std::vector<Case> cases;
    for (auto& f : result.factorized) {
        if (outcomes_by_situation[f.factors].size() > 1) {
            result.dropped_conflicts.push_back(f.previous_case_index);
            continue;
        }
        cases.push_back({f.factors, f.outcome});
        surviving.push_back(std::move(f));
    }
    result.factorized = std::move(surviving);

    result.verdict = aacbr_outcome(check_consistency(cases), default_outcome, new_case);
    return result;
}

nlohmann::json to_json(const AamResult& result)
{
    nlohmann::json relevance = nlohmann::json::array();
    for (const auto& r : result.relevance)
        relevance.push_back({{"index", r.previous_case_index},
                             {"relevant", r.relevant},
                             {"parse_status", to_string(r.parse_status)},
                             {"attempts", r.attempts}});
    nlohmann::json factorized = nlohmann::json::array();
    for (const auto& f : result.factorized)
        factorized.push_back({{"index", f.previous_case_index},
                              {"factors", factors_to_json(f.factors)},
                              {"outcome", to_string(f.outcome)}});
    nlohmann::json failures = nlohmann::json::array();
    for (const auto& f : result.failures)
        failures.push_back({{"index", f.previous_case_index}, {"stage", f.stage}, {"message", f.message}});
    return {{"verdict", to_json(result.verdict)},
            {"relevance", std::move(relevance)},
            {"factorized", std::move(factorized)},
            {"dropped_conflicts", result.dropped_conflicts},
            {"failures", std::move(failures)},
            {"coverage_parse_failures", result.coverage_parse_failures},
            {"extraction_parse_failures", result.extraction_parse_failures},
            {"empty_extractions", result.empty_extractions},
            {"unknown_sentences", result.unknown_sentences}};
}

} // namespace aamcbr
