#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include <json.hpp>

#include "aamcbr/backend.hpp"
#include "aamcbr/core_model.hpp"
#include "aamcbr/prompts.hpp"
#include "aamcbr/reasoner.hpp"

namespace aamcbr {

enum class ParseStatus { Ok, Retried, Failed };

std::string to_string(ParseStatus s);

struct AgentOptions {
    /// Extra attempts after an unparseable response.
    int max_retries = 3;
    std::size_t concurrency = 8;
    PromptTemplates templates = PromptTemplates::builtin();
};

struct RelevanceVerdict {
    std::size_t previous_case_index = 0;
    /// Only meaningful when parse_status != Failed; failed verdicts read as not relevant.
    bool relevant = false;
    std::string raw_response;
    ParseStatus parse_status = ParseStatus::Ok;
    int attempts = 0;
};

struct ExtractionResult {
    FactorSet factors;
    std::size_t unknown_sentences = 0;
    bool failed = false;
    std::string raw_response;
    int attempts = 0;
};

/// Deliberately carries no text: only ids and the outcome reach the reasoner.
struct FactorizedCase {
    std::size_t previous_case_index = 0;
    FactorSet factors;
    Outcome outcome = Outcome::Zero;
};

struct PreviousCaseText {
    std::string text;
    Outcome outcome = Outcome::Zero;
};

struct AgentFailure {
    std::size_t previous_case_index = 0;
    std::string stage;
    std::string message;
};

struct AamResult {
    CbrVerdict verdict;
    std::vector<RelevanceVerdict> relevance;
    std::vector<FactorizedCase> factorized;
    std::vector<std::size_t> dropped_conflicts;
    std::vector<AgentFailure> failures;
    std::size_t coverage_parse_failures = 0;
    std::size_t extraction_parse_failures = 0;
    std::size_t empty_extractions = 0;
    std::size_t unknown_sentences = 0;
};

/// Parses a YES/NO answer; nullopt when the response is neither.
std::optional<bool> parse_yes_no(std::string_view response);

/// Lower-cases and strips surrounding whitespace and trailing punctuation.
std::string normalize_sentence(std::string_view sentence);

/// Asks whether the new case's factor sentences cover the described case.
RelevanceVerdict determine_coverage(Backend& backend, const std::vector<std::string>& new_factor_sentences,
                                    const std::string& case_text, const AgentOptions& options = {});

/// Extracts which of the candidate factors the case text implies. Returned
/// sentences are mapped back to ids; unknown ones are discarded and counted.
ExtractionResult extract_case_factors(Backend& backend, const FactorDomain& domain,
                                      const FactorSet& candidates, const std::string& case_text,
                                      const AgentOptions& options = {});

/// One agent per previous case: coverage, then extraction for relevant cases.
/// Conflicting factorized cases are all dropped before the case base is built.
AamResult run_aam_cbr(Backend& backend, const FactorDomain& domain,
                      const std::vector<PreviousCaseText>& previous, const NewCase& new_case,
                      Outcome default_outcome, const AgentOptions& options = {});

nlohmann::json to_json(const AamResult& result);

} // namespace aamcbr
