#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include <json.hpp>

#include "aamcbr/agents.hpp"
#include "aamcbr/datagen.hpp"

namespace aamcbr {

enum class Strategy { SingleNotInstructed, SingleInstructed, AamCbr };

std::string to_string(Strategy s);
Strategy parse_strategy(std::string_view s);
/// Table row label, e.g. "SinglePrompt-Instructed".
std::string display_name(Strategy s);

enum class Prediction { Zero, One, Mixed };

std::string to_string(Prediction p);
Prediction parse_prediction(std::string_view s);

/// Parses a conclusion answer; anything other than the two outcomes reads as mixed.
Prediction parse_conclusion(std::string_view response);

struct CoverageRecord {
    std::size_t test_set = 0;
    std::size_t new_case_index = 0;
    std::size_t previous_index = 0;
    std::size_t new_case_size = 0;
    bool ground_truth_relevant = false;
    bool predicted_relevant = false;
    ParseStatus parse_status = ParseStatus::Ok;
    std::string error;
};

struct ExtractionRecord {
    std::size_t test_set = 0;
    std::size_t new_case_index = 0;
    std::size_t previous_index = 0;
    std::size_t new_case_size = 0;
    bool actually_relevant = false;
    FactorSet predicted;
    /// Ground-truth subset intersected with the new case.
    FactorSet truth;
    bool exact_match = false;
    bool failed = false;
    std::string error;
};

struct PredictionRecord {
    std::size_t test_set = 0;
    std::size_t new_case_index = 0;
    std::size_t new_case_size = 0;
    Outcome default_outcome = Outcome::Zero;
    Strategy strategy = Strategy::AamCbr;
    Prediction predicted = Prediction::Mixed;
    Outcome gold = Outcome::Zero;
    bool correct = false;
    std::string error;
};

/// hits / total with the denominator kept; undefined when total is zero.
struct Rate {
    std::size_t hits = 0;
    std::size_t total = 0;

    void add(bool hit)
    {
        ++total;
        hits += hit ? 1 : 0;
    }
    std::optional<double> value() const
    {
        if (total == 0)
            return std::nullopt;
        return static_cast<double>(hits) / static_cast<double>(total);
    }
    bool operator==(const Rate&) const = default;
};

struct MetricsTable {
    std::vector<std::size_t> sizes;
    std::map<std::size_t, Rate> coverage_accuracy;
    /// P(actually relevant | predicted relevant).
    std::map<std::size_t, Rate> coverage_precision;
    std::map<std::size_t, Rate> ground_truth_relevance;
    std::map<std::size_t, Rate> extraction_accuracy;
    std::map<std::size_t, Rate> extraction_accuracy_given_relevance;
    std::map<std::tuple<Strategy, std::size_t, Outcome>, Rate> prediction_accuracy;

    bool operator==(const MetricsTable&) const = default;
};

nlohmann::json to_json(const MetricsTable& m);
MetricsTable metrics_from_json(const nlohmann::json& j);

struct ExperimentInputs {
    const FactorDomain& domain;
    const ScenarioPool& pool;
    const std::vector<TestSet>& test_sets;
};

struct ExperimentOptions {
    AgentOptions agent;
    /// Upper bound on concurrently running work items, each of which issues
    /// its backend calls sequentially.
    std::size_t concurrency = 8;
    std::vector<Outcome> defaults = {Outcome::Zero, Outcome::One};
    std::vector<Strategy> strategies = {Strategy::SingleNotInstructed, Strategy::SingleInstructed, Strategy::AamCbr};
    /// Feed SinglePrompt baselines factorized previous cases instead of scenario text.
    bool single_prompt_factorized = false;
};

struct CoverageRun {
    std::vector<CoverageRecord> records;
    MetricsTable metrics;
};

struct ExtractionRun {
    std::vector<ExtractionRecord> records;
    MetricsTable metrics;
};

struct PredictionRun {
    std::vector<PredictionRecord> records;
    MetricsTable metrics;
};

/// One coverage question per (previous case, new case) pair of every test set.
CoverageRun run_coverage_experiment(Backend& backend, const ExperimentInputs& in, const ExperimentOptions& opt = {});

/// Extraction for every pair the coverage run predicted relevant.
ExtractionRun run_extraction_experiment(Backend& backend, const ExperimentInputs& in,
                                        const std::vector<CoverageRecord>& coverage,
                                        const ExperimentOptions& opt = {});

/// AA-CBR outcome on the ground-truth case base of a test set.
Outcome gold_outcome(const TestSet& ts, const FactorSet& new_case, Outcome default_outcome);

PredictionRun run_prediction_experiment(Backend& backend, const ExperimentInputs& in, const ExperimentOptions& opt = {});

/// SinglePrompt baseline: one prediction prompt, then the conclusion prompt.
Prediction single_prompt_predict(Backend& backend, const FactorDomain& domain, const TestSet& ts,
                                 const ScenarioPool& pool, const FactorSet& new_case, Outcome default_outcome,
                                 bool instructed, const ExperimentOptions& opt);

/// Renders the baseline prediction prompt (non-instructed or instructed).
std::string render_single_prompt(const FactorDomain& domain, const TestSet& ts, const ScenarioPool& pool,
                                 const FactorSet& new_case, Outcome default_outcome, bool instructed,
                                 const ExperimentOptions& opt);

/// Probability that a uniformly drawn situation is covered by a new case of size n.
double relevance_probability(std::size_t n, std::size_t domain_size);

/// Monte-Carlo estimate of the same quantity.
double empirical_relevance_frequency(std::size_t n, std::size_t domain_size, std::size_t samples, std::uint64_t seed);

/// Merges the non-empty parts of `other` into `into`.
void merge_metrics(MetricsTable& into, const MetricsTable& other);

} // namespace aamcbr
