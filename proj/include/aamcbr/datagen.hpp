#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "aamcbr/agents.hpp"
#include "aamcbr/backend.hpp"
#include "aamcbr/backends.hpp"
#include "aamcbr/core_model.hpp"

namespace aamcbr {

enum class ScenarioSource { LlmGenerated, TemplateComposed };

std::string to_string(ScenarioSource s);
ScenarioSource parse_scenario_source(std::string_view s);

struct Scenario {
    FactorSet subset;
    std::string description;
    ScenarioSource source = ScenarioSource::TemplateComposed;
    int attempts = 1;
};

struct SkippedSubset {
    FactorSet subset;
    int attempts = 0;
};

using ScenarioResult = std::variant<Scenario, SkippedSubset>;

/// Asks the backend for a description covering exactly `included`, then
/// verifies it by extracting factors against the whole domain. Regenerates
/// until the extraction matches or `max_attempts` is exhausted.
ScenarioResult generate_scenario(Backend& backend, const FactorDomain& domain, const FactorSet& included,
                                 int max_attempts = 10, const AgentOptions& options = {});

/// Offline description built from a phrase bank; deterministic in (subset, seed).
Scenario compose_template_scenario(const FactorDomain& domain, const FactorSet& subset, std::uint64_t seed);

/// All non-empty subsets of the domain, ordered by their bitmask over domain order.
std::vector<FactorSet> nonempty_subsets(const FactorDomain& domain);

class ScenarioPool {
public:
    void add(Scenario scenario);
    void skip(SkippedSubset skipped);

    const std::map<FactorSet, Scenario>& scenarios() const noexcept { return scenarios_; }
    const std::vector<SkippedSubset>& skipped() const noexcept { return skipped_; }
    std::size_t size() const noexcept { return scenarios_.size(); }

    const Scenario& at(const FactorSet& subset) const;
    bool contains(const FactorSet& subset) const { return scenarios_.contains(subset); }

    void register_truth(TruthTable& table) const;

    /// One JSON object per line: {"subset":[...],"description":"...","source":"...","attempts":n}
    std::string to_jsonl() const;
    static ScenarioPool from_jsonl(std::string_view text);
    void save(const std::filesystem::path& path) const;
    static ScenarioPool load(const std::filesystem::path& path);

private:
    std::map<FactorSet, Scenario> scenarios_;
    std::vector<SkippedSubset> skipped_;
};

/// Template-composed scenario for every non-empty subset.
ScenarioPool compose_template_pool(const FactorDomain& domain, std::uint64_t seed);

/// Backend-generated scenario for every non-empty subset.
ScenarioPool generate_pool(Backend& backend, const FactorDomain& domain, int max_attempts,
                           std::size_t concurrency, const AgentOptions& options = {});

/// Makes an oracle answer scenario-generation prompts with the template composer.
void attach_template_writer(OracleBackend& oracle, std::uint64_t seed);

struct PreviousCaseRef {
    FactorSet subset;
    Outcome outcome = Outcome::Zero;
};

struct TestSet {
    std::size_t id = 0;
    std::uint64_t seed = 0;
    std::vector<PreviousCaseRef> previous;
    std::vector<FactorSet> new_cases;
};

struct TestSetOptions {
    std::size_t count = 50;
    std::uint64_t seed = 0;
    std::size_t previous_per_set = 10;
    std::vector<std::size_t> new_case_sizes = {6, 7, 8, 9, 10};
    bool with_replacement = false;
};

class InsufficientPool : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Outcome forced by polarity (all-negative -> 0, all-positive -> 1), if any.
std::optional<Outcome> forced_outcome(const FactorDomain& domain, const FactorSet& subset);

std::vector<TestSet> generate_test_sets(const ScenarioPool& pool, const FactorDomain& domain,
                                        const TestSetOptions& options);

/// Ground-truth case base of a test set.
CaseBase truth_case_base(const TestSet& test_set);

/// Scenario texts and outcomes as seen by the agents.
std::vector<PreviousCaseText> previous_texts(const TestSet& test_set, const ScenarioPool& pool);

nlohmann::json to_json(const TestSet& ts);
TestSet test_set_from_json(const nlohmann::json& j);
void save_test_sets(const std::filesystem::path& path, const std::vector<TestSet>& sets);
std::vector<TestSet> load_test_sets(const std::filesystem::path& path);

} // namespace aamcbr
