#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "aamcbr/backends.hpp"
#include "aamcbr/datagen.hpp"
#include "aamcbr/experiments.hpp"
#include "aamcbr/report.hpp"

namespace aamcbr {

enum class BackendKind { Oracle, Noisy, Http };

std::string to_string(BackendKind k);
BackendKind parse_backend_kind(std::string_view s);

struct BackendConfig {
    BackendKind kind = BackendKind::Oracle;
    NoiseConfig noise;
    HttpConfig http;
    /// Response cache directory; empty disables caching.
    std::filesystem::path cache_dir;
    /// Bound on in-flight calls across the whole run.
    std::size_t concurrency = 8;
};

struct BackendBundle {
    /// What callers talk to (throttled, possibly cached).
    std::shared_ptr<Backend> backend;
    /// Present for oracle and noisy backends.
    std::shared_ptr<OracleBackend> oracle;
    std::shared_ptr<CachingBackend> cache;
};

/// Builds the configured backend. Oracle-based backends learn the ground truth
/// of every scenario in `pool`; `writer_seed` lets them answer generation prompts.
BackendBundle make_backend(const BackendConfig& config, const FactorDomain& domain, const ScenarioPool& pool,
                           const PromptTemplates& templates, std::optional<std::uint64_t> writer_seed = std::nullopt);

enum class ScenarioMode { Compose, Generate };

struct PipelineConfig {
    FactorDomain domain = FactorDomain::credit();
    PromptTemplates templates = PromptTemplates::builtin();
    BackendConfig backend;
    ScenarioMode scenarios = ScenarioMode::Compose;
    int max_generation_attempts = 10;
    std::uint64_t seed = 2024;
    TestSetOptions test_sets;
    ExperimentOptions experiment;
    std::filesystem::path out_dir = "out";
};

struct PipelineResult {
    ScenarioPool pool;
    std::vector<TestSet> test_sets;
    CoverageRun coverage;
    ExtractionRun extraction;
    PredictionRun prediction;
    MetricsTable metrics;
};

/// Scenario pool, test sets, all three experiments and the report, written to out_dir:
/// scenarios.jsonl, testsets.json, coverage.csv, extraction.csv, predictions.csv,
/// metrics.json, tables.txt.
PipelineResult run_pipeline(const PipelineConfig& config);

} // namespace aamcbr
