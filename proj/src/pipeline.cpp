#include "aamcbr/pipeline.hpp"

#include "aamcbr/util.hpp"

namespace aamcbr {

std::string to_string(BackendKind k)
{
    switch (k) {
    case BackendKind::Oracle:
        return "oracle";
    case BackendKind::Noisy:
        return "noisy";
    case BackendKind::Http:
        return "http";
    }
    return "oracle";
}

BackendKind parse_backend_kind(std::string_view s)
{
    if (s == "oracle")
        return BackendKind::Oracle;
    if (s == "noisy")
        return BackendKind::Noisy;
    if (s == "http")
        return BackendKind::Http;
    throw std::invalid_argument("unknown backend '" + std::string(s) + "'");
}

BackendBundle make_backend(const BackendConfig& config, const FactorDomain& domain, const ScenarioPool& pool,
                           const PromptTemplates& templates, std::optional<std::uint64_t> writer_seed)
{
    BackendBundle bundle;
    std::shared_ptr<Backend> base;
    if (config.kind == BackendKind::Http) {
        base = std::make_shared<HttpBackend>(config.http);
    } else {
        auto truth = std::make_shared<TruthTable>();
        pool.register_truth(*truth);
        bundle.oracle = std::make_shared<OracleBackend>(domain, truth, templates);
        if (writer_seed)
            attach_template_writer(*bundle.oracle, *writer_seed);
        if (config.kind == BackendKind::Noisy)
            base = std::make_shared<NoisyOracleBackend>(bundle.oracle, config.noise);
        else
            base = bundle.oracle;
    }
    if (!config.cache_dir.empty()) {
        bundle.cache = std::make_shared<CachingBackend>(base, config.cache_dir);
        base = bundle.cache;
    }
    bundle.backend = std::make_shared<ThrottledBackend>(base, static_cast<std::ptrdiff_t>(config.concurrency));
    return bundle;
}

PipelineResult run_pipeline(const PipelineConfig& config)
{
    PipelineResult result;
    AgentOptions agent = config.experiment.agent;
    agent.templates = config.templates;

    std::optional<BackendBundle> bundle;
    if (config.scenarios == ScenarioMode::Compose) {
        result.pool = compose_template_pool(config.domain, config.seed);
    } else {
        bundle = make_backend(config.backend, config.domain, result.pool, config.templates, config.seed);
        result.pool = generate_pool(*bundle->backend, config.domain, config.max_generation_attempts,
                                    config.backend.concurrency, agent);
    }

    result.test_sets = generate_test_sets(result.pool, config.domain, config.test_sets);

    if (!bundle)
        bundle = make_backend(config.backend, config.domain, result.pool, config.templates);

    auto options = config.experiment;
    options.agent = agent;
    options.concurrency = config.backend.concurrency;
    const ExperimentInputs inputs{config.domain, result.pool, result.test_sets};
    result.coverage = run_coverage_experiment(*bundle->backend, inputs, options);
    result.extraction = run_extraction_experiment(*bundle->backend, inputs, result.coverage.records, options);
    result.prediction = run_prediction_experiment(*bundle->backend, inputs, options);

    result.metrics = result.coverage.metrics;
    merge_metrics(result.metrics, result.extraction.metrics);
    merge_metrics(result.metrics, result.prediction.metrics);

    std::filesystem::create_directories(config.out_dir);
    result.pool.save(config.out_dir / "scenarios.jsonl");
    save_test_sets(config.out_dir / "testsets.json", result.test_sets);
    emit_report(config.out_dir, {&result.coverage.records, &result.extraction.records, &result.prediction.records,
                                 result.metrics});
    return result;
}

} // namespace aamcbr
