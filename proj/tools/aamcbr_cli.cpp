// Command-line front end: data generation, experiments, reports and a solver.

#include <CLI11.hpp>

#include <iostream>

#include "aamcbr/pipeline.hpp"
#include "aamcbr/reasoner.hpp"
#include "aamcbr/util.hpp"

using namespace aamcbr;

namespace {

struct Options {
    std::string backend = "oracle";
    double noise_flip = 0.0;
    double noise_omit = 0.0;
    double noise_add = 0.0;
    std::uint64_t seed = 2024;
    std::size_t testsets = 50;
    std::string defaults = "both";
    std::size_t concurrency = 8;
    std::string out = "out";
    std::string in;
    std::string cache;
    std::vector<std::string> strategies;
    std::string endpoint = HttpConfig{}.endpoint;
    std::string model = HttpConfig{}.model;
    std::string api_key_env = HttpConfig{}.api_key_env;
    double temperature = 0.0;
    int max_tokens = 0;
    int http_retries = HttpConfig{}.max_retries;
    int timeout_s = 60;
    std::string request_log;
    std::string domain;
    std::string prompts;
    std::string scenario_mode = "generate";
    int max_attempts = 10;
    int agent_retries = 3;
    bool factorized_previous = false;
};

std::filesystem::path input_dir(const Options& o) { return o.in.empty() ? o.out : o.in; }

FactorDomain load_domain(const Options& o)
{
    return o.domain.empty() ? FactorDomain::credit() : FactorDomain::load(o.domain);
}

PromptTemplates load_templates(const Options& o)
{
    return o.prompts.empty() ? PromptTemplates::builtin() : PromptTemplates::load_dir(o.prompts);
}

std::vector<Outcome> parse_defaults(const std::string& s)
{
    if (s == "both")
        return {Outcome::Zero, Outcome::One};
    return {parse_outcome(s)};
}

BackendConfig backend_config(const Options& o)
{
    BackendConfig c;
    c.kind = parse_backend_kind(o.backend);
    c.noise = {o.noise_flip, o.noise_omit, o.noise_add, o.seed};
    c.http.endpoint = o.endpoint;
    c.http.model = o.model;
    c.http.api_key_env = o.api_key_env;
    c.http.temperature = o.temperature;
    if (o.max_tokens > 0)
        c.http.max_tokens = o.max_tokens;
    c.http.max_retries = o.http_retries;
    c.http.timeout = std::chrono::seconds(o.timeout_s);
    c.http.request_log = o.request_log;
    c.cache_dir = o.cache;
    c.concurrency = o.concurrency;
    return c;
}

ExperimentOptions experiment_options(const Options& o, BackendKind kind)
{
    ExperimentOptions e;
    e.agent.max_retries = o.agent_retries;
    e.agent.templates = load_templates(o);
    e.concurrency = o.concurrency;
    e.defaults = parse_defaults(o.defaults);
    e.single_prompt_factorized = o.factorized_previous;
    e.strategies.clear();
    if (o.strategies.empty()) {
        // The oracle cannot answer free-form prediction prompts.
        if (kind == BackendKind::Http)
            e.strategies = {Strategy::SingleNotInstructed, Strategy::SingleInstructed, Strategy::AamCbr};
        else
            e.strategies = {Strategy::AamCbr};
    } else {
        for (const auto& s : o.strategies)
            e.strategies.push_back(parse_strategy(s));
    }
    return e;
}

void report_cache(const BackendBundle& b)
{
    if (b.cache)
        std::cerr << "cache: " << b.cache->hits() << " hits, " << b.cache->misses() << " misses\n";
}

int cmd_gen_scenarios(const Options& o)
{
    const auto domain = load_domain(o);
    const auto templates = load_templates(o);
    ScenarioPool pool;
    if (o.scenario_mode == "compose") {
        pool = compose_template_pool(domain, o.seed);
    } else if (o.scenario_mode == "generate") {
        const auto bundle = make_backend(backend_config(o), domain, {}, templates, o.seed);
        AgentOptions agent;
        agent.templates = templates;
        agent.max_retries = o.agent_retries;
        pool = generate_pool(*bundle.backend, domain, o.max_attempts, o.concurrency, agent);
        report_cache(bundle);
    } else {
        throw CLI::ValidationError("--scenario-mode", "expected compose or generate");
    }
    const std::filesystem::path out = o.out;
    std::filesystem::create_directories(out);
    pool.save(out / "scenarios.jsonl");
    std::cout << "scenarios: " << pool.size() << " written, " << pool.skipped().size() << " skipped -> "
              << (out / "scenarios.jsonl").string() << "\n";
    for (const auto& s : pool.skipped())
        std::cout << "  skipped " << to_string(s.subset) << " after " << s.attempts << " attempts\n";
    return 0;
}

int cmd_gen_testsets(const Options& o)
{
    const auto domain = load_domain(o);
    const auto pool = ScenarioPool::load(input_dir(o) / "scenarios.jsonl");
    TestSetOptions t;
    t.count = o.testsets;
    t.seed = o.seed;
    const auto sets = generate_test_sets(pool, domain, t);
    const std::filesystem::path out = o.out;
    std::filesystem::create_directories(out);
    save_test_sets(out / "testsets.json", sets);
    std::cout << "test sets: " << sets.size() << " -> " << (out / "testsets.json").string() << "\n";
    return 0;
}

struct LoadedInputs {
    FactorDomain domain;
    ScenarioPool pool;
    std::vector<TestSet> sets;
};

LoadedInputs load_inputs(const Options& o)
{
    const auto dir = input_dir(o);
    return {load_domain(o), ScenarioPool::load(dir / "scenarios.jsonl"), load_test_sets(dir / "testsets.json")};
}

void print_rates(const char* title, const std::map<std::size_t, Rate>& rates)
{
    std::cout << title << ":";
    for (const auto& [n, r] : rates) {
        const auto v = r.value();
        std::cout << "  n=" << n << " " << (v ? std::to_string(*v).substr(0, 5) : "-") << " (" << r.hits << "/"
                  << r.total << ")";
    }
    std::cout << "\n";
}

int cmd_run_coverage(const Options& o)
{
    const auto in = load_inputs(o);
    const auto bundle = make_backend(backend_config(o), in.domain, in.pool, load_templates(o));
    const auto run = run_coverage_experiment(*bundle.backend, {in.domain, in.pool, in.sets},
                                             experiment_options(o, parse_backend_kind(o.backend)));
    std::filesystem::create_directories(o.out);
    write_file_atomic(std::filesystem::path(o.out) / "coverage.csv", coverage_csv(run.records));
    print_rates("coverage accuracy", run.metrics.coverage_accuracy);
    print_rates("coverage precision", run.metrics.coverage_precision);
    report_cache(bundle);
    return 0;
}

int cmd_run_extraction(const Options& o)
{
    const auto in = load_inputs(o);
    const auto coverage = parse_coverage_csv(read_text_file(input_dir(o) / "coverage.csv"));
    const auto bundle = make_backend(backend_config(o), in.domain, in.pool, load_templates(o));
    const auto run = run_extraction_experiment(*bundle.backend, {in.domain, in.pool, in.sets}, coverage,
                                               experiment_options(o, parse_backend_kind(o.backend)));
    std::filesystem::create_directories(o.out);
    write_file_atomic(std::filesystem::path(o.out) / "extraction.csv", extraction_csv(run.records));
    print_rates("extraction accuracy", run.metrics.extraction_accuracy);
    print_rates("extraction accuracy given relevance", run.metrics.extraction_accuracy_given_relevance);
    report_cache(bundle);
    return 0;
}

int cmd_run_predict(const Options& o)
{
    const auto in = load_inputs(o);
    const auto bundle = make_backend(backend_config(o), in.domain, in.pool, load_templates(o));
    const auto run = run_prediction_experiment(*bundle.backend, {in.domain, in.pool, in.sets},
                                               experiment_options(o, parse_backend_kind(o.backend)));
    std::filesystem::create_directories(o.out);
    write_file_atomic(std::filesystem::path(o.out) / "predictions.csv", prediction_csv(run.records));
    std::cout << render_tables(run.metrics);
    report_cache(bundle);
    return 0;
}

std::vector<CoverageRecord> coverage_if_present(const std::filesystem::path& p)
{
    return std::filesystem::exists(p) ? parse_coverage_csv(read_text_file(p)) : std::vector<CoverageRecord>{};
}

int cmd_report(const Options& o)
{
    const auto dir = input_dir(o);
    const auto coverage = coverage_if_present(dir / "coverage.csv");
    const auto extraction_path = dir / "extraction.csv";
    const auto prediction_path = dir / "predictions.csv";
    const auto extraction = std::filesystem::exists(extraction_path)
        ? parse_extraction_csv(read_text_file(extraction_path))
        : std::vector<ExtractionRecord>{};
    const auto prediction = std::filesystem::exists(prediction_path)
        ? parse_prediction_csv(read_text_file(prediction_path))
        : std::vector<PredictionRecord>{};
    const auto metrics = metrics_from_records(coverage, extraction, prediction);
    emit_report(o.out, {&coverage, &extraction, &prediction, metrics});
    std::cout << render_tables(metrics);
    return 0;
}

int cmd_pipeline(const Options& o)
{
    PipelineConfig c;
    c.domain = load_domain(o);
    c.templates = load_templates(o);
    c.backend = backend_config(o);
    c.scenarios = o.scenario_mode == "compose" ? ScenarioMode::Compose : ScenarioMode::Generate;
    c.max_generation_attempts = o.max_attempts;
    c.seed = o.seed;
    c.test_sets.count = o.testsets;
    c.test_sets.seed = o.seed;
    c.experiment = experiment_options(o, c.backend.kind);
    c.out_dir = o.out;
    const auto result = run_pipeline(c);
    std::cout << render_tables(result.metrics);
    return 0;
}

struct SolveOptions {
    std::string cases;
    std::string format = "json";
};

int cmd_solve(const SolveOptions& s)
{
    const auto doc = nlohmann::json::parse(read_text_file(s.cases));
    std::vector<Case> cases;
    for (const auto& c : doc.at("cases"))
        cases.push_back({factors_from_json(c.at("factors")), parse_outcome(c.at("outcome").get<std::string>())});
    const auto base = check_consistency(cases);
    const auto d = parse_outcome(doc.at("default").get<std::string>());
    const NewCase n{factors_from_json(doc.at("new"))};
    if (s.format == "json") {
        std::cout << to_json(aacbr_outcome(base, d, n)).dump(2) << "\n";
    } else if (s.format == "dot") {
        const auto fw = build_framework(base, d, n);
        std::cout << to_dot(fw, evaluate(fw, d));
    } else if (s.format == "tree") {
        std::cout << render_text(dispute_tree(base, d, n));
    } else if (s.format == "tree-json") {
        std::cout << to_json(dispute_tree(base, d, n).root).dump(2) << "\n";
    } else {
        throw CLI::ValidationError("--format", "expected json, dot, tree or tree-json");
    }
    return 0;
}

struct RelevanceOptions {
    std::size_t domain_size = 10;
    std::size_t samples = 10000;
};

int cmd_relevance(const Options& o, const RelevanceOptions& r)
{
    std::cout << "n,predicted,empirical\n";
    for (std::size_t n = 0; n <= r.domain_size; ++n) {
        const auto p = relevance_probability(n, r.domain_size);
        const auto e = empirical_relevance_frequency(n, r.domain_size, r.samples, o.seed + n);
        std::cout << n << "," << p << "," << e << "\n";
    }
    return 0;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Argumentative case-based reasoning with language-model agents"};
    app.require_subcommand(1);
    app.fallthrough();
    app.set_config("--config", "", "TOML key/value file mirroring the command-line flags");

    Options o;
    app.add_option("--backend", o.backend, "oracle, noisy or http")
        ->check(CLI::IsMember({"oracle", "noisy", "http"}))
        ->capture_default_str();
    app.add_option("--noise-flip", o.noise_flip, "Coverage flip probability (noisy backend)")
        ->check(CLI::Range(0.0, 1.0));
    app.add_option("--noise-omit", o.noise_omit, "Per-factor omission probability (noisy backend)")
        ->check(CLI::Range(0.0, 1.0));
    app.add_option("--noise-add", o.noise_add, "Per-factor spurious inclusion probability (noisy backend)")
        ->check(CLI::Range(0.0, 1.0));
    app.add_option("--seed", o.seed, "Seed for scenarios, test sets and noise")->capture_default_str();
    app.add_option("--testsets", o.testsets, "Number of test sets")->capture_default_str();
    app.add_option("--defaults", o.defaults, "Default outcomes to evaluate")
        ->check(CLI::IsMember({"0", "1", "both"}))
        ->capture_default_str();
    app.add_option("--concurrency", o.concurrency, "Maximum in-flight backend calls")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    app.add_option("--out", o.out, "Output directory")->capture_default_str();
    app.add_option("--in", o.in, "Input directory (defaults to --out)");
    app.add_option("--cache", o.cache, "Response cache directory");
    app.add_option("--strategies", o.strategies, "aam-cbr, single-not-instructed, single-instructed")
        ->check(CLI::IsMember({"aam-cbr", "single-not-instructed", "single-instructed"}))
        ->delimiter(',');
    app.add_option("--endpoint", o.endpoint, "Chat-completions URL")->capture_default_str();
    app.add_option("--model", o.model, "Model name")->capture_default_str();
    app.add_option("--api-key-env", o.api_key_env, "Environment variable holding the API key")->capture_default_str();
    app.add_option("--temperature", o.temperature, "Sampling temperature")->capture_default_str();
    app.add_option("--max-tokens", o.max_tokens, "Completion token limit (0 = unset)");
    app.add_option("--http-retries", o.http_retries, "Retries on 429/5xx/transport errors")->capture_default_str();
    app.add_option("--timeout", o.timeout_s, "Per-request timeout in seconds")->capture_default_str();
    app.add_option("--request-log", o.request_log, "JSON-lines request log");
    app.add_option("--domain", o.domain, "Factor domain JSON (defaults to the credit domain)");
    app.add_option("--prompts", o.prompts, "Directory of prompt template overrides");
    app.add_option("--scenario-mode", o.scenario_mode, "compose (phrase bank) or generate (backend)")
        ->check(CLI::IsMember({"compose", "generate"}))
        ->capture_default_str();
    app.add_option("--max-attempts", o.max_attempts, "Scenario generation attempts per subset")->capture_default_str();
    app.add_option("--agent-retries", o.agent_retries, "Re-asks after an unparseable agent answer")
        ->capture_default_str();
    app.add_flag("--factorized-previous", o.factorized_previous,
                 "Give SinglePrompt baselines factorized previous cases");

    auto* gen_scenarios = app.add_subcommand("gen-scenarios", "Build the scenario pool (scenarios.jsonl)");
    auto* gen_testsets = app.add_subcommand("gen-testsets", "Draw test sets from the pool (testsets.json)");
    auto* run_coverage = app.add_subcommand("run-coverage", "Case relevance experiment (coverage.csv)");
    auto* run_extraction = app.add_subcommand("run-extraction", "Factor extraction experiment (extraction.csv)");
    auto* run_predict = app.add_subcommand("run-predict", "Outcome prediction experiment (predictions.csv)");
    auto* report = app.add_subcommand("report", "Aggregate CSVs into metrics.json and tables.txt");
    auto* pipeline = app.add_subcommand("pipeline", "All of the above in one run");

    SolveOptions solve_opts;
    auto* solve = app.add_subcommand("solve", "Evaluate a case base on a new case");
    solve->add_option("cases", solve_opts.cases, "JSON with default, cases and new")->required()->check(
        CLI::ExistingFile);
    solve->add_option("--format", solve_opts.format, "json, dot, tree or tree-json")->capture_default_str();

    RelevanceOptions rel;
    auto* relevance = app.add_subcommand("relevance-prob", "Relevance probability per new case size");
    relevance->add_option("--domain-size", rel.domain_size)->capture_default_str();
    relevance->add_option("--samples", rel.samples)->capture_default_str();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*gen_scenarios)
            return cmd_gen_scenarios(o);
        if (*gen_testsets)
            return cmd_gen_testsets(o);
        if (*run_coverage)
            return cmd_run_coverage(o);
        if (*run_extraction)
            return cmd_run_extraction(o);
        if (*run_predict)
            return cmd_run_predict(o);
        if (*report)
            return cmd_report(o);
        if (*pipeline)
            return cmd_pipeline(o);
        if (*solve)
            return cmd_solve(solve_opts);
        if (*relevance)
            return cmd_relevance(o, rel);
    } catch (const CLI::Error& e) {
        return app.exit(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
