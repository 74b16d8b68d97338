// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fail.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "aamcbr/pipeline.hpp"
#include "aamcbr/reasoner.hpp"
#include "aamcbr/util.hpp"
#include "oracles.hpp"

using namespace aamcbr;

namespace {

struct Verdict {
    bool pass;
    std::string detail;
};

struct Criterion {
    const char* name;
    double time_limit_s;
    std::function<Verdict()> check;
};

FactorSet from_mask(oracle::Mask m)
{
    FactorSet s;
    for (int i = 0; i < 32; ++i)
        if (m >> i & 1U)
            s.insert("f" + std::to_string(i));
    return s;
}

std::string fmt(const char* f, double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

Verdict worked_example()
{
    const std::vector<Case> cases = {{{"n4"}, Outcome::Zero}, {{"n3", "n4", "p2"}, Outcome::One}};
    const auto base = check_consistency(cases);
    const NewCase n{{"n4", "p5"}};
    const auto v0 = aacbr_outcome(base, Outcome::Zero, n);
    const auto v1 = aacbr_outcome(base, Outcome::One, n);
    const bool ok0 = v0.outcome == Outcome::Zero
        && v0.grounded.members == std::set<ArgumentId>{"default", "case:{n4}:0", "new"};
    const bool ok1 = v1.outcome == Outcome::Zero && v1.grounded.members == std::set<ArgumentId>{"case:{n4}:0", "new"};
    return {ok0 && ok1, std::string("default 0: ") + (ok0 ? "match" : "MISMATCH") + ", default 1: "
                            + (ok1 ? "match" : "MISMATCH")};
}

Verdict grounded_equivalence()
{
    std::mt19937_64 rng(20240601);
    const double probs[] = {0.1, 0.3, 0.5};
    int agree = 0;
    constexpr int trials = 1000;
    for (int t = 0; t < trials; ++t) {
        oracle::Graph g;
        g.n = 1 + static_cast<int>(rng() % 10);
        g.attackers.assign(g.n, 0);
        std::bernoulli_distribution edge(probs[t % 3]);
        AAFramework fw;
        for (int i = 0; i < g.n; ++i)
            fw.add_argument("a" + std::to_string(i));
        for (int a = 0; a < g.n; ++a)
            for (int b = 0; b < g.n; ++b)
                if (edge(rng)) {
                    g.attackers[b] |= oracle::Mask{1} << a;
                    fw.add_attack("a" + std::to_string(a), "a" + std::to_string(b));
                }
        const auto ext = grounded(fw);
        oracle::Mask m = 0;
        for (int i = 0; i < g.n; ++i)
            if (ext.contains("a" + std::to_string(i)))
                m |= oracle::Mask{1} << i;
        agree += m == oracle::brute_force_grounded(g) ? 1 : 0;
    }
    return {agree == trials, std::to_string(agree) + "/" + std::to_string(trials) + " frameworks agree"};
}

Verdict pruning_equivalence()
{
    std::mt19937_64 rng(77);
    int agree = 0;
    int reference_agree = 0;
    constexpr int trials = 1000;
    for (int t = 0; t < trials; ++t) {
        const int nf = 1 + static_cast<int>(rng() % 6);
        const auto ref = oracle::random_case_base(rng, nf, 8);
        std::vector<Case> cases;
        for (const auto& c : ref)
            cases.push_back({from_mask(c.factors), c.outcome ? Outcome::One : Outcome::Zero});
        const auto base = check_consistency(cases);
        const int d = static_cast<int>(rng() % 2);
        const auto n = static_cast<oracle::Mask>(rng() % (1U << nf));
        const NewCase nc{from_mask(n)};
        const auto dout = d ? Outcome::One : Outcome::Zero;
        const auto full = aacbr_outcome(base, dout, nc).outcome;
        agree += full == aacbr_outcome(relevant_cases(base, nc), dout, nc).outcome ? 1 : 0;
        reference_agree += static_cast<int>(full) == oracle::reference_outcome(ref, d, n) ? 1 : 0;
    }
    return {agree == trials && reference_agree == trials,
            std::to_string(agree) + "/" + std::to_string(trials) + " full vs pruned, " + std::to_string(reference_agree)
                + "/" + std::to_string(trials) + " vs reference"};
}

Verdict perfect_oracle()
{
    const auto domain = FactorDomain::credit();
    auto truth = std::make_shared<TruthTable>();
    auto oracle = std::make_shared<OracleBackend>(domain, truth);
    attach_template_writer(*oracle, 11);
    const auto pool = generate_pool(*oracle, domain, 10, 8);
    TestSetOptions ts;
    ts.seed = 11;
    const auto sets = generate_test_sets(pool, domain, ts);
    ExperimentOptions opt;
    opt.strategies = {Strategy::AamCbr};
    const auto run = run_prediction_experiment(*oracle, {domain, pool, sets}, opt);
    Rate all;
    for (const auto& r : run.records)
        all.add(r.correct);
    const auto acc = all.value().value_or(0.0);
    return {all.total == 500 && all.hits == all.total,
            std::to_string(all.hits) + "/" + std::to_string(all.total) + " correct, accuracy " + fmt("%.2f", acc)
                + ", pool " + std::to_string(pool.size()) + " scenarios"};
}

Verdict relevance_law()
{
    const auto domain = FactorDomain::credit();
    const auto pool = compose_template_pool(domain, 3);
    TestSetOptions ts;
    ts.count = 1000;
    ts.seed = 3;
    const auto sets = generate_test_sets(pool, domain, ts);

    bool pass = true;
    std::string detail;
    for (std::size_t n : {6, 8, 10}) {
        const double expected = relevance_probability(n, 10);
        const double mc = empirical_relevance_frequency(n, 10, 20000, 100 + n);
        Rate drawn;
        for (const auto& s : sets)
            for (const auto& nc : s.new_cases)
                if (nc.size() == n)
                    for (const auto& p : s.previous)
                        drawn.add(is_subset(p.subset, nc));
        const double td = drawn.value().value_or(-1.0);
        pass = pass && drawn.total >= 10000 && std::abs(mc - expected) <= 0.03 && std::abs(td - expected) <= 0.03;
        detail += "n=" + std::to_string(n) + ": expected " + fmt("%.4f", expected) + ", sampled " + fmt("%.4f", mc)
            + ", test sets " + fmt("%.4f", td) + " (" + std::to_string(drawn.total) + ")  ";
    }
    return {pass, detail};
}

std::map<std::size_t, Rate> aam_accuracy_by_size(const PipelineResult& r)
{
    std::map<std::size_t, Rate> out;
    for (const auto& [key, rate] : r.metrics.prediction_accuracy) {
        if (std::get<0>(key) != Strategy::AamCbr)
            continue;
        auto& acc = out[std::get<1>(key)];
        acc.hits += rate.hits;
        acc.total += rate.total;
    }
    return out;
}

PipelineConfig noisy_config(const std::filesystem::path& out)
{
    PipelineConfig c;
    c.backend.kind = BackendKind::Noisy;
    c.backend.noise = {0.15, 0.10, 0.0, 2024};
    c.backend.concurrency = 8;
    c.scenarios = ScenarioMode::Generate;
    c.seed = 2024;
    c.test_sets.seed = 2024;
    c.experiment.strategies = {Strategy::AamCbr};
    c.out_dir = out;
    return c;
}

Verdict noise_trend()
{
    const auto dir = std::filesystem::temp_directory_path() / "aamcbr_acceptance_trend";
    std::filesystem::remove_all(dir);
    const auto result = run_pipeline(noisy_config(dir));
    const auto by_n = aam_accuracy_by_size(result);
    bool monotone = true;
    std::optional<double> prev;
    std::string detail;
    for (const auto& [n, rate] : by_n) {
        const double v = rate.value().value_or(0.0);
        if (prev && v < *prev)
            monotone = false;
        prev = v;
        detail += "n=" + std::to_string(n) + " " + fmt("%.3f", v) + " (" + std::to_string(rate.total) + ")  ";
    }
    const bool endpoints = by_n.size() == 5 && by_n.at(10).value() > by_n.at(6).value();
    std::filesystem::remove_all(dir);
    return {monotone && endpoints, detail};
}

Verdict determinism()
{
    const auto base = std::filesystem::temp_directory_path() / "aamcbr_acceptance_determinism";
    std::filesystem::remove_all(base);
    auto c = noisy_config(base / "a");
    c.backend.noise.add_prob = 0.05;
    run_pipeline(c);
    c.out_dir = base / "b";
    c.backend.concurrency = 3;
    run_pipeline(c);
    const char* files[] = {"scenarios.jsonl", "testsets.json", "coverage.csv", "extraction.csv",
                           "predictions.csv", "metrics.json",  "tables.txt"};
    int same = 0;
    std::size_t bytes = 0;
    for (auto f : files) {
        const auto a = read_text_file(base / "a" / f);
        const auto b = read_text_file(base / "b" / f);
        same += a == b ? 1 : 0;
        bytes += a.size();
    }
    std::filesystem::remove_all(base);
    return {same == 7, std::to_string(same) + "/7 files byte-identical (" + std::to_string(bytes)
                           + " bytes; concurrency 8 vs 3)"};
}

Verdict extraction_noise_law()
{
    constexpr double q = 0.2;
    const auto domain = FactorDomain::credit();
    const auto pool = compose_template_pool(domain, 8);
    TestSetOptions ts;
    ts.count = 100;
    ts.seed = 8;
    const auto sets = generate_test_sets(pool, domain, ts);
    auto truth = std::make_shared<TruthTable>();
    pool.register_truth(*truth);
    auto oracle = std::make_shared<OracleBackend>(domain, truth);
    NoisyOracleBackend noisy(oracle, {0.0, q, 0.0, 8});

    ExperimentOptions opt;
    opt.strategies = {Strategy::AamCbr};
    const ExperimentInputs in{domain, pool, sets};
    const auto cov = run_coverage_experiment(noisy, in, opt);
    const auto ext = run_extraction_experiment(noisy, in, cov.records, opt);

    double expected = 0.0;
    double variance = 0.0;
    std::size_t observed = 0;
    std::size_t pairs = 0;
    for (const auto& r : ext.records) {
        const double p = std::pow(1.0 - q, static_cast<double>(r.truth.size()));
        expected += p;
        variance += p * (1.0 - p);
        observed += r.exact_match ? 1 : 0;
        ++pairs;
    }
    const double sigma = std::sqrt(variance);
    const double z = sigma > 0 ? (static_cast<double>(observed) - expected) / sigma : 0.0;
    // Two-sided 99% band.
    const bool pass = pairs >= 1000 && std::abs(z) <= 2.576;
    return {pass, std::to_string(observed) + "/" + std::to_string(pairs) + " exact, expected " + fmt("%.1f", expected)
                      + ", z = " + fmt("%.2f", z)};
}

} // namespace

int main()
{
    const std::vector<Criterion> criteria = {
        {"worked-example goldens", 1.0, worked_example},
        {"grounded semantics vs exhaustive oracle", 30.0, grounded_equivalence},
        {"irrelevant-case pruning equivalence", 30.0, pruning_equivalence},
        {"perfect-oracle end-to-end accuracy", 120.0, perfect_oracle},
        {"relevance-probability law", 60.0, relevance_law},
        {"noise trend over new-case size", 600.0, noise_trend},
        {"pipeline determinism", 600.0, determinism},
        {"extraction noise law", 600.0, extraction_noise_law},
    };

    int failed = 0;
    int index = 0;
    for (const auto& c : criteria) {
        ++index;
        const auto start = std::chrono::steady_clock::now();
        Verdict v{false, ""};
        try {
            v = c.check();
        } catch (const std::exception& e) {
            v = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        const bool in_time = secs <= c.time_limit_s;
        const bool pass = v.pass && in_time;
        failed += pass ? 0 : 1;
        std::printf("%s [%d] %s: %s (%.2f s, limit %.0f s)%s\n", pass ? "PASS" : "FAIL", index, c.name,
                    v.detail.c_str(), secs, c.time_limit_s, in_time ? "" : " TIME LIMIT EXCEEDED");
        std::fflush(stdout);
    }
    std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
