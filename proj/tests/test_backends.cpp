#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <atomic>
#include <chrono>
#include <cmath>
#include <thread>

#include "aamcbr/agents.hpp"
#include "aamcbr/backends.hpp"
#include "aamcbr/util.hpp"

using namespace aamcbr;

namespace {

std::string coverage_prompt(const FactorDomain& d, const FactorSet& listed, const std::string& text)
{
    return render(PromptTemplates::builtin().determine_coverage,
                  {{"factor_list", format_sentence_list(d.sentences(listed))}, {"case_description", text}});
}

std::string extraction_prompt(const FactorDomain& d, const FactorSet& candidates, const std::string& text)
{
    return render(PromptTemplates::builtin().extract_factors,
                  {{"description", text}, {"all_factor_sentences", format_sentence_list(d.sentences(candidates))}});
}

struct Fixture {
    FactorDomain domain = FactorDomain::credit();
    std::shared_ptr<TruthTable> truth = std::make_shared<TruthTable>();
    std::shared_ptr<OracleBackend> oracle;

    Fixture()
    {
        truth->add("case A", {"n4"});
        truth->add("case B", {"n3", "n4", "p2"});
        oracle = std::make_shared<OracleBackend>(domain, truth);
    }
};

class CountingBackend : public Backend {
public:
    std::string complete(const std::string& prompt) override
    {
        const int now = ++in_flight;
        int seen = peak.load();
        while (now > seen && !peak.compare_exchange_weak(seen, now)) {
        }
        std::this_thread::sleep_for(std::chrono::milliseconds(2));
        --in_flight;
        ++calls;
        return "echo:" + prompt;
    }
    BackendIdentity identity() const override { return {"counting", "v1"}; }

    std::atomic<int> in_flight{0};
    std::atomic<int> peak{0};
    std::atomic<int> calls{0};
};

std::filesystem::path fresh_dir(const std::string& name)
{
    auto dir = std::filesystem::temp_directory_path() / name;
    std::filesystem::remove_all(dir);
    return dir;
}

} // namespace

TEST_CASE("truth table rejects rebinding a text")
{
    TruthTable t;
    t.add("x", {"a"});
    CHECK_NOTHROW(t.add("x", {"a"}));
    CHECK_THROWS_AS(t.add("x", {"b"}), std::invalid_argument);
    CHECK(t.size() == 1);
}

TEST_CASE("oracle answers coverage by subset inclusion")
{
    Fixture f;
    CHECK(f.oracle->complete(coverage_prompt(f.domain, {"n4", "p5"}, "case A")) == "YES");
    CHECK(f.oracle->complete(coverage_prompt(f.domain, {"n4", "p5"}, "case B")) == "NO");
    CHECK(f.oracle->complete(coverage_prompt(f.domain, {"n3", "n4", "p2"}, "case B")) == "YES");
}

TEST_CASE("oracle extraction returns truth restricted to candidates")
{
    Fixture f;
    const auto answer = f.oracle->complete(extraction_prompt(f.domain, {"n4", "p2", "p5"}, "case B"));
    CHECK(answer == R"(["long and stable employment history","limited credit history"])");
}

TEST_CASE("oracle rejects unknown prompts and scenarios")
{
    Fixture f;
    CHECK_THROWS_AS(f.oracle->complete("hello"), UnrecognizedPromptShape);
    CHECK_THROWS_AS(f.oracle->complete(coverage_prompt(f.domain, {"n4"}, "case Z")), UnknownScenario);
    // Generation prompts need a writer.
    const auto gen = render(PromptTemplates::builtin().generate_scenario,
                            {{"included_factor_list", R"(["young age"])"}, {"excluded_factor_list", "[]"}});
    CHECK_THROWS_AS(f.oracle->complete(gen), UnrecognizedPromptShape);
    f.oracle->enable_generation([](const FactorSet& s, std::uint64_t attempt) {
        return "story about " + to_string(s) + " #" + std::to_string(attempt);
    });
    CHECK(f.oracle->complete(gen) == "story about {n5} #0");
    CHECK(f.oracle->complete(gen) == "story about {n5} #1");
    CHECK(f.truth->find("story about {n5} #1") == FactorSet{"n5"});
}

TEST_CASE("noise-free noisy oracle is the oracle")
{
    Fixture f;
    NoisyOracleBackend noisy(f.oracle, {0.0, 0.0, 0.0, 3});
    for (const auto& text : {"case A", "case B"}) {
        for (const FactorSet& listed : {FactorSet{"n4"}, FactorSet{"n3", "n4", "p2", "p5"}, FactorSet{"p1"}}) {
            CHECK(noisy.complete(coverage_prompt(f.domain, listed, text))
                  == f.oracle->complete(coverage_prompt(f.domain, listed, text)));
            CHECK(noisy.complete(extraction_prompt(f.domain, listed, text))
                  == f.oracle->complete(extraction_prompt(f.domain, listed, text)));
        }
    }
    CHECK(noisy.identity().key() == "noisy-oracle/flip=0,omit=0,add=0,seed=3");
}

TEST_CASE("noisy answers are a function of the prompt")
{
    Fixture f;
    NoisyOracleBackend noisy(f.oracle, {0.5, 0.5, 0.5, 11});
    const auto p = extraction_prompt(f.domain, {"n3", "n4", "p2", "p5"}, "case B");
    const auto first = noisy.complete(p);
    for (int i = 0; i < 20; ++i)
        CHECK(noisy.complete(p) == first);
}

TEST_CASE("coverage flip rate matches the configured probability")
{
    const auto domain = FactorDomain::credit();
    auto truth = std::make_shared<TruthTable>();
    constexpr int kCalls = 10000;
    for (int i = 0; i < kCalls; ++i)
        truth->add("scenario " + std::to_string(i), {"n4"});
    auto oracle = std::make_shared<OracleBackend>(domain, truth);
    NoisyOracleBackend noisy(oracle, {0.15, 0.0, 0.0, 42});
    int flipped = 0;
    for (int i = 0; i < kCalls; ++i)
        flipped += noisy.complete(coverage_prompt(domain, {"n4", "p1"}, "scenario " + std::to_string(i))) == "NO";
    const double rate = static_cast<double>(flipped) / kCalls;
    CHECK(std::abs(rate - 0.15) <= 0.02);
}

TEST_CASE("per-factor omission and addition rates")
{
    const auto domain = FactorDomain::credit();
    auto truth = std::make_shared<TruthTable>();
    constexpr int kCalls = 4000;
    for (int i = 0; i < kCalls; ++i)
        truth->add("s" + std::to_string(i), {"n3", "n4"});
    auto oracle = std::make_shared<OracleBackend>(domain, truth);
    NoisyOracleBackend noisy(oracle, {0.0, 0.2, 0.1, 8});
    int kept = 0;
    int added = 0;
    for (int i = 0; i < kCalls; ++i) {
        const auto answer = noisy.complete(extraction_prompt(domain, {"n3", "n4", "p5"}, "s" + std::to_string(i)));
        const auto list = *parse_sentence_list(answer);
        for (const auto& s : list) {
            kept += s != "positive relationship with the bank";
            added += s == "positive relationship with the bank";
        }
    }
    CHECK(std::abs(kept / (2.0 * kCalls) - 0.8) <= 0.02);
    CHECK(std::abs(added / static_cast<double>(kCalls) - 0.1) <= 0.02);
}

TEST_CASE("noise probabilities are validated")
{
    Fixture f;
    CHECK_THROWS_AS(NoisyOracleBackend(f.oracle, {1.5, 0, 0, 0}), std::invalid_argument);
}

TEST_CASE("sha256 known vectors")
{
    CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("cache replays byte-identical responses")
{
    const auto dir = fresh_dir("aamcbr_cache_test");
    auto inner = std::make_shared<CountingBackend>();
    CachingBackend cache(inner, dir);
    const std::string prompt = "line one\nline two \xe2\x9c\x93  ";
    const auto first = cache.complete(prompt);
    const auto second = cache.complete(prompt);
    CHECK(first == second);
    CHECK(inner->calls == 1);
    CHECK(cache.hits() == 1);
    CHECK(cache.misses() == 1);
    CHECK(read_text_file(cache.entry_path(prompt)) == first);
    CHECK(cache.entry_path(prompt).parent_path().filename() == "counting_v1");

    CachingBackend reopened(inner, dir);
    CHECK(reopened.complete(prompt) == first);
    CHECK(inner->calls == 1);
    std::filesystem::remove_all(dir);
}

TEST_CASE("throttle caps in-flight calls")
{
    auto inner = std::make_shared<CountingBackend>();
    ThrottledBackend throttled(inner, 3);
    parallel_for(60, 16, [&](std::size_t i) { throttled.complete(std::to_string(i)); });
    CHECK(inner->calls == 60);
    CHECK(inner->peak <= 3);
}

TEST_CASE("parallel_for rethrows the first failure")
{
    CHECK_THROWS_AS(parallel_for(10, 4,
                                 [](std::size_t i) {
                                     if (i == 7)
                                         throw std::runtime_error("boom");
                                 }),
                    std::runtime_error);
    std::atomic<int> sum{0};
    parallel_for(100, 1, [&](std::size_t i) { sum += static_cast<int>(i); });
    CHECK(sum == 4950);
}

TEST_CASE("rng draws are reproducible")
{
    Rng a(5);
    Rng b(5);
    for (int i = 0; i < 100; ++i)
        CHECK(a.next() == b.next());
    Rng c(1);
    for (int i = 0; i < 1000; ++i) {
        CHECK(c.below(7) < 7);
        const double u = c.uniform01();
        CHECK((u >= 0.0 && u < 1.0));
    }
}
