#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <functional>
#include <set>

#include "aamcbr/datagen.hpp"

using namespace aamcbr;

namespace {

class ScriptedBackend : public Backend {
public:
    explicit ScriptedBackend(std::function<std::string(const std::string&)> fn) : fn_(std::move(fn)) {}
    std::string complete(const std::string& prompt) override { return fn_(prompt); }
    BackendIdentity identity() const override { return {"scripted", "test"}; }

private:
    std::function<std::string(const std::string&)> fn_;
};

bool is_generation(const std::string& p) { return p.find("generate an example") != std::string::npos; }

} // namespace

TEST_CASE("all non-empty subsets of the credit domain")
{
    const auto subsets = nonempty_subsets(FactorDomain::credit());
    CHECK(subsets.size() == 1023);
    CHECK(std::set<FactorSet>(subsets.begin(), subsets.end()).size() == 1023);
    CHECK(subsets.front() == FactorSet{"p1"});
    CHECK(subsets.back().size() == 10);
}

TEST_CASE("template scenarios are deterministic and seed-dependent")
{
    const auto d = FactorDomain::credit();
    const auto a = compose_template_scenario(d, {"p1", "n2"}, 1);
    const auto b = compose_template_scenario(d, {"p1", "n2"}, 1);
    CHECK(a.description == b.description);
    CHECK(a.source == ScenarioSource::TemplateComposed);
    bool differs = false;
    for (std::uint64_t s = 2; s < 10; ++s)
        differs = differs || compose_template_scenario(d, {"p1", "n2"}, s).description != a.description;
    CHECK(differs);
    CHECK_THROWS_AS(compose_template_scenario(d, {}, 1), std::invalid_argument);
}

TEST_CASE("template scenarios avoid the factor wording and work for custom domains")
{
    const auto d = FactorDomain::credit();
    for (const auto& f : d.factors()) {
        const auto s = compose_template_scenario(d, {f.id}, 3);
        CHECK(s.description.find(f.sentence) == std::string::npos);
    }
    const FactorDomain custom({{"a", "owns a boat", Polarity::Positive}, {"b", "plays chess", Polarity::Negative}});
    const auto s = compose_template_scenario(custom, {"a", "b"}, 3);
    CHECK(s.description.find("owns a boat") != std::string::npos);
    CHECK(s.description.find("plays chess") != std::string::npos);
}

TEST_CASE("template pool covers every subset with distinct texts")
{
    const auto pool = compose_template_pool(FactorDomain::credit(), 2024);
    CHECK(pool.size() == 1023);
    TruthTable t;
    CHECK_NOTHROW(pool.register_truth(t));
    CHECK(t.size() == 1023);
}

TEST_CASE("pool JSONL round trip")
{
    const auto pool = compose_template_pool(FactorDomain::credit(), 5);
    const auto back = ScenarioPool::from_jsonl(pool.to_jsonl());
    CHECK(back.to_jsonl() == pool.to_jsonl());
    CHECK(back.at({"p1", "n2"}).description == pool.at({"p1", "n2"}).description);
    CHECK_THROWS_AS(pool.at({}), std::out_of_range);
}

TEST_CASE("generation succeeds first time against the oracle")
{
    const auto d = FactorDomain::credit();
    auto oracle = std::make_shared<OracleBackend>(d, std::make_shared<TruthTable>());
    attach_template_writer(*oracle, 77);
    const auto r = generate_scenario(*oracle, d, {"p1", "n2"});
    REQUIRE(std::holds_alternative<Scenario>(r));
    const auto& s = std::get<Scenario>(r);
    CHECK(s.attempts == 1);
    CHECK(s.source == ScenarioSource::LlmGenerated);
    CHECK(oracle->truth_table().find(s.description) == FactorSet{"p1", "n2"});
}

TEST_CASE("generation regenerates until verification passes")
{
    const auto d = FactorDomain::credit();
    int generated = 0;
    std::string last;
    ScriptedBackend b([&](const std::string& p) -> std::string {
        if (is_generation(p)) {
            last = "draft " + std::to_string(++generated);
            return last;
        }
        // The first draft only mentions p1; the second mentions both.
        if (last == "draft 1")
            return R"(["low debt-to-income ratio"])";
        return R"(["low debt-to-income ratio","missed or late payments history"])";
    });
    const auto r = generate_scenario(b, d, {"p1", "n2"});
    REQUIRE(std::holds_alternative<Scenario>(r));
    CHECK(std::get<Scenario>(r).attempts == 2);
    CHECK(std::get<Scenario>(r).description == "draft 2");
}

TEST_CASE("generation gives up after the attempt budget")
{
    const auto d = FactorDomain::credit();
    int generations = 0;
    ScriptedBackend b([&](const std::string& p) -> std::string {
        if (is_generation(p)) {
            ++generations;
            return "wrong";
        }
        return "[]";
    });
    const auto r = generate_scenario(b, d, {"p1"});
    REQUIRE(std::holds_alternative<SkippedSubset>(r));
    CHECK(std::get<SkippedSubset>(r).attempts == 10);
    CHECK(generations == 10);
    CHECK_THROWS_AS(generate_scenario(b, d, {}), std::invalid_argument);
}

TEST_CASE("generated pool through the oracle covers every subset")
{
    const auto d = FactorDomain::credit();
    auto oracle = std::make_shared<OracleBackend>(d, std::make_shared<TruthTable>());
    attach_template_writer(*oracle, 1);
    const auto pool = generate_pool(*oracle, d, 10, 4);
    CHECK(pool.size() == 1023);
    CHECK(pool.skipped().empty());
}

TEST_CASE("forced outcomes follow polarity")
{
    const auto d = FactorDomain::credit();
    CHECK(forced_outcome(d, {"n1", "n4"}) == Outcome::Zero);
    CHECK(forced_outcome(d, {"p1", "p4"}) == Outcome::One);
    CHECK_FALSE(forced_outcome(d, {"p1", "n4"}).has_value());
}

TEST_CASE("test sets have the expected shape")
{
    const auto d = FactorDomain::credit();
    const auto pool = compose_template_pool(d, 1);
    TestSetOptions opt;
    opt.seed = 99;
    const auto sets = generate_test_sets(pool, d, opt);
    REQUIRE(sets.size() == 50);
    for (const auto& ts : sets) {
        REQUIRE(ts.previous.size() == 10);
        std::set<FactorSet> distinct;
        for (const auto& p : ts.previous) {
            distinct.insert(p.subset);
            if (auto f = forced_outcome(d, p.subset))
                CHECK(p.outcome == *f);
        }
        CHECK(distinct.size() == 10);
        REQUIRE(ts.new_cases.size() == 5);
        for (std::size_t k = 0; k < 5; ++k)
            CHECK(ts.new_cases[k].size() == 6 + k);
        CHECK_NOTHROW(truth_case_base(ts));
        CHECK(previous_texts(ts, pool).size() == 10);
    }
}

TEST_CASE("mixed-polarity outcomes are not all the same")
{
    const auto d = FactorDomain::credit();
    const auto pool = compose_template_pool(d, 1);
    const auto sets = generate_test_sets(pool, d, {});
    int ones = 0;
    int mixed = 0;
    for (const auto& ts : sets)
        for (const auto& p : ts.previous)
            if (!forced_outcome(d, p.subset)) {
                ++mixed;
                ones += p.outcome == Outcome::One ? 1 : 0;
            }
    CHECK(mixed > 300);
    CHECK(ones > mixed / 3);
    CHECK(ones < 2 * mixed / 3);
}

TEST_CASE("test sets are deterministic and round-trip through JSON")
{
    const auto d = FactorDomain::credit();
    const auto pool = compose_template_pool(d, 1);
    TestSetOptions opt;
    opt.seed = 5;
    const auto a = generate_test_sets(pool, d, opt);
    const auto b = generate_test_sets(pool, d, opt);
    CHECK(nlohmann::json(a.size()) == nlohmann::json(b.size()));
    for (std::size_t i = 0; i < a.size(); ++i)
        CHECK(to_json(a[i]) == to_json(b[i]));
    opt.seed = 6;
    CHECK(to_json(generate_test_sets(pool, d, opt)[0]) != to_json(a[0]));

    const auto path = std::filesystem::temp_directory_path() / "aamcbr_testsets.json";
    save_test_sets(path, a);
    const auto back = load_test_sets(path);
    REQUIRE(back.size() == a.size());
    for (std::size_t i = 0; i < a.size(); ++i)
        CHECK(to_json(back[i]) == to_json(a[i]));
    std::filesystem::remove(path);
}

TEST_CASE("small pools are rejected")
{
    const auto d = FactorDomain::credit();
    ScenarioPool pool;
    pool.add(compose_template_scenario(d, {"p1"}, 1));
    CHECK_THROWS_AS(generate_test_sets(pool, d, {}), InsufficientPool);
    TestSetOptions opt;
    opt.with_replacement = true;
    opt.count = 2;
    CHECK(generate_test_sets(pool, d, opt).size() == 2);
    opt.new_case_sizes = {11};
    CHECK_THROWS_AS(generate_test_sets(pool, d, opt), std::invalid_argument);
}
