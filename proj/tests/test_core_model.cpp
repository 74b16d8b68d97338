#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "aamcbr/core_model.hpp"

using namespace aamcbr;

TEST_CASE("credit domain has ten factors with five of each polarity")
{
    const auto d = FactorDomain::credit();
    CHECK(d.size() == 10);
    int positive = 0;
    for (const auto& f : d.factors())
        positive += f.polarity == Polarity::Positive ? 1 : 0;
    CHECK(positive == 5);
    CHECK(d.at("n4").sentence == "limited credit history");
    CHECK(d.at("n1").sentence == "high number of recent credit inquiries.");
    CHECK(d.id_for_sentence("positive relationship with the bank") == FactorId("p5"));
    CHECK_FALSE(d.id_for_sentence("unknown").has_value());
}

TEST_CASE("domain rejects duplicates and unknown ids")
{
    CHECK_THROWS_AS(FactorDomain({{"a", "x", Polarity::Positive}, {"a", "y", Polarity::Negative}}), DomainError);
    CHECK_THROWS_AS(FactorDomain({{"a", "x", Polarity::Positive}, {"b", "x", Polarity::Negative}}), DomainError);
    CHECK_THROWS_AS(FactorDomain(std::vector<Factor>{}), DomainError);
    const auto d = FactorDomain::credit();
    CHECK_NOTHROW(d.validate({"p1", "n5"}));
    CHECK_THROWS_AS(d.validate({"p1", "zz"}), DomainError);
}

TEST_CASE("domain JSON round trip")
{
    const auto d = FactorDomain::credit();
    const auto back = FactorDomain::from_json(d.to_json());
    CHECK(back.factors() == d.factors());
    CHECK_THROWS_AS(FactorDomain::from_json(nlohmann::json::array()), DomainError);
}

TEST_CASE("sentences come out in domain order")
{
    const auto d = FactorDomain::credit();
    const auto s = d.sentences({"n4", "p5", "p1"});
    REQUIRE(s.size() == 3);
    CHECK(s[0] == "low debt-to-income ratio");
    CHECK(s[1] == "positive relationship with the bank");
    CHECK(s[2] == "limited credit history");
    CHECK(d.ordered({"n4", "p1"}) == std::vector<FactorId>{"p1", "n4"});
}

TEST_CASE("flipping polarity keeps ids and sentences")
{
    const auto d = FactorDomain::credit();
    const auto f = d.with_flipped_polarity();
    for (const auto& factor : d.factors()) {
        CHECK(f.at(factor.id).sentence == factor.sentence);
        CHECK(f.at(factor.id).polarity != factor.polarity);
    }
}

TEST_CASE("set helpers")
{
    CHECK(is_subset({}, {"a"}));
    CHECK(is_subset({"a"}, {"a"}));
    CHECK_FALSE(is_strict_subset({"a"}, {"a"}));
    CHECK(is_strict_subset({"a"}, {"a", "b"}));
    CHECK_FALSE(is_subset({"c"}, {"a", "b"}));
    CHECK(intersect({"a", "b"}, {"b", "c"}) == FactorSet{"b"});
    CHECK(to_string(FactorSet{"n4", "p5"}) == "{n4,p5}");
    CHECK(to_string(FactorSet{}) == "{}");
}

TEST_CASE("outcome parsing")
{
    CHECK(parse_outcome("0") == Outcome::Zero);
    CHECK(parse_outcome("1") == Outcome::One);
    CHECK_THROWS(parse_outcome("2"));
    CHECK(complement(Outcome::Zero) == Outcome::One);
    CHECK(to_string(Outcome::One) == "1");
}

TEST_CASE("consistency check deduplicates and sorts")
{
    const std::vector<Case> cases = {{{"n4"}, Outcome::Zero}, {{"n3", "n4", "p2"}, Outcome::One}, {{"n4"}, Outcome::Zero}};
    const auto base = check_consistency(cases);
    CHECK(base.size() == 2);
    CHECK(base.contains({{"n4"}, Outcome::Zero}));
    CHECK(std::is_sorted(base.begin(), base.end()));
}

TEST_CASE("consistency check lists every conflicting factor set")
{
    const std::vector<Case> cases = {{{"a"}, Outcome::Zero}, {{"a"}, Outcome::One},
                                     {{"b"}, Outcome::One},  {{"c"}, Outcome::Zero},
                                     {{"c"}, Outcome::One},  {{"c"}, Outcome::One}};
    try {
        check_consistency(cases);
        FAIL("expected a ConsistencyViolation");
    } catch (const ConsistencyViolation& e) {
        CHECK(e.conflicts() == std::vector<FactorSet>{{"a"}, {"c"}});
    }
}

TEST_CASE("consistency check against a domain")
{
    const std::vector<Case> cases = {{{"zz"}, Outcome::Zero}};
    CHECK_THROWS_AS(check_consistency(cases, FactorDomain::credit()), DomainError);
}

TEST_CASE("factor set JSON")
{
    const FactorSet s{"p2", "n3"};
    CHECK(factors_from_json(factors_to_json(s)) == s);
    CHECK(factors_to_json(s).dump() == R"(["n3","p2"])");
}
