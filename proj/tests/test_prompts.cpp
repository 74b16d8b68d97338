#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "aamcbr/prompts.hpp"

using namespace aamcbr;

TEST_CASE("render substitutes once and never re-expands")
{
    CHECK(render("a {x} b {y}", {{"x", "1"}, {"y", "{x}"}}) == "a 1 b {x}");
    CHECK(render("{x}{x}", {{"x", "z"}}) == "zz");
    CHECK(render("no placeholders", {{"unused", "v"}}) == "no placeholders");
    CHECK_THROWS_AS(render("{missing}", {}), TemplateError);
}

TEST_CASE("placeholders in order of appearance")
{
    CHECK(placeholders("{a} x {b} {a}") == std::vector<std::string>{"a", "b", "a"});
    CHECK(placeholders(PromptTemplates::builtin().determine_coverage)
          == std::vector<std::string>{"factor_list", "case_description"});
}

TEST_CASE("built-in templates keep the exact layout")
{
    const auto t = PromptTemplates::builtin();
    CHECK(t.determine_coverage.rfind("TASK: \n", 0) == 0);
    CHECK(t.determine_coverage.find("Here is the factor list: \n    {factor_list}\n") != std::string::npos);
    CHECK(t.determine_coverage.find("OUTPUT FORMATTING: 'YES' or 'NO'") != std::string::npos);
    CHECK(t.extract_factors.find("a JSON array of the extracted factor sentences. If no factors are found, return [].")
          != std::string::npos);
    CHECK(t.instructed_revision.find("will be  '{default_outcome}'") != std::string::npos);
    CHECK(t.conclude_outcome.find("'{outcome0}' or '{outcome1}' or 'mixed'") != std::string::npos);
    CHECK(placeholders(t.generate_scenario)
          == std::vector<std::string>{"included_factor_list", "excluded_factor_list"});
}

TEST_CASE("instructed prompt swaps the final question for the dialectical steps")
{
    const auto t = PromptTemplates::builtin();
    const auto instructed = t.instructed_predict_outcome();
    CHECK(instructed.find("what is the most likely outcome") == std::string::npos);
    CHECK(instructed.find("The default outcome is '{default_outcome}'\n") != std::string::npos);
    CHECK(instructed.find("between a proponent and an opponent") != std::string::npos);
    CHECK(instructed.size() > t.predict_outcome.size());
    const auto rendered = render(instructed, {{"previous_case_list", "P"}, {"new_case_list", "N"},
                                              {"default_outcome", "0"}, {"opponent_outcome", "1"}});
    CHECK(rendered.find("the predicted outcome for the new case will be '1'") != std::string::npos);
}

TEST_CASE("match_template inverts render")
{
    const auto t = PromptTemplates::builtin().determine_coverage;
    const PromptValues v = {{"factor_list", R"(["a","b"])"}, {"case_description", "Some text: with colons.\nTwo lines."}};
    const auto m = match_template(t, render(t, v));
    REQUIRE(m.has_value());
    CHECK(*m == v);
    CHECK_FALSE(match_template(t, "something else").has_value());
    CHECK_FALSE(match_template("{a}{b}", "xy").has_value());
    CHECK_FALSE(match_template("{a}-{a}", "x-y").has_value());
    CHECK(match_template("{a}-{a}", "x-x") == PromptValues{{"a", "x"}});
}

TEST_CASE("sentence lists are JSON arrays")
{
    const std::vector<std::string> s = {"insufficient income", "high number of recent credit inquiries."};
    const auto text = format_sentence_list(s);
    CHECK(text == R"(["insufficient income","high number of recent credit inquiries."])");
    CHECK(parse_sentence_list(text) == s);
    CHECK(parse_sentence_list("[]") == std::vector<std::string>{});
    CHECK_FALSE(parse_sentence_list("not json").has_value());
    CHECK_FALSE(parse_sentence_list("[1,2]").has_value());
}

TEST_CASE("templates can be overridden from a directory")
{
    const auto dir = std::filesystem::temp_directory_path() / "aamcbr_prompt_override";
    std::filesystem::create_directories(dir);
    std::ofstream(dir / "determine_coverage.txt") << "Covers? {factor_list} / {case_description}\n";
    const auto t = PromptTemplates::load_dir(dir);
    CHECK(t.determine_coverage == "Covers? {factor_list} / {case_description}\n");
    CHECK(t.extract_factors == PromptTemplates::builtin().extract_factors);
    std::filesystem::remove_all(dir);
}
