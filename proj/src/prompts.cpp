#include "aamcbr/prompts.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

namespace aamcbr {

namespace {

// clang-format off
const char* const kGenerateScenario = R"(TASK: 
Your task is to generate an example of credit card application scenario that covers a specified set of factors and excludes another specified set of factors.
INSTRUCTIONS: 
You will be provided with a specified set of factors that should be covered in the generated scenario and another specified set of factors that should NOT be covered in the generated scenario.
The set of factors that should be covered in the generated scenario:
    {included_factor_list}
The set of factors that should NOT be covered in the generated scenario:
    {excluded_factor_list}
OUTPUT FORMATTING: Generate the scenario in one concise description. Do NOT explicitly use the same words as those in factors. Do NOT include an outcome whether the credit card is accepted or rejected.
)";

const char* const kExtractFactors = R"(TASK: 
Your task is to extract factors from a description of a credit card application scenario.
INSTRUCTIONS: 
You will be provided with a description of a credit card application scenario and a list of all possible factor sentences.
Description: {description}
All possible factors: {all_factor_sentences}
Identify and return ONLY the factor sentences from the provided list that are explicitly present or clearly implied in the description.
OUTPUT FORMATTING: a JSON array of the extracted factor sentences. If no factors are found, return [].
)";

const char* const kDetermineCoverage = R"(TASK: 
Your task is to determine whether the factor list covers the case.
INSTRUCTIONS: 
You will be provided with a factor list and a case description.
Here is the factor list: 
    {factor_list}
Here is the case description: 
    {case_description}
Answer this question: does the factor list cover the case?
OUTPUT FORMATTING: 'YES' or 'NO'
)";

const char* const kPredictOutcome = R"(TASK: 
You are an expert Case-Based Reasoning (CBR) system. Your task is to predict the outcome for a new case based on given previous cases.
INSTRUCTIONS: 
You will be provided with previous cases, a new case, and a default outcome.
Here are the previous cases you will be working with.
    {previous_case_list}
And this is the new case to analyze:
    {new_case_list}
The default outcome is '{default_outcome}'
Based on the previous cases provided, what is the most likely outcome for this new case?
)";

const char* const kInstructedRevision = R"(Please do NOT consider the positiveness and negativeness of factors.
You will use a dialectical process between a proponent and an opponent.
Your decision-making process should follow these steps:
1. The proponent starts by asserting a default claim with empty factors and the default outcome '{default_outcome}'
2. The opponent can challenge the proponent's claim if they can identify a previous case that meets the following criteria:
    - with all factors covered by the new case
    - with the outcome '{opponent_outcome}'
    - If the challenging previous case's factors are NOT covered by the proponent's claimed case, then the opponent CANNOT challenge with this previous case (this is a STRICT condition).
3. The proponent can defend against the opponent's rebuttal if they can identify a previous case that meets the following criteria:
  - with all factors covered by the new case
  - with the outcome '{default_outcome}'
  - If the defending previous case's factors are NOT covered by the opponent's claimed case, then the proponent CANNOT defend with this previous case  (this is a STRICT condition).
4. After considering all possible argumentative paths:
  - If the proponent cannot uphold their initial claim through this process (meaning there is no winning path for them), then the predicted outcome for the new case will be '{opponent_outcome}'
  - Otherwise, the predicted outcome for the new case will be  '{default_outcome}'
According to the steps provided, what is the predicted outcome for the new case?
)";

const char* const kConcludeOutcome = R"(TASK: Your task is to conclude the predicted outcome from the response.
INSTRUCTIONS: Here is the response:
{first_response}
What is the predicted outcome from this response (answer 'mixed' if the predicted outcome cannot be concluded)?
OUTPUT FORMATTING: '{outcome0}' or '{outcome1}' or 'mixed'.
)";
// clang-format on

bool is_name_char(char c)
{
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_';
}

struct Segment {
    bool placeholder = false;
    std::string text;
};

std::vector<Segment> split(std::string_view tmpl)
{
    std::vector<Segment> out;
    std::string literal;
    std::size_t i = 0;
    while (i < tmpl.size()) {
        if (tmpl[i] == '{') {
            std::size_t j = i + 1;
            while (j < tmpl.size() && is_name_char(tmpl[j]))
                ++j;
            if (j < tmpl.size() && tmpl[j] == '}' && j > i + 1) {
                if (!literal.empty())
                    out.push_back({false, std::move(literal)});
                literal.clear();
                out.push_back({true, std::string(tmpl.substr(i + 1, j - i - 1))});
                i = j + 1;
                continue;
            }
        }
        literal += tmpl[i++];
    }
    if (!literal.empty())
        out.push_back({false, std::move(literal)});
    return out;
}

std::optional<std::string> read_file(const std::filesystem::path& p)
{
    std::ifstream in(p, std::ios::binary);
    if (!in)
        return std::nullopt;
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace

PromptTemplates PromptTemplates::builtin()
{
    return {kGenerateScenario, kExtractFactors,     kDetermineCoverage,
            kPredictOutcome,   kInstructedRevision, kConcludeOutcome};
}

PromptTemplates PromptTemplates::load_dir(const std::filesystem::path& dir)
{
    if (!std::filesystem::is_directory(dir))
        throw TemplateError("prompt directory " + dir.string() + " does not exist");
    auto t = builtin();
    const std::pair<const char*, std::string*> files[] = {
        {"generate_scenario.txt", &t.generate_scenario},
        {"extract_factors.txt", &t.extract_factors},
        {"determine_coverage.txt", &t.determine_coverage},
        {"predict_outcome.txt", &t.predict_outcome},
        {"instructed_revision.txt", &t.instructed_revision},
        {"conclude_outcome.txt", &t.conclude_outcome},
    };
    for (const auto& [name, slot] : files)
        if (auto content = read_file(dir / name))
            *slot = std::move(*content);
    return t;
}

std::string PromptTemplates::instructed_predict_outcome() const
{
    std::string base = predict_outcome;
    while (!base.empty() && base.back() == '\n')
        base.pop_back();
    const auto cut = base.rfind('\n');
    base = cut == std::string::npos ? std::string() : base.substr(0, cut + 1);
    return base + instructed_revision;
}

std::string render(std::string_view tmpl, const PromptValues& values)
{
    std::string out;
    for (const auto& seg : split(tmpl)) {
        if (!seg.placeholder) {
            out += seg.text;
            continue;
        }
        auto it = values.find(seg.text);
        if (it == values.end())
            throw TemplateError("no value for placeholder {" + seg.text + "}");
        out += it->second;
    }
    return out;
}

std::vector<std::string> placeholders(std::string_view tmpl)
{
    std::vector<std::string> out;
    for (const auto& seg : split(tmpl))
        if (seg.placeholder)
            out.push_back(seg.text);
    return out;
}

std::optional<PromptValues> match_template(std::string_view tmpl, std::string_view text)
{
    const auto segs = split(tmpl);
    PromptValues values;
    std::size_t pos = 0;
    for (std::size_t i = 0; i < segs.size(); ++i) {
        const auto& seg = segs[i];
        if (!seg.placeholder) {
            if (text.substr(pos, seg.text.size()) != seg.text)
                return std::nullopt;
            pos += seg.text.size();
            continue;
        }
        std::size_t end = text.size();
        if (i + 1 < segs.size()) {
            // Adjacent placeholders cannot be separated unambiguously.
            if (segs[i + 1].placeholder)
                return std::nullopt;
            const auto& next = segs[i + 1].text;
            // A trailing literal must end the text, so anchor it there.
            end = i + 2 == segs.size() ? text.rfind(next) : text.find(next, pos);
            if (end == std::string_view::npos || end < pos)
                return std::nullopt;
        }
        auto value = std::string(text.substr(pos, end - pos));
        auto [it, inserted] = values.emplace(seg.text, value);
        if (!inserted && it->second != value)
            return std::nullopt;
        pos = end;
    }
    if (pos != text.size())
        return std::nullopt;
    return values;
}

std::string format_sentence_list(const std::vector<std::string>& sentences)
{
    return nlohmann::json(sentences).dump();
}

std::optional<std::vector<std::string>> parse_sentence_list(std::string_view text)
{
    auto j = nlohmann::json::parse(text, nullptr, false);
    if (j.is_discarded() || !j.is_array())
        return std::nullopt;
    std::vector<std::string> out;
    for (const auto& v : j) {
        if (!v.is_string())
            return std::nullopt;
        out.push_back(v.get<std::string>());
    }
    return out;
}

} // namespace aamcbr
