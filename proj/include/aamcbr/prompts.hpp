#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace aamcbr {

class TemplateError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

using PromptValues = std::map<std::string, std::string>;

/// The six prompt templates used by the pipeline and the baselines. Placeholders
/// are written as `{name}`.
struct PromptTemplates {
    std::string generate_scenario;
    std::string extract_factors;
    std::string determine_coverage;
    std::string predict_outcome;
    /// Replaces the final paragraph of `predict_outcome` in the instructed baseline.
    std::string instructed_revision;
    std::string conclude_outcome;

    static PromptTemplates builtin();

    /// Starts from the built-in set and overrides every template for which
    /// `<dir>/<name>.txt` exists (e.g. `determine_coverage.txt`).
    static PromptTemplates load_dir(const std::filesystem::path& dir);

    /// `predict_outcome` with its last paragraph swapped for `instructed_revision`.
    std::string instructed_predict_outcome() const;
};

/// Substitutes every `{name}` in the template. Values are inserted verbatim and
/// never re-expanded. Throws TemplateError on a placeholder without a value.
std::string render(std::string_view tmpl, const PromptValues& values);

/// Placeholder names in order of appearance.
std::vector<std::string> placeholders(std::string_view tmpl);

/// Inverse of render(): recovers placeholder values if `text` has the shape
/// of `tmpl`, otherwise nullopt.
std::optional<PromptValues> match_template(std::string_view tmpl, std::string_view text);

/// Factor lists are embedded in prompts as a JSON array of sentences.
std::string format_sentence_list(const std::vector<std::string>& sentences);
std::optional<std::vector<std::string>> parse_sentence_list(std::string_view text);

} // namespace aamcbr
