#include "aamcbr/report.hpp"

#include <algorithm>
#include <cstdio>
#include <set>
#include <sstream>

#include "aamcbr/util.hpp"

namespace aamcbr {

namespace {

const char* kCoverageHeader = "test_set,new_case_index,previous_index,n,ground_truth_relevant,predicted_relevant,"
                              "parse_status,error";
const char* kExtractionHeader = "test_set,new_case_index,previous_index,n,actually_relevant,predicted,truth,"
                                "exact_match,failed,error";
const char* kPredictionHeader = "test_set,new_case_index,n,default,strategy,predicted,gold,correct,error";

std::string join_factors(const FactorSet& s)
{
    std::string out;
    for (const auto& f : s) {
        if (!out.empty())
            out += ';';
        out += f;
    }
    return out;
}

FactorSet split_factors(const std::string& s)
{
    FactorSet out;
    std::string cur;
    for (char c : s) {
        if (c == ';') {
            if (!cur.empty())
                out.insert(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (!cur.empty())
        out.insert(cur);
    return out;
}

const char* flag(bool b) { return b ? "1" : "0"; }

bool parse_flag(const std::string& s)
{
    if (s == "1")
        return true;
    if (s == "0")
        return false;
    throw std::invalid_argument("expected 0 or 1, got '" + s + "'");
}

ParseStatus parse_status_from(const std::string& s)
{
    if (s == "ok")
        return ParseStatus::Ok;
    if (s == "retried")
        return ParseStatus::Retried;
    if (s == "failed")
        return ParseStatus::Failed;
    throw std::invalid_argument("unknown parse status '" + s + "'");
}

template <typename... Fields>
std::string csv_row(const Fields&... fields)
{
    std::string out;
    bool first = true;
    auto put = [&](const std::string& f) {
        if (!first)
            out += ',';
        first = false;
        out += csv_escape(f);
    };
    (put(fields), ...);
    out += '\n';
    return out;
}

std::vector<std::vector<std::string>> read_csv(std::string_view text)
{
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> row;
    std::string field;
    bool quoted = false;
    bool any = false;
    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    field += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                field += c;
            }
            continue;
        }
        any = true;
        if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            row.push_back(std::move(field));
            field.clear();
        } else if (c == '\n') {
            row.push_back(std::move(field));
            field.clear();
            rows.push_back(std::move(row));
            row.clear();
            any = false;
        } else if (c != '\r') {
            field += c;
        }
    }
    if (quoted)
        throw std::invalid_argument("unterminated quoted CSV field");
    if (any) {
        row.push_back(std::move(field));
        rows.push_back(std::move(row));
    }
    return rows;
}

std::vector<std::vector<std::string>> csv_body(std::string_view text, const char* header)
{
    auto rows = read_csv(text);
    if (rows.empty())
        throw std::invalid_argument("CSV is missing its header");
    std::string got;
    for (std::size_t i = 0; i < rows[0].size(); ++i)
        got += (i ? "," : "") + rows[0][i];
    if (got != header)
        throw std::invalid_argument("unexpected CSV header: " + got);
    const auto width = rows[0].size();
    rows.erase(rows.begin());
    for (const auto& r : rows)
        if (r.size() != width)
            throw std::invalid_argument("CSV row has " + std::to_string(r.size()) + " fields, expected "
                                        + std::to_string(width));
    return rows;
}

std::size_t to_size(const std::string& s) { return static_cast<std::size_t>(std::stoull(s)); }

std::string format_rate(const std::optional<double>& v)
{
    if (!v)
        return "-";
    char buf[16];
    std::snprintf(buf, sizeof buf, "%.2f", *v);
    return buf;
}

std::string pad(std::string s, std::size_t width)
{
    if (s.size() < width)
        s.append(width - s.size(), ' ');
    return s;
}

std::string lpad(std::string s, std::size_t width)
{
    if (s.size() < width)
        s.insert(0, width - s.size(), ' ');
    return s;
}

} // namespace

std::string csv_escape(std::string_view field)
{
    if (field.find_first_of(",\"\n\r") == std::string_view::npos)
        return std::string(field);
    std::string out = "\"";
    for (char c : field) {
        if (c == '"')
            out += '"';
        out += c;
    }
    out += '"';
    return out;
}

std::string coverage_csv(const std::vector<CoverageRecord>& records)
{
    std::string out = std::string(kCoverageHeader) + "\n";
    for (const auto& r : records)
        out += csv_row(std::to_string(r.test_set), std::to_string(r.new_case_index), std::to_string(r.previous_index),
                       std::to_string(r.new_case_size), flag(r.ground_truth_relevant), flag(r.predicted_relevant),
                       to_string(r.parse_status), r.error);
    return out;
}

std::string extraction_csv(const std::vector<ExtractionRecord>& records)
{
    std::string out = std::string(kExtractionHeader) + "\n";
    for (const auto& r : records)
        out += csv_row(std::to_string(r.test_set), std::to_string(r.new_case_index), std::to_string(r.previous_index),
                       std::to_string(r.new_case_size), flag(r.actually_relevant), join_factors(r.predicted),
                       join_factors(r.truth), flag(r.exact_match), flag(r.failed), r.error);
    return out;
}

std::string prediction_csv(const std::vector<PredictionRecord>& records)
{
    std::string out = std::string(kPredictionHeader) + "\n";
    for (const auto& r : records)
        out += csv_row(std::to_string(r.test_set), std::to_string(r.new_case_index), std::to_string(r.new_case_size),
                       to_string(r.default_outcome), to_string(r.strategy), to_string(r.predicted), to_string(r.gold),
                       flag(r.correct), r.error);
    return out;
}

std::vector<CoverageRecord> parse_coverage_csv(std::string_view text)
{
    std::vector<CoverageRecord> out;
    for (const auto& f : csv_body(text, kCoverageHeader)) {
        CoverageRecord r;
        r.test_set = to_size(f[0]);
        r.new_case_index = to_size(f[1]);
        r.previous_index = to_size(f[2]);
        r.new_case_size = to_size(f[3]);
        r.ground_truth_relevant = parse_flag(f[4]);
        r.predicted_relevant = parse_flag(f[5]);
        r.parse_status = parse_status_from(f[6]);
        r.error = f[7];
        out.push_back(std::move(r));
    }
    return out;
}

std::vector<ExtractionRecord> parse_extraction_csv(std::string_view text)
{
    std::vector<ExtractionRecord> out;
    for (const auto& f : csv_body(text, kExtractionHeader)) {
        ExtractionRecord r;
        r.test_set = to_size(f[0]);
        r.new_case_index = to_size(f[1]);
        r.previous_index = to_size(f[2]);
        r.new_case_size = to_size(f[3]);
        r.actually_relevant = parse_flag(f[4]);
        r.predicted = split_factors(f[5]);
        r.truth = split_factors(f[6]);
        r.exact_match = parse_flag(f[7]);
        r.failed = parse_flag(f[8]);
        r.error = f[9];
        out.push_back(std::move(r));
    }
    return out;
}

std::vector<PredictionRecord> parse_prediction_csv(std::string_view text)
{
    std::vector<PredictionRecord> out;
    for (const auto& f : csv_body(text, kPredictionHeader)) {
        PredictionRecord r;
        r.test_set = to_size(f[0]);
        r.new_case_index = to_size(f[1]);
        r.new_case_size = to_size(f[2]);
        r.default_outcome = parse_outcome(f[3]);
        r.strategy = parse_strategy(f[4]);
        r.predicted = parse_prediction(f[5]);
        r.gold = parse_outcome(f[6]);
        r.correct = parse_flag(f[7]);
        r.error = f[8];
        out.push_back(std::move(r));
    }
    return out;
}

MetricsTable metrics_from_records(const std::vector<CoverageRecord>& coverage,
                                  const std::vector<ExtractionRecord>& extraction,
                                  const std::vector<PredictionRecord>& prediction)
{
    std::set<std::size_t> sizes;
    MetricsTable m;
    for (const auto& r : coverage) {
        sizes.insert(r.new_case_size);
        m.coverage_accuracy[r.new_case_size].add(r.predicted_relevant == r.ground_truth_relevant);
        m.ground_truth_relevance[r.new_case_size].add(r.ground_truth_relevant);
        if (r.predicted_relevant)
            m.coverage_precision[r.new_case_size].add(r.ground_truth_relevant);
    }
    for (const auto& r : extraction) {
        sizes.insert(r.new_case_size);
        m.extraction_accuracy[r.new_case_size].add(r.exact_match);
        if (r.actually_relevant)
            m.extraction_accuracy_given_relevance[r.new_case_size].add(r.exact_match);
    }
    for (const auto& r : prediction) {
        sizes.insert(r.new_case_size);
        m.prediction_accuracy[{r.strategy, r.new_case_size, r.default_outcome}].add(r.correct);
    }
    m.sizes.assign(sizes.begin(), sizes.end());
    return m;
}

PredictionTable prediction_table(const MetricsTable& metrics)
{
    std::set<Strategy> strategies;
    std::set<std::pair<std::size_t, Outcome>> columns;
    for (const auto& [key, rate] : metrics.prediction_accuracy) {
        strategies.insert(std::get<0>(key));
        columns.insert({std::get<1>(key), std::get<2>(key)});
    }
    PredictionTable t;
    t.rows.assign(strategies.begin(), strategies.end());
    t.columns.assign(columns.begin(), columns.end());
    for (auto s : t.rows) {
        auto& row = t.cells.emplace_back();
        for (const auto& [n, d] : t.columns) {
            const auto it = metrics.prediction_accuracy.find({s, n, d});
            row.push_back(it == metrics.prediction_accuracy.end() ? std::nullopt : it->second.value());
        }
    }
    return t;
}

std::string render_tables(const MetricsTable& metrics)
{
    std::ostringstream out;
    const auto t = prediction_table(metrics);
    constexpr std::size_t label_width = 28;
    constexpr std::size_t cell_width = 6;

    out << "Outcome prediction accuracy\n";
    if (t.rows.empty()) {
        out << "(no predictions)\n";
    } else {
        std::string sizes_line = pad("New case size (n)", label_width);
        std::string defaults_line = pad("Default outcome", label_width);
        for (std::size_t c = 0; c < t.columns.size(); ++c) {
            const auto& [n, d] = t.columns[c];
            const bool first_of_n = c == 0 || t.columns[c - 1].first != n;
            sizes_line += lpad(first_of_n ? std::to_string(n) : "", cell_width);
            defaults_line += lpad(to_string(d), cell_width);
        }
        out << trim(sizes_line) << '\n' << defaults_line << '\n';
        for (std::size_t r = 0; r < t.rows.size(); ++r) {
            std::string line = pad(display_name(t.rows[r]), label_width);
            for (const auto& cell : t.cells[r])
                line += lpad(format_rate(cell), cell_width);
            out << line << '\n';
        }
    }

    struct Series {
        const char* name;
        const std::map<std::size_t, Rate>* values;
    };
    const Series series[] = {
        {"Case relevance accuracy", &metrics.coverage_accuracy},
        {"Relevance precision", &metrics.coverage_precision},
        {"Ground-truth relevance", &metrics.ground_truth_relevance},
        {"Factor extraction accuracy", &metrics.extraction_accuracy},
        {"Extraction given relevance", &metrics.extraction_accuracy_given_relevance},
    };
    bool any = false;
    for (const auto& s : series)
        any = any || !s.values->empty();
    if (!any)
        return out.str();

    out << "\nPer-size agent metrics\n";
    std::string header = pad("New case size (n)", label_width);
    for (auto n : metrics.sizes)
        header += lpad(std::to_string(n), cell_width);
    out << header << '\n';
    for (const auto& s : series) {
        if (s.values->empty())
            continue;
        std::string line = pad(s.name, label_width);
        for (auto n : metrics.sizes) {
            const auto it = s.values->find(n);
            line += lpad(format_rate(it == s.values->end() ? std::nullopt : it->second.value()), cell_width);
        }
        out << line << '\n';
    }
    return out.str();
}

void emit_report(const std::filesystem::path& dir, const ReportInputs& inputs)
{
    static const std::vector<CoverageRecord> no_coverage;
    static const std::vector<ExtractionRecord> no_extraction;
    static const std::vector<PredictionRecord> no_prediction;
    std::filesystem::create_directories(dir);
    write_file_atomic(dir / "coverage.csv", coverage_csv(inputs.coverage ? *inputs.coverage : no_coverage));
    write_file_atomic(dir / "extraction.csv", extraction_csv(inputs.extraction ? *inputs.extraction : no_extraction));
    write_file_atomic(dir / "predictions.csv",
                      prediction_csv(inputs.prediction ? *inputs.prediction : no_prediction));
    write_file_atomic(dir / "metrics.json", to_json(inputs.metrics).dump(2) + "\n");
    write_file_atomic(dir / "tables.txt", render_tables(inputs.metrics));
}

} // namespace aamcbr
