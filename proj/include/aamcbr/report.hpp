#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "aamcbr/experiments.hpp"

namespace aamcbr {

/// RFC 4180 quoting: fields containing comma, quote or newline are quoted.
std::string csv_escape(std::string_view field);

std::string coverage_csv(const std::vector<CoverageRecord>& records);
std::string extraction_csv(const std::vector<ExtractionRecord>& records);
std::string prediction_csv(const std::vector<PredictionRecord>& records);

/// Accuracy grid with one row per strategy and one column per (n, default).
struct PredictionTable {
    std::vector<Strategy> rows;
    std::vector<std::pair<std::size_t, Outcome>> columns;
    /// cells[row][column]; nullopt when no predictions were scored.
    std::vector<std::vector<std::optional<double>>> cells;
};

PredictionTable prediction_table(const MetricsTable& metrics);

/// Plain-text rendering of the prediction grid plus per-n coverage/extraction metrics.
std::string render_tables(const MetricsTable& metrics);

struct ReportInputs {
    const std::vector<CoverageRecord>* coverage = nullptr;
    const std::vector<ExtractionRecord>* extraction = nullptr;
    const std::vector<PredictionRecord>* prediction = nullptr;
    MetricsTable metrics;
};

/// Writes coverage.csv, extraction.csv, predictions.csv (headers only when a
/// record list is absent or empty), metrics.json and tables.txt into `dir`.
void emit_report(const std::filesystem::path& dir, const ReportInputs& inputs);

/// Parses the CSV files written by emit_report back into records.
std::vector<CoverageRecord> parse_coverage_csv(std::string_view text);
std::vector<ExtractionRecord> parse_extraction_csv(std::string_view text);
std::vector<PredictionRecord> parse_prediction_csv(std::string_view text);

/// Recomputes metrics from records.
MetricsTable metrics_from_records(const std::vector<CoverageRecord>& coverage,
                                  const std::vector<ExtractionRecord>& extraction,
                                  const std::vector<PredictionRecord>& prediction);

} // namespace aamcbr
