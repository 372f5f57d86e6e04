#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "hiertree/dataset.hpp"

namespace hiertree {

enum class LogFormat { jsonl, csv };

LogFormat log_format_from_string(const std::string& s);

struct ParseOptions {
    LogFormat format = LogFormat::jsonl;
    uint32_t k = 5;
    // Records offering fewer than k predictions are rejected by default;
    // with pad_short they are kept as smaller sets.
    bool pad_short = false;
};

// Parse a line-oriented prediction log into a validated dataset. Every
// record is truncated to its k highest-scoring entries (stable on score
// ties, listed order when scores are absent) and the registry is built from
// the union of retained labels and ground truths, ids in first-appearance
// order. Errors carry the 1-based line number.
PredictionDataset parse_predictions(std::istream& stream, const ParseOptions& options);

// JSONL writer; parse(serialize(ds)) == ds for datasets produced by parse.
std::string serialize_jsonl(const PredictionDataset& ds);

// Versioned binary cache (the `dataset.bin` CLI artifact).
void write_dataset_file(const PredictionDataset& ds, const std::string& path);
PredictionDataset read_dataset_file(const std::string& path);

struct CoverageReport {
    std::vector<uint64_t> count;     // per label id: records whose top-k contains it
    std::vector<uint32_t> uncovered; // labels with count 0, ascending id
};

CoverageReport coverage_report(const PredictionDataset& ds);

std::string coverage_csv(const CoverageReport& report, const LabelRegistry& registry);

} // namespace hiertree
