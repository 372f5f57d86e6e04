#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hiertree/cooccur.hpp"
#include "hiertree/hclust.hpp"
#include "hiertree/ingest.hpp"

namespace hiertree {

// Full experiment grid: ingest -> distance per measure -> tree per linkage
// -> accuracy curves -> comparison report + diagnostics.
struct PipelineConfig {
    std::string input;              // prediction log path
    std::string format = "jsonl";
    uint32_t k = 5;
    bool pad_short = false;
    std::string eval;               // eval JSONL path
    std::vector<std::string> measures = {"confidence", "lift"};
    std::vector<std::string> linkages = {"single", "complete", "average", "weighted", "ward"};
    std::string ks = "1..N";        // k grid spec: comma list of ints and lo..hi ranges, N = label count
    std::string out_dir;
    std::string uncovered = "error"; // error | drop | keep
    double laplace = 0.0;
    std::string lift_norm = "off-diagonal"; // off-diagonal | include-diagonal
    uint32_t diag_m = 3;
    uint32_t diag_q = 50;
    std::string diag_measure = "confidence";
    std::string diag_linkage = "single";
    uint32_t threads = 0;           // 0 = hardware concurrency
};

// Key = value file, # comments, lists comma separated. Unknown keys are an
// error. CLI flags override whatever the file sets.
PipelineConfig load_config_file(const std::string& path);

// Rejects bad enum values, missing files and malformed k specs before any
// work starts.
void validate_config(const PipelineConfig& cfg);

std::vector<uint32_t> parse_ks_spec(const std::string& spec, uint32_t n);

struct GridResult {
    std::vector<std::string> artifacts; // paths written, sorted
};

GridResult run_grid(const PipelineConfig& cfg);

MatrixOptions matrix_options_from(const PipelineConfig& cfg);

} // namespace hiertree
