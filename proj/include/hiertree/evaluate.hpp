#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "hiertree/hclust.hpp"

namespace hiertree {

struct EvalRecord {
    std::string video_id;
    uint32_t truth = 0;
    std::vector<uint32_t> top; // classifier ranking, best first; top[0] is the prediction
};

struct EvalSet {
    std::vector<EvalRecord> records;
};

// Reads the JSONL record grammar, requiring ground truth, and maps label
// names onto the tree's label universe. Unknown names are an error.
EvalSet parse_eval_jsonl(std::istream& stream, const std::vector<std::string>& labels);

// Fraction of records whose truth and prediction land in the same cluster
// of cut(t, k). top_m > 1 scores a record correct when any of its first
// top_m predictions co-clusters with the truth (non-standard extension;
// the default matches the top-1 protocol).
double level_accuracy(const Dendrogram& t, const EvalSet& e, uint32_t k, uint32_t top_m = 1);

struct AccuracyCurve {
    std::vector<uint32_t> ks;
    std::vector<double> accuracy;
};

// Single pass over the merge sequence; equal to evaluating level_accuracy
// at each k independently.
AccuracyCurve accuracy_curve(const Dendrogram& t, const EvalSet& e,
                             const std::vector<uint32_t>& ks, uint32_t top_m = 1);

// Columns: k,accuracy,n_clusters_avg_size
std::string curve_csv(const AccuracyCurve& curve, uint32_t n_leaves);
AccuracyCurve parse_curve_csv(std::istream& stream);

struct MethodCurve {
    std::string measure;
    std::string linkage;
    AccuracyCurve curve;
};

struct RankedMethod {
    std::string measure;
    std::string linkage;
    double auc = 0.0;
};

struct ComparisonReport {
    std::vector<uint32_t> ks;
    std::vector<std::vector<uint32_t>> best_per_k; // indices into `methods`, ties listed
    std::vector<double> best_accuracy;
    std::vector<RankedMethod> ranking;             // by auc descending, then name
    std::vector<std::string> methods;              // "measure-linkage" labels
};

// All curves must share one k grid.
ComparisonReport compare_methods(const std::vector<MethodCurve>& curves);

std::string comparison_ranking_csv(const ComparisonReport& report);
std::string comparison_per_k_csv(const ComparisonReport& report);

} // namespace hiertree
