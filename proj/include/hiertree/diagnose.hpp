#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hiertree/cooccur.hpp"
#include "hiertree/hclust.hpp"

namespace hiertree {

struct LabelDiagnostics {
    uint32_t label = 0;
    uint64_t appearance = 0;      // sets whose top-k contains the label
    uint64_t top1 = 0;            // sets where it is the top prediction
    uint32_t merge_step = 0;      // first step placing it in a cluster of size >= m
    double merge_height = 0.0;
};

struct DiagnosticsReport {
    uint32_t m = 0;
    uint32_t q = 0;
    std::vector<LabelDiagnostics> per_label;  // label id order
    std::vector<uint32_t> well_placed;        // q earliest joiners
    std::vector<uint32_t> late_mergers;       // q latest joiners, most outlier-like first
    double median_appearance_well_placed = 0.0;
    double median_appearance_late_mergers = 0.0;
    double median_appearance_overall = 0.0;
};

// Ranks labels by the merge step at which they first belong to a cluster of
// size >= m; later joiners are the under-identified outliers. Rank uses the
// step, not the height, so it is comparable across linkages. top1 may be
// empty when the usage data carries no score ordering.
DiagnosticsReport late_merger_report(const Dendrogram& t, const CooccurrenceStats& stats,
                                     uint32_t m, uint32_t q,
                                     const std::vector<uint64_t>& top1 = {});

// Aligns a stats bundle onto the tree's label set by name (the tree may
// cover a subset when uncovered labels were dropped).
DiagnosticsReport late_merger_report(const Dendrogram& t, const StatsBundle& bundle,
                                     uint32_t m, uint32_t q);

std::string diagnostics_json(const DiagnosticsReport& report, const std::vector<std::string>& labels);

struct ClusterProfile {
    uint32_t k = 0;
    std::vector<std::vector<uint32_t>> members; // per cluster, ascending label ids
    double balance_entropy = 0.0;               // normalized entropy of cluster sizes, in [0,1]
};

ClusterProfile cluster_profile(const Dendrogram& t, uint32_t k);

} // namespace hiertree
