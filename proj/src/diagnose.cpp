#include "hiertree/diagnose.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include <json.hpp>

#include "hiertree/error.hpp"
#include "hiertree/version.hpp"

using ordered_json = nlohmann::ordered_json;

namespace hiertree {

namespace {

double median(std::vector<uint64_t> values) {
    if (values.empty()) return 0.0;
    std::sort(values.begin(), values.end());
    const size_t n = values.size();
    if (n % 2 == 1) return double(values[n / 2]);
    return (double(values[n / 2 - 1]) + double(values[n / 2])) / 2.0;
}

} // namespace

DiagnosticsReport late_merger_report(const Dendrogram& t, const CooccurrenceStats& stats,
                                     uint32_t m, uint32_t q, const std::vector<uint64_t>& top1) {
    t.validate();
    const uint32_t n = t.n_leaves;
    if (m < 2) fail_validation("meaningful cluster size m must be >= 2");
    if (m > n) fail_validation("meaningful cluster size m exceeds label count");
    if (q > n) fail_validation("report size q exceeds label count");
    if (stats.n_labels() != n)
        fail_validation("stats label count does not match the tree");
    if (!top1.empty() && top1.size() != n)
        fail_validation("top-1 count vector does not match the tree");

    // Replay the merges; when a cluster first reaches size >= m, every leaf
    // inside it that has no step yet gets this one.
    std::vector<std::vector<uint32_t>> leaves(2 * size_t(n) - 1);
    for (uint32_t i = 0; i < n; ++i) leaves[i] = {i};
    std::vector<uint32_t> step_of(n, 0);
    std::vector<double> height_of(n, 0.0);
    std::vector<bool> placed(n, false);
    for (uint32_t i = 0; i < n - 1; ++i) {
        const Merge& merge = t.merges[i];
        const uint32_t id = n + i;
        std::vector<uint32_t>& into = leaves[id];
        into = std::move(leaves[merge.left]);
        into.insert(into.end(), leaves[merge.right].begin(), leaves[merge.right].end());
        leaves[merge.right].clear();
        if (into.size() >= m) {
            for (uint32_t leaf : into) {
                if (!placed[leaf]) {
                    placed[leaf] = true;
                    step_of[leaf] = i + 1;
                    height_of[leaf] = merge.height;
                }
            }
        }
    }

    DiagnosticsReport report;
    report.m = m;
    report.q = q;
    report.per_label.reserve(n);
    for (uint32_t id = 0; id < n; ++id) {
        LabelDiagnostics d;
        d.label = id;
        d.appearance = stats.single[id];
        d.top1 = top1.empty() ? 0 : top1[id];
        d.merge_step = step_of[id];
        d.merge_height = height_of[id];
        report.per_label.push_back(d);
    }

    std::vector<uint32_t> order(n);
    for (uint32_t i = 0; i < n; ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](uint32_t a, uint32_t b) {
        if (step_of[a] != step_of[b]) return step_of[a] < step_of[b];
        return a < b;
    });

    std::vector<uint64_t> well_counts, late_counts, all_counts;
    for (uint32_t i = 0; i < q; ++i) {
        report.well_placed.push_back(order[i]);
        well_counts.push_back(stats.single[order[i]]);
    }
    for (uint32_t i = 0; i < q; ++i) {
        const uint32_t id = order[n - 1 - i]; // latest joiner first
        report.late_mergers.push_back(id);
        late_counts.push_back(stats.single[id]);
    }
    for (uint32_t id = 0; id < n; ++id) all_counts.push_back(stats.single[id]);

    report.median_appearance_well_placed = median(std::move(well_counts));
    report.median_appearance_late_mergers = median(std::move(late_counts));
    report.median_appearance_overall = median(std::move(all_counts));
    return report;
}

DiagnosticsReport late_merger_report(const Dendrogram& t, const StatsBundle& bundle,
                                     uint32_t m, uint32_t q) {
    std::unordered_map<std::string, uint32_t> index;
    for (uint32_t i = 0; i < bundle.labels.size(); ++i) index.emplace(bundle.labels[i], i);

    CooccurrenceStats projected;
    projected.n_sets = bundle.stats.n_sets;
    std::vector<uint64_t> top1;
    for (const std::string& name : t.labels) {
        auto it = index.find(name);
        if (it == index.end())
            fail_validation("tree label '" + name + "' not present in the stats file");
        projected.single.push_back(bundle.stats.single[it->second]);
        top1.push_back(bundle.top1[it->second]);
    }
    return late_merger_report(t, projected, m, q, top1);
}

std::string diagnostics_json(const DiagnosticsReport& report, const std::vector<std::string>& labels) {
    ordered_json j;
    j["generator"] = version_string();
    j["m"] = report.m;
    j["q"] = report.q;
    j["n_labels"] = report.per_label.size();
    j["median_appearance_well_placed"] = report.median_appearance_well_placed;
    j["median_appearance_late_mergers"] = report.median_appearance_late_mergers;
    j["median_appearance_overall"] = report.median_appearance_overall;

    auto name_list = [&](const std::vector<uint32_t>& ids) {
        ordered_json arr = ordered_json::array();
        for (uint32_t id : ids) arr.push_back(labels[id]);
        return arr;
    };
    j["well_placed"] = name_list(report.well_placed);
    j["late_mergers"] = name_list(report.late_mergers);

    ordered_json per_label = ordered_json::array();
    for (const LabelDiagnostics& d : report.per_label) {
        ordered_json e;
        e["label"] = labels[d.label];
        e["appearance_count"] = d.appearance;
        e["top1_count"] = d.top1;
        e["meaningful_merge_step"] = d.merge_step;
        e["meaningful_merge_height"] = d.merge_height;
        per_label.push_back(std::move(e));
    }
    j["labels"] = std::move(per_label);
    return j.dump(2) + "\n";
}

ClusterProfile cluster_profile(const Dendrogram& t, uint32_t k) {
    const CutAssignment assignment = cut(t, k);
    ClusterProfile profile;
    profile.k = k;
    profile.members.assign(k, {});
    for (uint32_t label = 0; label < t.n_leaves; ++label) {
        profile.members[assignment.member[label]].push_back(label);
    }

    // Normalized entropy of the cluster size distribution; 1 for perfectly
    // even sizes, 0 as one cluster swallows everything. k=1 is trivially 1.
    if (k == 1) {
        profile.balance_entropy = 1.0;
    } else {
        double h = 0.0;
        for (const std::vector<uint32_t>& cluster : profile.members) {
            const double p = double(cluster.size()) / double(t.n_leaves);
            h -= p * std::log(p);
        }
        profile.balance_entropy = h / std::log(double(k));
    }
    return profile;
}

} // namespace hiertree
