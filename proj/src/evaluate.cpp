#include "hiertree/evaluate.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <sstream>
#include <unordered_map>

#include <json.hpp>

#include "hiertree/error.hpp"
#include "hiertree/io_util.hpp"

using json = nlohmann::json;

namespace hiertree {

EvalSet parse_eval_jsonl(std::istream& stream, const std::vector<std::string>& labels) {
    std::unordered_map<std::string, uint32_t> index;
    for (uint32_t i = 0; i < labels.size(); ++i) index.emplace(labels[i], i);

    auto lookup = [&](const std::string& name, size_t line_no) -> uint32_t {
        auto it = index.find(name);
        if (it == index.end())
            fail_validation("line " + std::to_string(line_no) + ": label '" + name +
                            "' not present in the hierarchy");
        return it->second;
    };

    EvalSet set;
    std::string line;
    size_t line_no = 0;
    while (std::getline(stream, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::parse_error& e) {
            fail_validation("line " + std::to_string(line_no) + ": malformed JSON (" + e.what() + ")");
        }
        if (!j.is_object() || !j.contains("truth") || j["truth"].is_null())
            fail_validation("line " + std::to_string(line_no) +
                            ": evaluation records require a ground-truth label");
        if (!j.contains("top") || !j["top"].is_array() || j["top"].empty())
            fail_validation("line " + std::to_string(line_no) + ": missing or empty top array");

        EvalRecord rec;
        if (j.contains("video_id") && j["video_id"].is_string())
            rec.video_id = j["video_id"].get<std::string>();
        rec.truth = lookup(j["truth"].get<std::string>(), line_no);

        std::vector<std::pair<uint32_t, double>> entries;
        bool scored = false;
        for (size_t i = 0; i < j["top"].size(); ++i) {
            const json& e = j["top"][i];
            if (!e.is_object() || !e.contains("label") || !e["label"].is_string())
                fail_validation("line " + std::to_string(line_no) + ": top entry missing string label");
            const uint32_t id = lookup(e["label"].get<std::string>(), line_no);
            const bool has_score = e.contains("score") && !e["score"].is_null();
            if (i == 0) scored = has_score;
            if (has_score != scored)
                fail_validation("line " + std::to_string(line_no) +
                                ": record mixes scored and unscored entries");
            entries.emplace_back(id, has_score ? e["score"].get<double>() : 0.0);
        }
        if (scored) {
            std::stable_sort(entries.begin(), entries.end(),
                             [](const auto& a, const auto& b) { return a.second > b.second; });
        }
        for (const auto& [id, score] : entries) rec.top.push_back(id);
        set.records.push_back(std::move(rec));
    }
    if (set.records.empty()) fail_validation("no evaluation records");
    return set;
}

namespace {

void check_eval(const Dendrogram& t, const EvalSet& e, uint32_t top_m) {
    if (e.records.empty()) fail_validation("empty evaluation set");
    if (top_m < 1) fail_validation("top_m must be >= 1");
    for (const EvalRecord& rec : e.records) {
        if (rec.top.empty()) fail_validation("evaluation record with empty top list");
        if (rec.truth >= t.n_leaves) fail_validation("evaluation truth id out of range");
        for (uint32_t id : rec.top) {
            if (id >= t.n_leaves) fail_validation("evaluation prediction id out of range");
        }
    }
}

// Merge step (1-based) at which `a` and `b` first share a cluster; 0 when
// equal. This is the step index of their lowest common ancestor.
uint32_t join_step(const std::vector<uint32_t>& parent, uint32_t n_leaves,
                   std::vector<uint32_t>& stamp, uint32_t stamp_value,
                   uint32_t a, uint32_t b) {
    if (a == b) return 0;
    uint32_t x = a;
    while (true) {
        stamp[x] = stamp_value;
        if (parent[x] == x) break;
        x = parent[x];
    }
    uint32_t y = b;
    while (stamp[y] != stamp_value) y = parent[y];
    return y - n_leaves + 1;
}

// Per record: earliest step at which the truth co-clusters with one of the
// first top_m predictions.
std::vector<uint32_t> record_join_steps(const Dendrogram& t, const EvalSet& e, uint32_t top_m) {
    const std::vector<uint32_t> parent = t.parent_ids();
    std::vector<uint32_t> stamp(2 * size_t(t.n_leaves) - 1, UINT32_MAX);
    std::vector<uint32_t> steps;
    steps.reserve(e.records.size());
    uint32_t stamp_value = 0;
    for (const EvalRecord& rec : e.records) {
        uint32_t best = UINT32_MAX;
        const uint32_t use = std::min<uint32_t>(top_m, static_cast<uint32_t>(rec.top.size()));
        for (uint32_t i = 0; i < use && best > 0; ++i) {
            ++stamp_value;
            best = std::min(best, join_step(parent, t.n_leaves, stamp, stamp_value,
                                            rec.truth, rec.top[i]));
        }
        steps.push_back(best);
    }
    return steps;
}

} // namespace

double level_accuracy(const Dendrogram& t, const EvalSet& e, uint32_t k, uint32_t top_m) {
    check_eval(t, e, top_m);
    const CutAssignment assignment = cut(t, k);
    uint64_t correct = 0;
    for (const EvalRecord& rec : e.records) {
        const uint32_t truth_cluster = assignment.member[rec.truth];
        const uint32_t use = std::min<uint32_t>(top_m, static_cast<uint32_t>(rec.top.size()));
        for (uint32_t i = 0; i < use; ++i) {
            if (assignment.member[rec.top[i]] == truth_cluster) {
                ++correct;
                break;
            }
        }
    }
    return double(correct) / double(e.records.size());
}

AccuracyCurve accuracy_curve(const Dendrogram& t, const EvalSet& e,
                             const std::vector<uint32_t>& ks, uint32_t top_m) {
    check_eval(t, e, top_m);
    const uint32_t n = t.n_leaves;
    for (uint32_t k : ks) {
        if (k < 1 || k > n)
            fail_validation("curve k=" + std::to_string(k) + " out of range 1.." + std::to_string(n));
    }

    // correct(k) = records whose join step is <= n-k; one merge-tree pass
    // plus a histogram gives every level at once.
    std::vector<uint64_t> by_step(n, 0); // index: join step 0..n-1
    for (uint32_t s : record_join_steps(t, e, top_m)) {
        if (s != UINT32_MAX) ++by_step[s];
    }
    std::vector<uint64_t> cumulative(n, 0);
    uint64_t run = 0;
    for (uint32_t s = 0; s < n; ++s) {
        run += by_step[s];
        cumulative[s] = run;
    }

    AccuracyCurve curve;
    curve.ks = ks;
    curve.accuracy.reserve(ks.size());
    for (uint32_t k : ks) {
        curve.accuracy.push_back(double(cumulative[n - k]) / double(e.records.size()));
    }
    return curve;
}

std::string curve_csv(const AccuracyCurve& curve, uint32_t n_leaves) {
    std::string out = "k,accuracy,n_clusters_avg_size\n";
    for (size_t i = 0; i < curve.ks.size(); ++i) {
        out += std::to_string(curve.ks[i]);
        out += ',';
        out += format_sig12(curve.accuracy[i]);
        out += ',';
        out += format_sig12(double(n_leaves) / double(curve.ks[i]));
        out += '\n';
    }
    return out;
}

AccuracyCurve parse_curve_csv(std::istream& stream) {
    AccuracyCurve curve;
    std::string line;
    size_t line_no = 0;
    while (std::getline(stream, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line_no == 1) continue; // header
        std::istringstream row(line);
        std::string k_field, acc_field;
        if (!std::getline(row, k_field, ',') || !std::getline(row, acc_field, ','))
            fail_validation("line " + std::to_string(line_no) + ": malformed curve row");
        try {
            curve.ks.push_back(static_cast<uint32_t>(std::stoul(k_field)));
            curve.accuracy.push_back(std::stod(acc_field));
        } catch (const std::exception&) {
            fail_validation("line " + std::to_string(line_no) + ": malformed curve row");
        }
    }
    if (curve.ks.empty()) fail_validation("empty curve CSV");
    return curve;
}

namespace {

// Trapezoidal area under (k, accuracy), normalized by the k range; a
// single-point grid degenerates to the accuracy itself.
double curve_auc(const AccuracyCurve& curve) {
    if (curve.ks.size() == 1) return curve.accuracy[0];
    double area = 0.0;
    for (size_t i = 0; i + 1 < curve.ks.size(); ++i) {
        const double width = double(curve.ks[i + 1]) - double(curve.ks[i]);
        area += 0.5 * (curve.accuracy[i] + curve.accuracy[i + 1]) * width;
    }
    return area / (double(curve.ks.back()) - double(curve.ks.front()));
}

} // namespace

ComparisonReport compare_methods(const std::vector<MethodCurve>& curves) {
    if (curves.empty()) fail_validation("no curves to compare");
    const std::vector<uint32_t>& grid = curves.front().curve.ks;
    if (grid.empty()) fail_validation("empty k grid");
    for (size_t i = 1; i < grid.size(); ++i) {
        if (grid[i] <= grid[i - 1]) fail_validation("k grid must be strictly increasing");
    }
    for (const MethodCurve& mc : curves) {
        if (mc.curve.ks != grid) fail_validation("curves have mismatched k grids");
    }

    ComparisonReport report;
    report.ks = grid;
    for (const MethodCurve& mc : curves) report.methods.push_back(mc.measure + "-" + mc.linkage);

    for (size_t p = 0; p < grid.size(); ++p) {
        double best = -1.0;
        for (const MethodCurve& mc : curves) best = std::max(best, mc.curve.accuracy[p]);
        std::vector<uint32_t> winners;
        for (uint32_t m = 0; m < curves.size(); ++m) {
            if (curves[m].curve.accuracy[p] == best) winners.push_back(m);
        }
        report.best_per_k.push_back(std::move(winners));
        report.best_accuracy.push_back(best);
    }

    for (const MethodCurve& mc : curves) {
        report.ranking.push_back(RankedMethod{mc.measure, mc.linkage, curve_auc(mc.curve)});
    }
    std::stable_sort(report.ranking.begin(), report.ranking.end(),
                     [](const RankedMethod& a, const RankedMethod& b) {
                         if (a.auc != b.auc) return a.auc > b.auc;
                         if (a.measure != b.measure) return a.measure < b.measure;
                         return a.linkage < b.linkage;
                     });
    return report;
}

std::string comparison_ranking_csv(const ComparisonReport& report) {
    std::string out = "rank,measure,linkage,auc\n";
    for (size_t i = 0; i < report.ranking.size(); ++i) {
        const RankedMethod& r = report.ranking[i];
        out += std::to_string(i + 1) + ',' + r.measure + ',' + r.linkage + ',' +
               format_sig12(r.auc) + '\n';
    }
    return out;
}

std::string comparison_per_k_csv(const ComparisonReport& report) {
    std::string out = "k,best_accuracy,best_methods\n";
    for (size_t p = 0; p < report.ks.size(); ++p) {
        out += std::to_string(report.ks[p]);
        out += ',';
        out += format_sig12(report.best_accuracy[p]);
        out += ',';
        std::string methods;
        for (uint32_t m : report.best_per_k[p]) {
            if (!methods.empty()) methods += ';';
            methods += report.methods[m];
        }
        out += methods;
        out += '\n';
    }
    return out;
}

} // namespace hiertree
