#include "hiertree/synth.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include <json.hpp>

#include "hiertree/error.hpp"
#include "hiertree/rng.hpp"
#include "hiertree/version.hpp"

using json = nlohmann::json;

namespace hiertree {

void PlantedConfig::validate() const {
    if (!(p_in > 0.5 && p_in <= 1.0)) fail_validation("p_in must be in (0.5, 1]");
    const uint64_t n_labels = uint64_t(groups) * labels_per_group;
    if (groups < 1 || labels_per_group < 1 || n_labels < 2)
        fail_validation("need at least 2 labels (groups x labels_per_group)");
    if (videos_per_label < 1) fail_validation("videos_per_label must be >= 1");
    if (k < 1) fail_validation("k must be >= 1");
    if (k > n_labels)
        fail_validation("k=" + std::to_string(k) + " exceeds the " + std::to_string(n_labels) +
                        " available distinct labels");
    if (sparse_label >= int64_t(n_labels)) fail_validation("sparse_label out of range");
    if (sparse_label >= 0 && sparse_divisor < 1) fail_validation("sparse_divisor must be >= 1");
    if (!label_scale.empty()) {
        if (label_scale.size() != n_labels)
            fail_validation("label_scale must list one value per label");
        for (double s : label_scale) {
            if (!(s > 0.0)) fail_validation("label_scale entries must be > 0");
        }
    }
}

namespace {

std::string synth_label_name(uint32_t group, uint32_t member) {
    return "g" + std::to_string(group) + "_l" + std::to_string(member);
}

uint32_t pick_weighted(const std::vector<uint32_t>& pool, const std::vector<uint64_t>& weight,
                       Rng& rng) {
    uint64_t total = 0;
    for (uint32_t id : pool) total += weight[id];
    uint64_t roll = rng.below(total);
    for (uint32_t id : pool) {
        if (roll < weight[id]) return id;
        roll -= weight[id];
    }
    return pool.back(); // unreachable
}

} // namespace

PlantedData generate_planted(const PlantedConfig& cfg) {
    cfg.validate();
    const uint32_t n_labels = cfg.groups * cfg.labels_per_group;

    PlantedData out;
    out.group.reserve(n_labels);
    for (uint32_t g = 0; g < cfg.groups; ++g) {
        for (uint32_t l = 0; l < cfg.labels_per_group; ++l) {
            out.dataset.registry.add(synth_label_name(g, l));
            out.group.push_back(g);
        }
    }
    out.dataset.k = cfg.k;

    // Per-label abundance: truth record counts and distractor weights both
    // scale with it. Weights are integerized for portable sampling.
    std::vector<double> scale(n_labels, 1.0);
    if (!cfg.label_scale.empty()) scale = cfg.label_scale;
    if (cfg.sparse_label >= 0) scale[cfg.sparse_label] /= double(cfg.sparse_divisor);
    std::vector<uint64_t> weight(n_labels);
    std::vector<uint32_t> videos(n_labels);
    for (uint32_t i = 0; i < n_labels; ++i) {
        weight[i] = std::max<uint64_t>(1, uint64_t(std::llround(scale[i] * 1000.0)));
        videos[i] = std::max<uint32_t>(
            1, uint32_t(std::llround(scale[i] * double(cfg.videos_per_label))));
    }

    // One independent stream per label, all derived from the master seed,
    // so the output does not depend on how generation is scheduled.
    std::vector<uint64_t> label_seed(n_labels);
    uint64_t sm_state = cfg.seed;
    for (uint32_t i = 0; i < n_labels; ++i) label_seed[i] = splitmix64(sm_state);

    std::vector<uint32_t> in_pool, out_pool;
    for (uint32_t truth = 0; truth < n_labels; ++truth) {
        Rng rng(label_seed[truth]);

        for (uint32_t v = 0; v < videos[truth]; ++v) {
            std::vector<uint32_t> members = {truth};
            for (uint32_t d = 1; d < cfg.k; ++d) {
                in_pool.clear();
                out_pool.clear();
                for (uint32_t cand = 0; cand < n_labels; ++cand) {
                    if (std::find(members.begin(), members.end(), cand) != members.end()) continue;
                    if (out.group[cand] == out.group[truth]) in_pool.push_back(cand);
                    else out_pool.push_back(cand);
                }
                const bool want_in = rng.bernoulli(cfg.p_in);
                const std::vector<uint32_t>& pool =
                    want_in ? (in_pool.empty() ? out_pool : in_pool)
                            : (out_pool.empty() ? in_pool : out_pool);
                members.push_back(pick_weighted(pool, weight, rng));
            }

            // Cosmetic Dirichlet scores: exponentials normalized, sorted
            // descending; the truth keeps the top slot.
            std::vector<double> scores(cfg.k);
            double sum = 0.0;
            for (double& s : scores) {
                s = -std::log(1.0 - rng.unit());
                sum += s;
            }
            for (double& s : scores) s /= sum;
            std::sort(scores.begin(), scores.end(), std::greater<>());

            PredictionRecord rec;
            rec.video_id = "s" + std::to_string(cfg.seed) + "_" +
                           synth_label_name(out.group[truth], truth % cfg.labels_per_group) +
                           "_v" + std::to_string(v);
            rec.truth = truth;
            for (uint32_t i = 0; i < cfg.k; ++i) rec.top.push_back(TopEntry{members[i], scores[i]});
            out.dataset.records.push_back(std::move(rec));
        }
    }
    out.dataset.validate();
    return out;
}

double adjusted_rand_index(const std::vector<uint32_t>& a, const std::vector<uint32_t>& b) {
    if (a.size() != b.size()) fail_validation("partitions cover different universes");
    if (a.empty()) fail_validation("empty partitions");
    const size_t n = a.size();
    if (n < 2) return 1.0;

    std::map<std::pair<uint32_t, uint32_t>, uint64_t> cont;
    std::map<uint32_t, uint64_t> row, col;
    for (size_t i = 0; i < n; ++i) {
        ++cont[{a[i], b[i]}];
        ++row[a[i]];
        ++col[b[i]];
    }
    auto pairs2 = [](uint64_t c) { return double(c) * double(c - 1) / 2.0; };

    // pair-count sums are exact integers in double up to ~n^2/2
    double s_cells = 0.0, s_rows = 0.0, s_cols = 0.0;
    for (const auto& kv : cont) s_cells += pairs2(kv.second);
    for (const auto& kv : row) s_rows += pairs2(kv.second);
    for (const auto& kv : col) s_cols += pairs2(kv.second);
    const double total = pairs2(n);

    // ARI = (S_cells - S_rows S_cols / T) / ((S_rows + S_cols)/2 - S_rows S_cols / T),
    // scaled by 2T so the only rounding is the final division.
    const double numerator = 2.0 * total * s_cells - 2.0 * s_rows * s_cols;
    const double denominator = total * (s_rows + s_cols) - 2.0 * s_rows * s_cols;
    if (denominator == 0.0) return 1.0; // both partitions trivial
    return numerator / denominator;
}

std::string partition_json(const std::vector<std::string>& labels, const std::vector<uint32_t>& group) {
    json j;
    j["generator"] = version_string();
    j["labels"] = labels;
    j["group"] = group;
    return j.dump(2) + "\n";
}

} // namespace hiertree
