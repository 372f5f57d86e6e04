#pragma once

// Shared builders for the test suites: canonical small datasets, random
// inputs with seeded generators, and a few structured distance matrices.

#include <algorithm>
#include <optional>
#include <string>
#include <vector>

#include "hiertree/cooccur.hpp"
#include "hiertree/dataset.hpp"
#include "hiertree/hclust.hpp"
#include "hiertree/rng.hpp"

namespace fixtures {

// Dataset from bare label-id sets; scores omitted (counting is membership
// based anyway). k = largest set size unless given.
inline hiertree::PredictionDataset make_dataset(const std::vector<std::string>& names,
                                                const std::vector<std::vector<uint32_t>>& sets,
                                                uint32_t k = 0) {
    hiertree::PredictionDataset ds;
    for (const std::string& name : names) ds.registry.add(name);
    size_t max_size = 1;
    for (const auto& set : sets) max_size = std::max(max_size, set.size());
    ds.k = k != 0 ? k : static_cast<uint32_t>(max_size);
    for (size_t i = 0; i < sets.size(); ++i) {
        hiertree::PredictionRecord rec;
        rec.video_id = "v" + std::to_string(i);
        for (uint32_t id : sets[i]) rec.top.push_back(hiertree::TopEntry{id, std::nullopt});
        ds.records.push_back(std::move(rec));
    }
    ds.validate();
    return ds;
}

// The 4-set fixture used throughout: S1={a,b} S2={a,b} S3={a,c} S4={b,c}.
inline hiertree::PredictionDataset f1() {
    return make_dataset({"a", "b", "c"}, {{0, 1}, {0, 1}, {0, 2}, {1, 2}});
}

// f1 plus `pads` extra sets containing only a fresh fourth label.
inline hiertree::PredictionDataset f1_padded(uint32_t pads) {
    std::vector<std::vector<uint32_t>> sets = {{0, 1}, {0, 1}, {0, 2}, {1, 2}};
    for (uint32_t i = 0; i < pads; ++i) sets.push_back({3});
    return make_dataset({"a", "b", "c", "d"}, sets);
}

inline hiertree::PredictionDataset random_dataset(hiertree::Rng& rng, uint32_t max_labels = 10,
                                                  uint32_t max_sets = 100, uint32_t max_k = 4) {
    const uint32_t n_labels = 2 + static_cast<uint32_t>(rng.below(max_labels - 1));
    const uint32_t n_sets = 1 + static_cast<uint32_t>(rng.below(max_sets));
    const uint32_t k = 1 + static_cast<uint32_t>(rng.below(max_k));

    std::vector<std::string> names;
    for (uint32_t i = 0; i < n_labels; ++i) names.push_back("l" + std::to_string(i));

    std::vector<std::vector<uint32_t>> sets;
    for (uint32_t s = 0; s < n_sets; ++s) {
        const uint32_t size = 1 + static_cast<uint32_t>(rng.below(std::min(k, n_labels)));
        std::vector<uint32_t> set;
        while (set.size() < size) {
            const uint32_t id = static_cast<uint32_t>(rng.below(n_labels));
            if (std::find(set.begin(), set.end(), id) == set.end()) set.push_back(id);
        }
        sets.push_back(std::move(set));
    }
    return make_dataset(names, sets, k);
}

inline hiertree::DistanceMatrix random_distance(hiertree::Rng& rng, uint32_t n) {
    hiertree::DistanceMatrix d;
    for (uint32_t i = 0; i < n; ++i) d.labels.push_back("x" + std::to_string(i));
    d.values.assign(size_t(n) * n, 0.0);
    for (uint32_t i = 0; i < n; ++i) {
        for (uint32_t j = i + 1; j < n; ++j) {
            const double v = rng.unit();
            d.values[size_t(i) * n + j] = v;
            d.values[size_t(j) * n + i] = v;
        }
    }
    return d;
}

// Points on a line with strictly growing gaps: single linkage peels the
// chain one element at a time while Ward splits near the middle.
inline hiertree::DistanceMatrix chain_distance(uint32_t n) {
    std::vector<double> x(n, 0.0);
    for (uint32_t i = 1; i < n; ++i) x[i] = x[i - 1] + 1.0 + 0.1 * i;
    hiertree::DistanceMatrix d;
    for (uint32_t i = 0; i < n; ++i) d.labels.push_back("p" + std::to_string(i));
    d.values.assign(size_t(n) * n, 0.0);
    const double span = x[n - 1] - x[0];
    for (uint32_t i = 0; i < n; ++i) {
        for (uint32_t j = i + 1; j < n; ++j) {
            const double v = (x[j] - x[i]) / span;
            d.values[size_t(i) * n + j] = v;
            d.values[size_t(j) * n + i] = v;
        }
    }
    return d;
}

inline hiertree::Linkage nth_linkage(size_t i) {
    static const hiertree::Linkage all[] = {hiertree::Linkage::single, hiertree::Linkage::complete,
                                            hiertree::Linkage::average, hiertree::Linkage::weighted,
                                            hiertree::Linkage::ward};
    return all[i % 5];
}

inline hiertree::Dendrogram random_tree(hiertree::Rng& rng, uint32_t n) {
    const hiertree::DistanceMatrix d = random_distance(rng, n);
    return hiertree::agglomerate(d, nth_linkage(rng.below(5)));
}

} // namespace fixtures
