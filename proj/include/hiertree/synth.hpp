#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hiertree/dataset.hpp"

namespace hiertree {

// Synthetic prediction logs with a planted group structure: each record's
// top-k holds the truth plus k-1 distinct distractors drawn from the
// truth's group with probability p_in, otherwise uniformly from the other
// groups. Data abundance is adjustable per label: a label with scale s gets
// round(s * videos_per_label) truth records and its weight as a distractor
// candidate shrinks by the same factor, so it shows up in top-k sets
// roughly s times as often as its peers. sparse_label is the one-knob
// version of that (scale 1/sparse_divisor), modeling a single data-starved
// class.
struct PlantedConfig {
    uint32_t groups = 4;
    uint32_t labels_per_group = 5;
    uint32_t videos_per_label = 50;
    uint32_t k = 5;
    double p_in = 0.9; // must be in (0.5, 1]
    uint64_t seed = 1;
    int64_t sparse_label = -1;             // label id, or -1 for none
    uint32_t sparse_divisor = 10;
    std::vector<double> label_scale;       // per-label abundance, empty = all 1

    void validate() const;
};

struct PlantedData {
    PredictionDataset dataset;
    std::vector<uint32_t> group; // planted partition, per label id
};

// Deterministic for a given config: per-label generator seeds derive from
// the master seed, records come out label-major, video-minor.
PlantedData generate_planted(const PlantedConfig& cfg);

// Chance-corrected partition agreement in [-1, 1]; both vectors assign a
// cluster id to the same item universe.
double adjusted_rand_index(const std::vector<uint32_t>& a, const std::vector<uint32_t>& b);

std::string partition_json(const std::vector<std::string>& labels, const std::vector<uint32_t>& group);

} // namespace hiertree
