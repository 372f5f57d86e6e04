#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace hiertree {

// Canonical label universe. Ids are dense 0..N-1 and assigned in first
// appearance order, which makes every downstream artifact deterministic.
class LabelRegistry {
public:
    uint32_t add(const std::string& name);          // returns existing id if known
    std::optional<uint32_t> find(const std::string& name) const;
    const std::string& name(uint32_t id) const { return names_[id]; }
    const std::vector<std::string>& names() const { return names_; }
    uint32_t size() const { return static_cast<uint32_t>(names_.size()); }

    bool operator==(const LabelRegistry& other) const { return names_ == other.names_; }

private:
    std::vector<std::string> names_;
    std::unordered_map<std::string, uint32_t> index_;
};

struct TopEntry {
    uint32_t label = 0;
    std::optional<double> score; // probability in [0,1]; absent when the log carries ranks only

    bool operator==(const TopEntry&) const = default;
};

// One video's ground truth plus its ordered top-k predictions.
struct PredictionRecord {
    std::string video_id;
    std::optional<uint32_t> truth;
    std::vector<TopEntry> top; // sorted by score descending, labels distinct

    bool operator==(const PredictionRecord&) const = default;
};

struct PredictionDataset {
    LabelRegistry registry;
    std::vector<PredictionRecord> records;
    uint32_t k = 0;

    // Throws Error(validation) on any broken invariant: empty records,
    // registry smaller than 2, out-of-range ids, duplicate labels within a
    // top list, scores outside [0,1] or increasing, or top lists longer
    // than k (shorter lists are legal; parse policy controls whether they
    // are ever produced).
    void validate() const;

    bool operator==(const PredictionDataset& other) const {
        return registry == other.registry && records == other.records && k == other.k;
    }
};

} // namespace hiertree
