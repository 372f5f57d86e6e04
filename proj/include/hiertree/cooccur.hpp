#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hiertree/dataset.hpp"

namespace hiertree {

// Empirical co-occurrence counts over the prediction sets. Counting is
// membership based: scores are ignored, each record's top list is one set.
struct CooccurrenceStats {
    uint64_t n_sets = 0;
    std::vector<uint64_t> single;  // c_i: sets containing label i
    std::vector<uint64_t> pair_ut; // c_ij, upper triangle (i < j), row-major

    uint32_t n_labels() const { return static_cast<uint32_t>(single.size()); }

    // c_ij with c_ii := c_i (a set containing i trivially contains {i,i}).
    uint64_t pair_count(uint32_t i, uint32_t j) const;
};

CooccurrenceStats count_cooccurrences(const PredictionDataset& ds);

// Videos where the label is the single top prediction; feeds diagnostics.
std::vector<uint64_t> top1_counts(const PredictionDataset& ds);

// Pairwise association measures. All are exact integer-count ratios
// evaluated in one floating-point step; `laplace` (default 0) is added to
// the raw pair count of distinct labels before the ratio is taken.
// Undefined marginals (c = 0) raise Error(numeric).
double confidence(const CooccurrenceStats& s, uint32_t i, uint32_t j, double laplace = 0.0);
double lift(const CooccurrenceStats& s, uint32_t i, uint32_t j, double laplace = 0.0);
double cosine_similarity(const CooccurrenceStats& s, uint32_t i, uint32_t j, double laplace = 0.0);
double kulczynski_similarity(const CooccurrenceStats& s, uint32_t i, uint32_t j, double laplace = 0.0);

enum class Measure { confidence, lift, cosine, kulczynski };
enum class DistanceSource { confidence, lift };
enum class LiftNorm { off_diagonal, include_diagonal };

// Labels that never appear in any set make the conditional probabilities
// undefined. `error` reports them, `drop` removes them from the matrix,
// `keep` admits them with similarity 0 (distance 1 to everything, excluded
// from the lift normalization domain).
enum class UncoveredPolicy { error, drop, keep };

std::string to_string(Measure m);
std::string to_string(DistanceSource s);
Measure measure_from_string(const std::string& s);
DistanceSource distance_source_from_string(const std::string& s);

struct SimilarityMatrix {
    Measure measure = Measure::cosine;
    std::vector<std::string> labels;
    std::vector<double> values; // row-major N x N

    uint32_t size() const { return static_cast<uint32_t>(labels.size()); }
    double at(uint32_t i, uint32_t j) const { return values[size_t(i) * size() + j]; }
};

struct DistanceMatrix {
    DistanceSource source = DistanceSource::confidence;
    std::vector<std::string> labels;
    std::vector<double> values; // symmetric, zero diagonal, entries in [0,1]

    uint32_t size() const { return static_cast<uint32_t>(labels.size()); }
    double at(uint32_t i, uint32_t j) const { return values[size_t(i) * size() + j]; }
    void validate() const;
};

struct MatrixOptions {
    double laplace = 0.0;
    LiftNorm lift_norm = LiftNorm::off_diagonal;
    UncoveredPolicy uncovered = UncoveredPolicy::error;
};

SimilarityMatrix similarity_matrix(const CooccurrenceStats& s, const LabelRegistry& registry,
                                   Measure measure, const MatrixOptions& options = {});

// D^C_ij = 1 - sqrt(C_ij * C_ji), diagonal forced to 0.
DistanceMatrix confidence_distance(const CooccurrenceStats& s, const LabelRegistry& registry,
                                   const MatrixOptions& options = {});

// D^L_ij = 1 - (L_ij - min L) / (max L - min L) with the normalization
// taken over off-diagonal pairs (self-lifts included only when asked).
// All off-diagonal lifts equal raises Error(numeric).
DistanceMatrix lift_distance(const CooccurrenceStats& s, const LabelRegistry& registry,
                             const MatrixOptions& options = {});

DistanceMatrix distance_matrix(const CooccurrenceStats& s, const LabelRegistry& registry,
                               DistanceSource source, const MatrixOptions& options = {});

// CSV with a header row/column of label names, 12 significant digits.
std::string distance_csv(const DistanceMatrix& d);
DistanceMatrix parse_distance_csv(std::istream& stream);

// Stats bundle file (the `stats.bin` CLI artifact): counts plus label names
// and top-1 counts, everything diagnostics needs.
struct StatsBundle {
    CooccurrenceStats stats;
    std::vector<std::string> labels;
    std::vector<uint64_t> top1;
};

StatsBundle make_stats_bundle(const PredictionDataset& ds);
void write_stats_file(const StatsBundle& bundle, const std::string& path);
StatsBundle read_stats_file(const std::string& path);

} // namespace hiertree
