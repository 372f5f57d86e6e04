#include "hiertree/cooccur.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <set>
#include <sstream>

#include "binio.hpp"
#include "hiertree/error.hpp"
#include "hiertree/io_util.hpp"

namespace hiertree {

namespace {

// Upper-triangle index for i < j over n labels.
inline size_t ut_index(uint32_t i, uint32_t j, uint32_t n) {
    return size_t(i) * (2 * size_t(n) - i - 1) / 2 + (j - i - 1);
}

} // namespace

uint64_t CooccurrenceStats::pair_count(uint32_t i, uint32_t j) const {
    if (i == j) return single[i];
    const uint32_t a = std::min(i, j);
    const uint32_t b = std::max(i, j);
    return pair_ut[ut_index(a, b, n_labels())];
}

CooccurrenceStats count_cooccurrences(const PredictionDataset& ds) {
    const uint32_t n = ds.registry.size();
    if (n < 2) fail_validation("co-occurrence counting needs at least 2 labels");

    CooccurrenceStats stats;
    stats.n_sets = ds.records.size();
    stats.single.assign(n, 0);
    stats.pair_ut.assign(size_t(n) * (n - 1) / 2, 0);

    std::vector<uint32_t> members;
    for (const PredictionRecord& rec : ds.records) {
        members.clear();
        for (const TopEntry& e : rec.top) members.push_back(e.label);
        std::sort(members.begin(), members.end());
        for (size_t a = 0; a < members.size(); ++a) {
            ++stats.single[members[a]];
            for (size_t b = a + 1; b < members.size(); ++b) {
                ++stats.pair_ut[ut_index(members[a], members[b], n)];
            }
        }
    }
    return stats;
}

std::vector<uint64_t> top1_counts(const PredictionDataset& ds) {
    std::vector<uint64_t> counts(ds.registry.size(), 0);
    for (const PredictionRecord& rec : ds.records) ++counts[rec.top.front().label];
    return counts;
}

namespace {

double smoothed_pair(const CooccurrenceStats& s, uint32_t i, uint32_t j, double laplace) {
    const uint64_t raw = s.pair_count(i, j);
    return i == j ? double(raw) : double(raw) + laplace;
}

void require_covered(const CooccurrenceStats& s, uint32_t id) {
    if (s.single[id] == 0)
        fail_numeric("label id " + std::to_string(id) + " appears in no set; conditional undefined");
}

} // namespace

double confidence(const CooccurrenceStats& s, uint32_t i, uint32_t j, double laplace) {
    require_covered(s, j);
    return smoothed_pair(s, i, j, laplace) / double(s.single[j]);
}

double lift(const CooccurrenceStats& s, uint32_t i, uint32_t j, double laplace) {
    require_covered(s, i);
    require_covered(s, j);
    return smoothed_pair(s, i, j, laplace) * double(s.n_sets) /
           (double(s.single[i]) * double(s.single[j]));
}

double cosine_similarity(const CooccurrenceStats& s, uint32_t i, uint32_t j, double laplace) {
    require_covered(s, i);
    require_covered(s, j);
    return smoothed_pair(s, i, j, laplace) / std::sqrt(double(s.single[i]) * double(s.single[j]));
}

double kulczynski_similarity(const CooccurrenceStats& s, uint32_t i, uint32_t j, double laplace) {
    require_covered(s, i);
    require_covered(s, j);
    const double cij = smoothed_pair(s, i, j, laplace) / double(s.single[j]);
    const double cji = smoothed_pair(s, j, i, laplace) / double(s.single[i]);
    return (cij + cji) / 2.0;
}

std::string to_string(Measure m) {
    switch (m) {
        case Measure::confidence: return "confidence";
        case Measure::lift: return "lift";
        case Measure::cosine: return "cosine";
        case Measure::kulczynski: return "kulczynski";
    }
    return "?";
}

std::string to_string(DistanceSource s) {
    return s == DistanceSource::confidence ? "confidence" : "lift";
}

Measure measure_from_string(const std::string& s) {
    if (s == "confidence") return Measure::confidence;
    if (s == "lift") return Measure::lift;
    if (s == "cosine") return Measure::cosine;
    if (s == "kulczynski") return Measure::kulczynski;
    fail_validation("unknown measure '" + s + "'");
}

DistanceSource distance_source_from_string(const std::string& s) {
    if (s == "confidence") return DistanceSource::confidence;
    if (s == "lift") return DistanceSource::lift;
    fail_validation("unknown distance measure '" + s + "' (expected confidence or lift)");
}

void DistanceMatrix::validate() const {
    const uint32_t n = size();
    if (n < 2) fail_validation("distance matrix needs at least 2 labels");
    if (values.size() != size_t(n) * n) fail_validation("distance matrix is not square");
    {
        std::set<std::string> seen(labels.begin(), labels.end());
        if (seen.size() != labels.size()) fail_validation("duplicate label name in distance matrix");
    }
    for (uint32_t i = 0; i < n; ++i) {
        if (labels[i].empty()) fail_validation("empty label name in distance matrix");
        if (at(i, i) != 0.0) fail_validation("distance diagonal must be 0");
        for (uint32_t j = i + 1; j < n; ++j) {
            const double v = at(i, j);
            if (!std::isfinite(v)) fail_validation("non-finite distance at (" +
                                                   std::to_string(i) + "," + std::to_string(j) + ")");
            if (v < 0.0 || v > 1.0) fail_validation("distance outside [0,1]");
            if (v != at(j, i)) fail_validation("distance matrix not symmetric");
        }
    }
}

namespace {

// Labels that survive the uncovered policy, in id order.
struct Kept {
    std::vector<uint32_t> ids;      // kept label id -> original id
    std::vector<bool> covered;      // per kept slot
};

Kept apply_uncovered_policy(const CooccurrenceStats& s, const LabelRegistry& registry,
                            UncoveredPolicy policy) {
    std::vector<uint32_t> uncovered;
    for (uint32_t id = 0; id < s.n_labels(); ++id) {
        if (s.single[id] == 0) uncovered.push_back(id);
    }
    Kept kept;
    if (!uncovered.empty() && policy == UncoveredPolicy::error) {
        std::string names;
        for (uint32_t id : uncovered) {
            if (!names.empty()) names += ", ";
            names += "'" + registry.name(id) + "'";
        }
        fail_numeric("labels with zero coverage: " + names +
                     " (re-ingest with more data, or pass --drop-uncovered / --uncovered keep)");
    }
    for (uint32_t id = 0; id < s.n_labels(); ++id) {
        const bool cov = s.single[id] > 0;
        if (cov || policy == UncoveredPolicy::keep) {
            kept.ids.push_back(id);
            kept.covered.push_back(cov);
        }
    }
    if (kept.ids.size() < 2) fail_numeric("fewer than 2 labels remain after dropping uncovered ones");
    return kept;
}

std::vector<std::string> kept_names(const Kept& kept, const LabelRegistry& registry) {
    std::vector<std::string> names;
    names.reserve(kept.ids.size());
    for (uint32_t id : kept.ids) names.push_back(registry.name(id));
    return names;
}

} // namespace

SimilarityMatrix similarity_matrix(const CooccurrenceStats& s, const LabelRegistry& registry,
                                   Measure measure, const MatrixOptions& options) {
    const Kept kept = apply_uncovered_policy(s, registry, options.uncovered);
    const uint32_t n = static_cast<uint32_t>(kept.ids.size());

    SimilarityMatrix m;
    m.measure = measure;
    m.labels = kept_names(kept, registry);
    m.values.assign(size_t(n) * n, 0.0);
    for (uint32_t a = 0; a < n; ++a) {
        for (uint32_t b = 0; b < n; ++b) {
            if (!kept.covered[a] || !kept.covered[b]) continue; // similarity 0 under `keep`
            double v = 0.0;
            switch (measure) {
                case Measure::confidence: v = confidence(s, kept.ids[a], kept.ids[b], options.laplace); break;
                case Measure::lift: v = lift(s, kept.ids[a], kept.ids[b], options.laplace); break;
                case Measure::cosine: v = cosine_similarity(s, kept.ids[a], kept.ids[b], options.laplace); break;
                case Measure::kulczynski: v = kulczynski_similarity(s, kept.ids[a], kept.ids[b], options.laplace); break;
            }
            m.values[size_t(a) * n + b] = v;
        }
    }
    return m;
}

DistanceMatrix confidence_distance(const CooccurrenceStats& s, const LabelRegistry& registry,
                                   const MatrixOptions& options) {
    const Kept kept = apply_uncovered_policy(s, registry, options.uncovered);
    const uint32_t n = static_cast<uint32_t>(kept.ids.size());

    DistanceMatrix d;
    d.source = DistanceSource::confidence;
    d.labels = kept_names(kept, registry);
    d.values.assign(size_t(n) * n, 0.0);
    for (uint32_t a = 0; a < n; ++a) {
        for (uint32_t b = a + 1; b < n; ++b) {
            double v = 1.0;
            if (kept.covered[a] && kept.covered[b])
                v = 1.0 - cosine_similarity(s, kept.ids[a], kept.ids[b], options.laplace);
            d.values[size_t(a) * n + b] = v;
            d.values[size_t(b) * n + a] = v;
        }
    }
    return d;
}

DistanceMatrix lift_distance(const CooccurrenceStats& s, const LabelRegistry& registry,
                             const MatrixOptions& options) {
    const Kept kept = apply_uncovered_policy(s, registry, options.uncovered);
    const uint32_t n = static_cast<uint32_t>(kept.ids.size());

    // Normalization domain: off-diagonal covered pairs, plus self-lifts on
    // request. Uncovered labels (under `keep`) sit outside the domain and
    // get distance 1 directly.
    std::vector<double> lifts(size_t(n) * n, 0.0);
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (uint32_t a = 0; a < n; ++a) {
        if (!kept.covered[a]) continue;
        for (uint32_t b = 0; b < n; ++b) {
            if (!kept.covered[b]) continue;
            if (a == b && options.lift_norm != LiftNorm::include_diagonal) continue;
            const double v = lift(s, kept.ids[a], kept.ids[b], options.laplace);
            lifts[size_t(a) * n + b] = v;
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
    }
    if (!(hi > lo))
        fail_numeric("degenerate lift normalization: all lifts in the domain are equal");

    DistanceMatrix d;
    d.source = DistanceSource::lift;
    d.labels = kept_names(kept, registry);
    d.values.assign(size_t(n) * n, 0.0);
    const double range = hi - lo;
    for (uint32_t a = 0; a < n; ++a) {
        for (uint32_t b = a + 1; b < n; ++b) {
            double v = 1.0;
            if (kept.covered[a] && kept.covered[b]) {
                const double l = options.lift_norm == LiftNorm::include_diagonal
                                     ? lifts[size_t(a) * n + b]
                                     : lift(s, kept.ids[a], kept.ids[b], options.laplace);
                double scaled = (l - lo) / range;
                scaled = std::clamp(scaled, 0.0, 1.0); // diagonal may extend the domain
                v = 1.0 - scaled;
            }
            d.values[size_t(a) * n + b] = v;
            d.values[size_t(b) * n + a] = v;
        }
    }
    return d;
}

DistanceMatrix distance_matrix(const CooccurrenceStats& s, const LabelRegistry& registry,
                               DistanceSource source, const MatrixOptions& options) {
    return source == DistanceSource::confidence ? confidence_distance(s, registry, options)
                                                : lift_distance(s, registry, options);
}

namespace {

std::string csv_quote(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += "\"\"";
        else out.push_back(c);
    }
    out += "\"";
    return out;
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    bool quoted = false;
    size_t i = 0;
    while (i <= line.size()) {
        if (i == line.size()) {
            fields.push_back(field);
            break;
        }
        const char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    field.push_back('"');
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                field.push_back(c);
            }
        } else if (c == '"' && field.empty()) {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(field);
            field.clear();
        } else {
            field.push_back(c);
        }
        ++i;
    }
    return fields;
}

} // namespace

std::string distance_csv(const DistanceMatrix& d) {
    const uint32_t n = d.size();
    std::string out = to_string(d.source); // corner cell doubles as the measure tag
    for (uint32_t j = 0; j < n; ++j) {
        out += ',';
        out += csv_quote(d.labels[j]);
    }
    out += '\n';
    for (uint32_t i = 0; i < n; ++i) {
        out += csv_quote(d.labels[i]);
        for (uint32_t j = 0; j < n; ++j) {
            out += ',';
            out += format_sig12(d.at(i, j));
        }
        out += '\n';
    }
    return out;
}

DistanceMatrix parse_distance_csv(std::istream& stream) {
    std::string line;
    if (!std::getline(stream, line)) fail_validation("empty distance CSV");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::vector<std::string> header = split_csv(line);
    if (header.size() < 3) fail_validation("distance CSV header needs at least 2 labels");

    DistanceMatrix d;
    if (header[0] == "lift") d.source = DistanceSource::lift;
    d.labels.assign(header.begin() + 1, header.end());
    const uint32_t n = d.size();
    d.values.assign(size_t(n) * n, 0.0);

    uint32_t row = 0;
    size_t line_no = 1;
    while (std::getline(stream, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (row >= n) fail_validation("distance CSV has more rows than labels");
        const std::vector<std::string> fields = split_csv(line);
        if (fields.size() != size_t(n) + 1)
            fail_validation("line " + std::to_string(line_no) + ": expected " +
                            std::to_string(n + 1) + " fields, got " + std::to_string(fields.size()));
        if (fields[0] != d.labels[row])
            fail_validation("line " + std::to_string(line_no) + ": row label '" + fields[0] +
                            "' does not match header order");
        for (uint32_t j = 0; j < n; ++j) {
            try {
                d.values[size_t(row) * n + j] = std::stod(fields[j + 1]);
            } catch (const std::exception&) {
                fail_validation("line " + std::to_string(line_no) + ": malformed value '" +
                                fields[j + 1] + "'");
            }
        }
        ++row;
    }
    if (row != n) fail_validation("distance CSV has fewer rows than labels");
    d.validate();
    return d;
}

namespace {
constexpr uint32_t kStatsMagic = 0x54535448; // "HTST"
constexpr uint32_t kStatsVersion = 1;
} // namespace

StatsBundle make_stats_bundle(const PredictionDataset& ds) {
    StatsBundle bundle;
    bundle.stats = count_cooccurrences(ds);
    bundle.labels = ds.registry.names();
    bundle.top1 = top1_counts(ds);
    return bundle;
}

void write_stats_file(const StatsBundle& bundle, const std::string& path) {
    std::string out;
    binio::put_u32(out, kStatsMagic);
    binio::put_u32(out, kStatsVersion);
    binio::put_u64(out, bundle.stats.n_sets);
    binio::put_u32(out, bundle.stats.n_labels());
    for (const std::string& name : bundle.labels) binio::put_str(out, name);
    for (uint64_t c : bundle.stats.single) binio::put_u64(out, c);
    for (uint64_t c : bundle.top1) binio::put_u64(out, c);
    for (uint64_t c : bundle.stats.pair_ut) binio::put_u64(out, c);
    write_file_atomic(path, out);
}

StatsBundle read_stats_file(const std::string& path) {
    const std::string data = read_file(path);
    binio::Reader r{data, 0, path};
    if (r.u32() != kStatsMagic) fail_io("not a stats file: " + path);
    const uint32_t version = r.u32();
    if (version != kStatsVersion)
        fail_io("unsupported stats file version " + std::to_string(version) + ": " + path);

    StatsBundle bundle;
    bundle.stats.n_sets = r.u64();
    const uint32_t n = r.u32();
    bundle.labels.reserve(n);
    for (uint32_t i = 0; i < n; ++i) bundle.labels.push_back(r.str());
    bundle.stats.single.resize(n);
    for (uint32_t i = 0; i < n; ++i) bundle.stats.single[i] = r.u64();
    bundle.top1.resize(n);
    for (uint32_t i = 0; i < n; ++i) bundle.top1[i] = r.u64();
    bundle.stats.pair_ut.resize(size_t(n) * (n - 1) / 2);
    for (size_t i = 0; i < bundle.stats.pair_ut.size(); ++i) bundle.stats.pair_ut[i] = r.u64();
    return bundle;
}

} // namespace hiertree
