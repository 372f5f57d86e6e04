#include "hiertree/ingest.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <sstream>

#include <json.hpp>

#include "binio.hpp"
#include "hiertree/error.hpp"
#include "hiertree/io_util.hpp"

using json = nlohmann::json;

namespace hiertree {

uint32_t LabelRegistry::add(const std::string& name) {
    auto it = index_.find(name);
    if (it != index_.end()) return it->second;
    const uint32_t id = static_cast<uint32_t>(names_.size());
    names_.push_back(name);
    index_.emplace(name, id);
    return id;
}

std::optional<uint32_t> LabelRegistry::find(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

void PredictionDataset::validate() const {
    if (records.empty()) fail_validation("no records");
    if (registry.size() < 2) fail_validation("registry must contain at least 2 labels");
    if (k < 1) fail_validation("k must be >= 1");
    for (uint32_t id = 0; id < registry.size(); ++id) {
        if (registry.name(id).empty()) fail_validation("empty label name in registry");
    }
    for (size_t r = 0; r < records.size(); ++r) {
        const PredictionRecord& rec = records[r];
        const std::string where = "record " + std::to_string(r) + " (" + rec.video_id + ")";
        if (rec.top.empty() || rec.top.size() > k)
            fail_validation(where + ": top list size " + std::to_string(rec.top.size()) +
                            " outside 1.." + std::to_string(k));
        if (rec.truth && *rec.truth >= registry.size())
            fail_validation(where + ": truth id out of range");
        const bool scored = rec.top.front().score.has_value();
        double prev = 1.0;
        std::vector<uint32_t> seen;
        for (const TopEntry& e : rec.top) {
            if (e.label >= registry.size()) fail_validation(where + ": label id out of range");
            if (std::find(seen.begin(), seen.end(), e.label) != seen.end())
                fail_validation(where + ": duplicate label '" + registry.name(e.label) + "' in top list");
            seen.push_back(e.label);
            if (e.score.has_value() != scored)
                fail_validation(where + ": mixes scored and unscored entries");
            if (e.score) {
                const double s = *e.score;
                if (!(s >= 0.0 && s <= 1.0)) fail_validation(where + ": score outside [0,1]");
                if (s > prev) fail_validation(where + ": scores not non-increasing");
                prev = s;
            }
        }
    }
}

namespace {

struct RawEntry {
    std::string label;
    std::optional<double> score;
};

struct RawRecord {
    std::string video_id;
    std::optional<std::string> truth;
    std::vector<RawEntry> entries;
};

[[noreturn]] void line_error(size_t line_no, const std::string& msg) {
    fail_validation("line " + std::to_string(line_no) + ": " + msg);
}

RawRecord parse_jsonl_line(const std::string& line, size_t line_no) {
    json j;
    try {
        j = json::parse(line);
    } catch (const json::parse_error& e) {
        line_error(line_no, std::string("malformed JSON (") + e.what() + ")");
    }
    if (!j.is_object()) line_error(line_no, "record is not an object");

    RawRecord rec;
    if (!j.contains("video_id") || !j["video_id"].is_string())
        line_error(line_no, "missing or non-string video_id");
    rec.video_id = j["video_id"].get<std::string>();

    if (j.contains("truth") && !j["truth"].is_null()) {
        if (!j["truth"].is_string()) line_error(line_no, "truth must be a string or null");
        rec.truth = j["truth"].get<std::string>();
    }

    if (!j.contains("top") || !j["top"].is_array() || j["top"].empty())
        line_error(line_no, "missing or empty top array");
    for (const json& e : j["top"]) {
        if (!e.is_object() || !e.contains("label") || !e["label"].is_string())
            line_error(line_no, "top entry missing string label");
        RawEntry entry;
        entry.label = e["label"].get<std::string>();
        if (e.contains("score") && !e["score"].is_null()) {
            if (!e["score"].is_number()) line_error(line_no, "score must be a number");
            entry.score = e["score"].get<double>();
        }
        rec.entries.push_back(std::move(entry));
    }
    return rec;
}

// RFC 4180 style fields: optional double quotes with "" escapes.
std::vector<std::string> split_csv_line(const std::string& line, size_t line_no) {
    std::vector<std::string> fields;
    std::string field;
    bool quoted = false;
    size_t i = 0;
    while (i <= line.size()) {
        if (i == line.size()) {
            if (quoted) line_error(line_no, "unterminated quoted field");
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

RawRecord parse_csv_line(const std::string& line, size_t line_no) {
    const std::vector<std::string> fields = split_csv_line(line, line_no);
    if (fields.size() < 4 || (fields.size() - 2) % 2 != 0)
        line_error(line_no, "expected video_id,truth,label1,score1,...");
    RawRecord rec;
    rec.video_id = fields[0];
    if (!fields[1].empty()) rec.truth = fields[1];
    for (size_t f = 2; f + 1 < fields.size(); f += 2) {
        RawEntry entry;
        entry.label = fields[f];
        if (entry.label.empty()) line_error(line_no, "empty label name");
        if (!fields[f + 1].empty()) {
            try {
                size_t pos = 0;
                entry.score = std::stod(fields[f + 1], &pos);
                if (pos != fields[f + 1].size()) throw std::invalid_argument("trailing");
            } catch (const std::exception&) {
                line_error(line_no, "malformed score '" + fields[f + 1] + "'");
            }
        }
        rec.entries.push_back(std::move(entry));
    }
    return rec;
}

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

} // namespace

LogFormat log_format_from_string(const std::string& s) {
    if (s == "jsonl") return LogFormat::jsonl;
    if (s == "csv") return LogFormat::csv;
    fail_validation("unknown log format '" + s + "' (expected jsonl or csv)");
}

PredictionDataset parse_predictions(std::istream& stream, const ParseOptions& options) {
    if (options.k < 1) fail_validation("k must be >= 1");

    PredictionDataset ds;
    ds.k = options.k;

    std::string line;
    size_t line_no = 0;
    bool saw_header = false;
    while (std::getline(stream, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (options.format == LogFormat::csv && !saw_header) {
            saw_header = true;
            if (line.rfind("video_id", 0) != 0)
                line_error(line_no, "expected CSV header starting with 'video_id'");
            continue;
        }

        RawRecord raw = options.format == LogFormat::jsonl ? parse_jsonl_line(line, line_no)
                                                           : parse_csv_line(line, line_no);

        // Per-line validation happens here so errors carry the line number.
        for (size_t a = 0; a < raw.entries.size(); ++a) {
            if (raw.entries[a].label.empty()) line_error(line_no, "empty label name");
            for (size_t b = a + 1; b < raw.entries.size(); ++b) {
                if (raw.entries[a].label == raw.entries[b].label)
                    line_error(line_no, "duplicate label '" + raw.entries[a].label + "' in top list");
            }
        }
        const bool scored = raw.entries.front().score.has_value();
        for (const RawEntry& e : raw.entries) {
            if (e.score.has_value() != scored)
                line_error(line_no, "record mixes scored and unscored entries");
            if (e.score && !(*e.score >= 0.0 && *e.score <= 1.0))
                line_error(line_no, "score outside [0,1]");
        }
        if (raw.entries.size() < options.k && !options.pad_short)
            line_error(line_no, "record has " + std::to_string(raw.entries.size()) +
                                " predictions, fewer than k=" + std::to_string(options.k) +
                                " (use --pad-short to accept)");

        // Highest k scores win; stable, so equal scores keep listed order and
        // unscored records keep their ranking as given.
        std::vector<size_t> order(raw.entries.size());
        for (size_t i = 0; i < order.size(); ++i) order[i] = i;
        if (scored) {
            std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
                return *raw.entries[a].score > *raw.entries[b].score;
            });
        }
        const size_t keep = std::min<size_t>(options.k, order.size());

        PredictionRecord rec;
        rec.video_id = std::move(raw.video_id);
        if (raw.truth) rec.truth = ds.registry.add(*raw.truth);
        rec.top.reserve(keep);
        for (size_t i = 0; i < keep; ++i) {
            const RawEntry& e = raw.entries[order[i]];
            rec.top.push_back(TopEntry{ds.registry.add(e.label), e.score});
        }
        ds.records.push_back(std::move(rec));
    }

    if (ds.records.empty()) fail_validation("no records");
    ds.validate();
    return ds;
}

std::string serialize_jsonl(const PredictionDataset& ds) {
    std::string out;
    for (const PredictionRecord& rec : ds.records) {
        json j;
        j["video_id"] = rec.video_id;
        j["truth"] = rec.truth ? json(ds.registry.name(*rec.truth)) : json(nullptr);
        json top = json::array();
        for (const TopEntry& e : rec.top) {
            json entry;
            entry["label"] = ds.registry.name(e.label);
            if (e.score) entry["score"] = *e.score;
            top.push_back(std::move(entry));
        }
        j["top"] = std::move(top);
        out += j.dump();
        out += '\n';
    }
    return out;
}

namespace {

constexpr uint32_t kDatasetMagic = 0x53445448; // "HTDS"
constexpr uint32_t kDatasetVersion = 1;

using binio::put_f64;
using binio::put_str;
using binio::put_u32;
using binio::put_u64;

} // namespace

void write_dataset_file(const PredictionDataset& ds, const std::string& path) {
    std::string out;
    put_u32(out, kDatasetMagic);
    put_u32(out, kDatasetVersion);
    put_u32(out, ds.k);
    put_u32(out, ds.registry.size());
    for (uint32_t id = 0; id < ds.registry.size(); ++id) put_str(out, ds.registry.name(id));
    put_u64(out, ds.records.size());
    for (const PredictionRecord& rec : ds.records) {
        put_str(out, rec.video_id);
        put_u32(out, rec.truth ? *rec.truth : UINT32_MAX);
        put_u32(out, static_cast<uint32_t>(rec.top.size()));
        for (const TopEntry& e : rec.top) {
            put_u32(out, e.label);
            put_u32(out, e.score ? 1u : 0u);
            put_f64(out, e.score ? *e.score : 0.0);
        }
    }
    write_file_atomic(path, out);
}

PredictionDataset read_dataset_file(const std::string& path) {
    const std::string data = read_file(path);
    binio::Reader r{data, 0, path};
    if (r.u32() != kDatasetMagic) fail_io("not a dataset file: " + path);
    const uint32_t version = r.u32();
    if (version != kDatasetVersion)
        fail_io("unsupported dataset file version " + std::to_string(version) + ": " + path);

    PredictionDataset ds;
    ds.k = r.u32();
    const uint32_t n_labels = r.u32();
    for (uint32_t i = 0; i < n_labels; ++i) ds.registry.add(r.str());
    const uint64_t n_records = r.u64();
    ds.records.reserve(n_records);
    for (uint64_t i = 0; i < n_records; ++i) {
        PredictionRecord rec;
        rec.video_id = r.str();
        const uint32_t truth = r.u32();
        if (truth != UINT32_MAX) rec.truth = truth;
        const uint32_t n_top = r.u32();
        rec.top.reserve(n_top);
        for (uint32_t e = 0; e < n_top; ++e) {
            TopEntry entry;
            entry.label = r.u32();
            const bool has_score = r.u32() != 0;
            const double score = r.f64();
            if (has_score) entry.score = score;
            rec.top.push_back(entry);
        }
        ds.records.push_back(std::move(rec));
    }
    ds.validate();
    return ds;
}

CoverageReport coverage_report(const PredictionDataset& ds) {
    CoverageReport report;
    report.count.assign(ds.registry.size(), 0);
    for (const PredictionRecord& rec : ds.records) {
        for (const TopEntry& e : rec.top) ++report.count[e.label];
    }
    for (uint32_t id = 0; id < report.count.size(); ++id) {
        if (report.count[id] == 0) report.uncovered.push_back(id);
    }
    return report;
}

std::string coverage_csv(const CoverageReport& report, const LabelRegistry& registry) {
    std::string out = "label,count,covered\n";
    for (uint32_t id = 0; id < registry.size(); ++id) {
        out += csv_quote(registry.name(id));
        out += ',';
        out += std::to_string(report.count[id]);
        out += ',';
        out += report.count[id] > 0 ? '1' : '0';
        out += '\n';
    }
    return out;
}

} // namespace hiertree
