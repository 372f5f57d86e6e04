#include "hiertree/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>
#include <unordered_set>

#include <json.hpp>

#include "hiertree/diagnose.hpp"
#include "hiertree/error.hpp"
#include "hiertree/evaluate.hpp"
#include "hiertree/io_util.hpp"
#include "hiertree/version.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace hiertree {

namespace {

std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t");
    if (a == std::string::npos) return "";
    size_t b = s.find_last_not_of(" \t");
    return s.substr(a, b - a + 1);
}

std::string unquote(const std::string& s) {
    if (s.size() >= 2 && ((s.front() == '"' && s.back() == '"') ||
                          (s.front() == '\'' && s.back() == '\'')))
        return s.substr(1, s.size() - 2);
    return s;
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> items;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) items.push_back(unquote(item));
    }
    return items;
}

uint32_t parse_u32(const std::string& value, const std::string& key) {
    try {
        size_t pos = 0;
        const unsigned long v = std::stoul(value, &pos);
        if (pos != value.size() || v > UINT32_MAX) throw std::invalid_argument("range");
        return static_cast<uint32_t>(v);
    } catch (const std::exception&) {
        fail_validation("config key '" + key + "': expected a non-negative integer, got '" + value + "'");
    }
}

double parse_f64(const std::string& value, const std::string& key) {
    try {
        size_t pos = 0;
        const double v = std::stod(value, &pos);
        if (pos != value.size()) throw std::invalid_argument("trailing");
        return v;
    } catch (const std::exception&) {
        fail_validation("config key '" + key + "': expected a number, got '" + value + "'");
    }
}

bool parse_bool(const std::string& value, const std::string& key) {
    if (value == "true" || value == "1") return true;
    if (value == "false" || value == "0") return false;
    fail_validation("config key '" + key + "': expected true or false, got '" + value + "'");
}

struct KsToken {
    uint32_t lo = 0, hi = 0; // hi == 0 encodes "N"
    bool lo_is_n = false, hi_is_n = false;
};

std::vector<KsToken> tokenize_ks(const std::string& spec) {
    std::vector<KsToken> tokens;
    for (const std::string& raw : split_list(spec)) {
        KsToken tok;
        const size_t dots = raw.find("..");
        auto parse_end = [&](const std::string& text, uint32_t& value, bool& is_n) {
            const std::string t = trim(text);
            if (t == "N") {
                is_n = true;
                return;
            }
            value = parse_u32(t, "ks");
            if (value < 1) fail_validation("ks values must be >= 1");
        };
        if (dots == std::string::npos) {
            parse_end(raw, tok.lo, tok.lo_is_n);
            tok.hi = tok.lo;
            tok.hi_is_n = tok.lo_is_n;
        } else {
            parse_end(raw.substr(0, dots), tok.lo, tok.lo_is_n);
            parse_end(raw.substr(dots + 2), tok.hi, tok.hi_is_n);
        }
        tokens.push_back(tok);
    }
    if (tokens.empty()) fail_validation("empty ks spec");
    return tokens;
}

} // namespace

std::vector<uint32_t> parse_ks_spec(const std::string& spec, uint32_t n) {
    std::vector<bool> wanted(size_t(n) + 1, false);
    for (const KsToken& tok : tokenize_ks(spec)) {
        const uint32_t lo = tok.lo_is_n ? n : tok.lo;
        const uint32_t hi = tok.hi_is_n ? n : tok.hi;
        if (lo > hi) fail_validation("ks range with lo > hi");
        if (hi > n) fail_validation("ks value " + std::to_string(hi) + " exceeds label count " +
                                    std::to_string(n));
        for (uint32_t k = lo; k <= hi; ++k) wanted[k] = true;
    }
    std::vector<uint32_t> ks;
    for (uint32_t k = 1; k <= n; ++k) {
        if (wanted[k]) ks.push_back(k);
    }
    return ks;
}

PipelineConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail_io("cannot open config: " + path);

    PipelineConfig cfg;
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const size_t eq = line.find('=');
        if (eq == std::string::npos)
            fail_validation(path + ":" + std::to_string(line_no) + ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = unquote(trim(line.substr(eq + 1)));

        if (key == "input") cfg.input = value;
        else if (key == "format") cfg.format = value;
        else if (key == "k") cfg.k = parse_u32(value, key);
        else if (key == "pad_short") cfg.pad_short = parse_bool(value, key);
        else if (key == "eval") cfg.eval = value;
        else if (key == "measures") cfg.measures = split_list(value);
        else if (key == "linkages") cfg.linkages = split_list(value);
        else if (key == "ks") cfg.ks = value;
        else if (key == "out_dir") cfg.out_dir = value;
        else if (key == "uncovered") cfg.uncovered = value;
        else if (key == "laplace") cfg.laplace = parse_f64(value, key);
        else if (key == "lift_norm") cfg.lift_norm = value;
        else if (key == "diag_m") cfg.diag_m = parse_u32(value, key);
        else if (key == "diag_q") cfg.diag_q = parse_u32(value, key);
        else if (key == "diag_measure") cfg.diag_measure = value;
        else if (key == "diag_linkage") cfg.diag_linkage = value;
        else if (key == "threads") cfg.threads = parse_u32(value, key);
        else fail_validation(path + ":" + std::to_string(line_no) + ": unknown key '" + key + "'");
    }
    return cfg;
}

namespace {

UncoveredPolicy uncovered_from_string(const std::string& s) {
    if (s == "error") return UncoveredPolicy::error;
    if (s == "drop") return UncoveredPolicy::drop;
    if (s == "keep") return UncoveredPolicy::keep;
    fail_validation("unknown uncovered policy '" + s + "' (expected error, drop or keep)");
}

LiftNorm lift_norm_from_string(const std::string& s) {
    if (s == "off-diagonal") return LiftNorm::off_diagonal;
    if (s == "include-diagonal") return LiftNorm::include_diagonal;
    fail_validation("unknown lift normalization '" + s +
                    "' (expected off-diagonal or include-diagonal)");
}

} // namespace

MatrixOptions matrix_options_from(const PipelineConfig& cfg) {
    MatrixOptions options;
    options.laplace = cfg.laplace;
    options.lift_norm = lift_norm_from_string(cfg.lift_norm);
    options.uncovered = uncovered_from_string(cfg.uncovered);
    return options;
}

void validate_config(const PipelineConfig& cfg) {
    if (cfg.input.empty()) fail_validation("config: input is required");
    if (cfg.eval.empty()) fail_validation("config: eval is required");
    if (cfg.out_dir.empty()) fail_validation("config: out_dir is required");
    log_format_from_string(cfg.format);
    if (cfg.k < 1) fail_validation("config: k must be >= 1");
    if (cfg.laplace < 0.0) fail_validation("config: laplace must be >= 0");
    if (cfg.diag_m < 2) fail_validation("config: diag_m must be >= 2");
    if (cfg.measures.empty()) fail_validation("config: measures must not be empty");
    if (cfg.linkages.empty()) fail_validation("config: linkages must not be empty");
    for (const std::string& m : cfg.measures) distance_source_from_string(m);
    for (const std::string& l : cfg.linkages) linkage_from_string(l);
    uncovered_from_string(cfg.uncovered);
    lift_norm_from_string(cfg.lift_norm);
    tokenize_ks(cfg.ks);
    distance_source_from_string(cfg.diag_measure);
    linkage_from_string(cfg.diag_linkage);
    if (std::find(cfg.measures.begin(), cfg.measures.end(), cfg.diag_measure) == cfg.measures.end())
        fail_validation("config: diag_measure must be one of the configured measures");
    if (std::find(cfg.linkages.begin(), cfg.linkages.end(), cfg.diag_linkage) == cfg.linkages.end())
        fail_validation("config: diag_linkage must be one of the configured linkages");
    if (!fs::exists(cfg.input)) fail_io("input file does not exist: " + cfg.input);
    if (!fs::exists(cfg.eval)) fail_io("eval file does not exist: " + cfg.eval);
}

namespace {

json config_echo(const PipelineConfig& cfg) {
    json j;
    j["input"] = cfg.input;
    j["format"] = cfg.format;
    j["k"] = cfg.k;
    j["pad_short"] = cfg.pad_short;
    j["eval"] = cfg.eval;
    j["measures"] = cfg.measures;
    j["linkages"] = cfg.linkages;
    j["ks"] = cfg.ks;
    j["out_dir"] = cfg.out_dir;
    j["uncovered"] = cfg.uncovered;
    j["laplace"] = cfg.laplace;
    j["lift_norm"] = cfg.lift_norm;
    j["diag_m"] = cfg.diag_m;
    j["diag_q"] = cfg.diag_q;
    j["diag_measure"] = cfg.diag_measure;
    j["diag_linkage"] = cfg.diag_linkage;
    return j;
}

struct GridCell {
    std::string measure;
    std::string linkage;
};

} // namespace

GridResult run_grid(const PipelineConfig& cfg) {
    validate_config(cfg);
    const MatrixOptions options = matrix_options_from(cfg);

    fs::create_directories(cfg.out_dir);
    const fs::path out_dir(cfg.out_dir);
    std::vector<std::string> artifacts;

    // Stage: ingest
    PredictionDataset ds = [&] {
        std::ifstream in(cfg.input, std::ios::binary);
        if (!in) fail_io("[ingest] cannot open: " + cfg.input);
        ParseOptions parse_options;
        parse_options.format = log_format_from_string(cfg.format);
        parse_options.k = cfg.k;
        parse_options.pad_short = cfg.pad_short;
        return parse_predictions(in, parse_options);
    }();
    const StatsBundle bundle = make_stats_bundle(ds);

    // Stage: distance, one matrix per measure, shared across linkages
    std::vector<DistanceMatrix> matrices;
    for (const std::string& measure : cfg.measures) {
        DistanceMatrix d = distance_matrix(bundle.stats, ds.registry,
                                           distance_source_from_string(measure), options);
        const std::string path = (out_dir / (measure + ".distance.csv")).string();
        write_file_atomic(path, distance_csv(d));
        artifacts.push_back(path);
        matrices.push_back(std::move(d));
    }
    const std::vector<std::string>& tree_labels = matrices.front().labels;

    // Stage: eval (shared label universe; warn on video overlap)
    EvalSet eval = [&] {
        std::ifstream in(cfg.eval, std::ios::binary);
        if (!in) fail_io("[eval] cannot open: " + cfg.eval);
        return parse_eval_jsonl(in, tree_labels);
    }();
    {
        std::unordered_set<std::string> mining_ids;
        for (const PredictionRecord& rec : ds.records) mining_ids.insert(rec.video_id);
        size_t overlap = 0;
        for (const EvalRecord& rec : eval.records) {
            if (!rec.video_id.empty() && mining_ids.count(rec.video_id)) ++overlap;
        }
        if (overlap > 0) {
            std::cerr << "warning: " << overlap
                      << " evaluation video(s) overlap the similarity-mining dataset\n";
        }
    }

    const std::vector<uint32_t> ks = parse_ks_spec(cfg.ks, static_cast<uint32_t>(tree_labels.size()));

    // Stage: grid cells, independent parallel jobs
    std::vector<GridCell> cells;
    for (const std::string& measure : cfg.measures) {
        for (const std::string& linkage : cfg.linkages) cells.push_back(GridCell{measure, linkage});
    }
    std::vector<Dendrogram> trees(cells.size());
    std::vector<AccuracyCurve> curves(cells.size());
    std::vector<std::vector<std::string>> cell_artifacts(cells.size());
    std::vector<std::exception_ptr> failures(cells.size());

    auto run_cell = [&](size_t idx) {
        const GridCell& cell = cells[idx];
        size_t measure_index = 0;
        for (size_t m = 0; m < cfg.measures.size(); ++m) {
            if (cfg.measures[m] == cell.measure) measure_index = m;
        }
        Dendrogram tree = agglomerate(matrices[measure_index], linkage_from_string(cell.linkage));
        const std::string stem = cell.measure + "_" + cell.linkage;

        const std::string tree_path = (out_dir / (stem + ".tree.json")).string();
        write_file_atomic(tree_path, export_tree_json(tree));
        cell_artifacts[idx].push_back(tree_path);

        const std::string newick_path = (out_dir / (stem + ".newick")).string();
        write_file_atomic(newick_path, export_newick(tree));
        cell_artifacts[idx].push_back(newick_path);

        AccuracyCurve curve = accuracy_curve(tree, eval, ks);
        const std::string curve_path = (out_dir / (stem + ".curve.csv")).string();
        write_file_atomic(curve_path, curve_csv(curve, tree.n_leaves));
        cell_artifacts[idx].push_back(curve_path);

        trees[idx] = std::move(tree);
        curves[idx] = std::move(curve);
    };

    unsigned n_threads = cfg.threads != 0 ? cfg.threads : std::thread::hardware_concurrency();
    n_threads = std::max(1u, std::min<unsigned>(n_threads, static_cast<unsigned>(cells.size())));
    if (n_threads <= 1) {
        for (size_t i = 0; i < cells.size(); ++i) run_cell(i);
    } else {
        std::atomic<size_t> next{0};
        std::vector<std::thread> workers;
        for (unsigned w = 0; w < n_threads; ++w) {
            workers.emplace_back([&] {
                while (true) {
                    const size_t i = next.fetch_add(1);
                    if (i >= cells.size()) break;
                    try {
                        run_cell(i);
                    } catch (...) {
                        failures[i] = std::current_exception();
                    }
                }
            });
        }
        for (std::thread& w : workers) w.join();
        for (const std::exception_ptr& e : failures) {
            if (e) std::rethrow_exception(e);
        }
    }
    for (const std::vector<std::string>& paths : cell_artifacts) {
        artifacts.insert(artifacts.end(), paths.begin(), paths.end());
    }

    // Stage: comparison
    std::vector<MethodCurve> method_curves;
    for (size_t i = 0; i < cells.size(); ++i) {
        method_curves.push_back(MethodCurve{cells[i].measure, cells[i].linkage, curves[i]});
    }
    const ComparisonReport report = compare_methods(method_curves);
    const std::string ranking_path = (out_dir / "comparison_ranking.csv").string();
    write_file_atomic(ranking_path, comparison_ranking_csv(report));
    artifacts.push_back(ranking_path);
    const std::string per_k_path = (out_dir / "comparison_per_k.csv").string();
    write_file_atomic(per_k_path, comparison_per_k_csv(report));
    artifacts.push_back(per_k_path);

    // Stage: diagnostics on the configured cell
    size_t diag_index = 0;
    for (size_t i = 0; i < cells.size(); ++i) {
        if (cells[i].measure == cfg.diag_measure && cells[i].linkage == cfg.diag_linkage)
            diag_index = i;
    }
    const uint32_t q = std::min<uint32_t>(cfg.diag_q, static_cast<uint32_t>(tree_labels.size()));
    const DiagnosticsReport diag = late_merger_report(trees[diag_index], bundle, cfg.diag_m, q);
    const std::string diag_path = (out_dir / "diagnostics.json").string();
    write_file_atomic(diag_path, diagnostics_json(diag, trees[diag_index].labels));
    artifacts.push_back(diag_path);

    // Manifest ties the run together
    std::sort(artifacts.begin(), artifacts.end());
    json manifest;
    manifest["generator"] = version_string();
    manifest["config"] = config_echo(cfg);
    json names = json::array();
    for (const std::string& path : artifacts) names.push_back(fs::path(path).filename().string());
    manifest["artifacts"] = std::move(names);
    const std::string manifest_path = (out_dir / "manifest.json").string();
    write_file_atomic(manifest_path, manifest.dump(2) + "\n");
    artifacts.push_back(manifest_path);

    std::sort(artifacts.begin(), artifacts.end());
    GridResult result;
    result.artifacts = std::move(artifacts);
    return result;
}

} // namespace hiertree
