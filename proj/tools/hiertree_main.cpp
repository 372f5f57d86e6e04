// hiertree: induce label hierarchies from top-k prediction co-occurrence,
// evaluate them level by level, and diagnose under-identified labels.

#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "hiertree/diagnose.hpp"
#include "hiertree/error.hpp"
#include "hiertree/evaluate.hpp"
#include "hiertree/io_util.hpp"
#include "hiertree/pipeline.hpp"
#include "hiertree/synth.hpp"
#include "hiertree/version.hpp"

using namespace hiertree;
using json = nlohmann::json;

namespace {

// "-" means stdin/stdout for the text-based commands.
std::ifstream open_input(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail_io("cannot open: " + path);
    return in;
}

void emit(const std::string& path, const std::string& content) {
    if (path == "-") {
        std::cout << content;
        return;
    }
    write_file_atomic(path, content);
}

struct IngestArgs {
    std::string in = "-";
    std::string format = "jsonl";
    uint32_t k = 5;
    bool pad_short = false;
    std::string out;
    std::string coverage_out;
};

void run_ingest(const IngestArgs& args) {
    ParseOptions options;
    options.format = log_format_from_string(args.format);
    options.k = args.k;
    options.pad_short = args.pad_short;

    PredictionDataset ds;
    if (args.in == "-") {
        ds = parse_predictions(std::cin, options);
    } else {
        std::ifstream in = open_input(args.in);
        ds = parse_predictions(in, options);
    }
    write_dataset_file(ds, args.out);

    const CoverageReport coverage = coverage_report(ds);
    if (!args.coverage_out.empty()) emit(args.coverage_out, coverage_csv(coverage, ds.registry));
    std::cerr << "ingested " << ds.records.size() << " records over " << ds.registry.size()
              << " labels (" << coverage.uncovered.size() << " uncovered)\n";
}

struct DistanceArgs {
    std::string in;
    std::string measure = "confidence";
    std::string out;
    std::string stats_out;
    std::string uncovered = "error";
    bool drop_uncovered = false;
    double laplace = 0.0;
    std::string lift_norm = "off-diagonal";
};

void run_distance(const DistanceArgs& args) {
    PipelineConfig opt_source;
    opt_source.uncovered = args.drop_uncovered ? "drop" : args.uncovered;
    opt_source.laplace = args.laplace;
    opt_source.lift_norm = args.lift_norm;
    const MatrixOptions options = matrix_options_from(opt_source);
    if (args.laplace < 0.0) fail_validation("--laplace must be >= 0");

    const PredictionDataset ds = read_dataset_file(args.in);
    const StatsBundle bundle = make_stats_bundle(ds);
    // stats first: they stay useful for diagnosing coverage problems even
    // when the distance computation refuses the input
    if (!args.stats_out.empty()) write_stats_file(bundle, args.stats_out);
    const DistanceMatrix d =
        distance_matrix(bundle.stats, ds.registry, distance_source_from_string(args.measure), options);
    emit(args.out, distance_csv(d));
}

struct ClusterArgs {
    std::string in;
    std::string linkage;
    std::string out;
};

void run_cluster(const ClusterArgs& args) {
    std::ifstream in = open_input(args.in);
    const DistanceMatrix d = parse_distance_csv(in);
    const Dendrogram tree = agglomerate(d, linkage_from_string(args.linkage));
    emit(args.out, export_tree_json(tree));
}

struct CutArgs {
    std::string tree;
    uint32_t k = 1;
    std::string out = "-";
};

void run_cut(const CutArgs& args) {
    const Dendrogram tree = read_tree_file(args.tree);
    const CutAssignment assignment = cut(tree, args.k);
    json j;
    j["generator"] = version_string();
    j["k"] = assignment.k;
    j["labels"] = tree.labels;
    j["cluster"] = assignment.member;
    emit(args.out, j.dump(2) + "\n");
}

struct AccuracyArgs {
    std::string tree;
    std::string eval;
    std::string ks = "1..N";
    uint32_t top_m = 1;
    std::string out = "-";
};

void run_accuracy(const AccuracyArgs& args) {
    const Dendrogram tree = read_tree_file(args.tree);
    std::ifstream in = open_input(args.eval);
    const EvalSet eval = parse_eval_jsonl(in, tree.labels);
    const std::vector<uint32_t> ks = parse_ks_spec(args.ks, tree.n_leaves);
    const AccuracyCurve curve = accuracy_curve(tree, eval, ks, args.top_m);
    emit(args.out, curve_csv(curve, tree.n_leaves));
}

struct DiagnoseArgs {
    std::string tree;
    std::string stats;
    uint32_t m = 3;
    uint32_t q = 50;
    std::string out = "-";
};

void run_diagnose(const DiagnoseArgs& args) {
    const Dendrogram tree = read_tree_file(args.tree);
    const StatsBundle bundle = read_stats_file(args.stats);
    const uint32_t q = std::min(args.q, tree.n_leaves);
    const DiagnosticsReport report = late_merger_report(tree, bundle, args.m, q);
    emit(args.out, diagnostics_json(report, tree.labels));
}

struct ExportArgs {
    std::string in;
    std::string format = "newick";
    std::string out = "-";
};

void run_export(const ExportArgs& args) {
    const Dendrogram tree = read_tree_file(args.in);
    emit(args.out, export_tree(tree, tree_format_from_string(args.format)));
}

struct SynthArgs {
    PlantedConfig cfg;
    std::string out;
    std::string truth_out;
};

void run_synth(const SynthArgs& args) {
    const PlantedData data = generate_planted(args.cfg);
    emit(args.out, serialize_jsonl(data.dataset));
    if (!args.truth_out.empty())
        emit(args.truth_out, partition_json(data.dataset.registry.names(), data.group));
    std::cerr << "generated " << data.dataset.records.size() << " records over "
              << data.dataset.registry.size() << " labels\n";
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"machine-generated label hierarchies from top-k prediction co-occurrence"};
    app.set_version_flag("--version", version_string());
    app.require_subcommand(1);

    IngestArgs ingest_args;
    CLI::App* ingest_cmd = app.add_subcommand("ingest", "parse a prediction log into a dataset cache");
    ingest_cmd->add_option("--in", ingest_args.in, "input path, or - for stdin");
    ingest_cmd->add_option("--format", ingest_args.format, "jsonl or csv");
    ingest_cmd->add_option("--k", ingest_args.k, "top-k set size");
    ingest_cmd->add_flag("--pad-short", ingest_args.pad_short,
                         "accept records with fewer than k predictions as smaller sets");
    ingest_cmd->add_option("--out", ingest_args.out, "dataset cache output")->required();
    ingest_cmd->add_option("--coverage-out", ingest_args.coverage_out, "per-label appearance CSV");
    ingest_cmd->callback([&] { run_ingest(ingest_args); });

    DistanceArgs distance_args;
    CLI::App* distance_cmd = app.add_subcommand("distance", "label-to-label distance matrix");
    distance_cmd->add_option("--in", distance_args.in, "dataset cache")->required();
    distance_cmd->add_option("--measure", distance_args.measure, "confidence or lift");
    distance_cmd->add_option("--out", distance_args.out, "distance CSV output")->required();
    distance_cmd->add_option("--stats-out", distance_args.stats_out, "co-occurrence stats output");
    distance_cmd->add_option("--uncovered", distance_args.uncovered,
                             "zero-coverage label policy: error, drop or keep");
    distance_cmd->add_flag("--drop-uncovered", distance_args.drop_uncovered,
                           "shorthand for --uncovered drop");
    distance_cmd->add_option("--laplace", distance_args.laplace, "smoothing added to pair counts");
    distance_cmd->add_option("--lift-norm", distance_args.lift_norm,
                             "off-diagonal or include-diagonal");
    distance_cmd->callback([&] { run_distance(distance_args); });

    ClusterArgs cluster_args;
    CLI::App* cluster_cmd = app.add_subcommand("cluster", "agglomerate a distance matrix");
    cluster_cmd->add_option("--in", cluster_args.in, "distance CSV")->required();
    cluster_cmd->add_option("--linkage", cluster_args.linkage,
                            "single, complete, average, weighted or ward")->required();
    cluster_cmd->add_option("--out", cluster_args.out, "tree JSON output")->required();
    cluster_cmd->callback([&] { run_cluster(cluster_args); });

    CutArgs cut_args;
    CLI::App* cut_cmd = app.add_subcommand("cut", "flat clusters from a tree");
    cut_cmd->add_option("--tree", cut_args.tree, "tree JSON")->required();
    cut_cmd->add_option("--k", cut_args.k, "cluster count")->required();
    cut_cmd->add_option("--out", cut_args.out, "assignment JSON output, - for stdout");
    cut_cmd->callback([&] { run_cut(cut_args); });

    AccuracyArgs accuracy_args;
    CLI::App* accuracy_cmd = app.add_subcommand("accuracy", "accuracy at every hierarchy level");
    accuracy_cmd->add_option("--tree", accuracy_args.tree, "tree JSON")->required();
    accuracy_cmd->add_option("--eval", accuracy_args.eval, "evaluation JSONL")->required();
    accuracy_cmd->add_option("--ks", accuracy_args.ks, "k grid, e.g. 1..N or 1,5,10..20");
    accuracy_cmd->add_option("--topm", accuracy_args.top_m,
                             "credit any of the top m predictions (non-standard scoring)");
    accuracy_cmd->add_option("--out", accuracy_args.out, "curve CSV output, - for stdout");
    accuracy_cmd->callback([&] { run_accuracy(accuracy_args); });

    DiagnoseArgs diagnose_args;
    CLI::App* diagnose_cmd = app.add_subcommand("diagnose", "late-merger / under-identification report");
    diagnose_cmd->add_option("--tree", diagnose_args.tree, "tree JSON")->required();
    diagnose_cmd->add_option("--stats", diagnose_args.stats, "co-occurrence stats file")->required();
    diagnose_cmd->add_option("--m", diagnose_args.m, "smallest meaningful cluster size");
    diagnose_cmd->add_option("--q", diagnose_args.q, "labels per report group");
    diagnose_cmd->add_option("--out", diagnose_args.out, "report JSON output, - for stdout");
    diagnose_cmd->callback([&] { run_diagnose(diagnose_args); });

    ExportArgs export_args;
    CLI::App* export_cmd = app.add_subcommand("export", "render a tree as newick, dot or json");
    export_cmd->add_option("--in", export_args.in, "tree JSON")->required();
    export_cmd->add_option("--format", export_args.format, "newick, dot or json");
    export_cmd->add_option("--out", export_args.out, "output path, - for stdout");
    export_cmd->callback([&] { run_export(export_args); });

    SynthArgs synth_args;
    CLI::App* synth_cmd = app.add_subcommand("synth", "synthetic dataset with a planted hierarchy");
    synth_cmd->add_option("--groups", synth_args.cfg.groups, "planted group count");
    synth_cmd->add_option("--labels-per-group", synth_args.cfg.labels_per_group, "labels per group");
    synth_cmd->add_option("--videos", synth_args.cfg.videos_per_label, "videos per label");
    synth_cmd->add_option("--k", synth_args.cfg.k, "top-k set size");
    synth_cmd->add_option("--p-in", synth_args.cfg.p_in, "within-group co-prediction probability");
    synth_cmd->add_option("--seed", synth_args.cfg.seed, "RNG seed");
    synth_cmd->add_option("--sparse-label", synth_args.cfg.sparse_label,
                          "label id starved of data (-1 for none)");
    synth_cmd->add_option("--sparse-divisor", synth_args.cfg.sparse_divisor,
                          "scarcity factor for the sparse label");
    synth_cmd->add_option("--out", synth_args.out, "JSONL output")->required();
    synth_cmd->add_option("--truth-out", synth_args.truth_out, "planted partition JSON output");
    synth_cmd->callback([&] { run_synth(synth_args); });

    PipelineConfig grid_cfg;
    std::string grid_config_path;
    std::string grid_measures, grid_linkages;
    CLI::App* grid_cmd = app.add_subcommand("grid", "full measure x linkage experiment grid");
    grid_cmd->add_option("--config", grid_config_path, "key = value config file");
    CLI::Option* o_input = grid_cmd->add_option("--input", grid_cfg.input, "prediction log");
    CLI::Option* o_format = grid_cmd->add_option("--format", grid_cfg.format, "jsonl or csv");
    CLI::Option* o_k = grid_cmd->add_option("--k", grid_cfg.k, "top-k set size");
    CLI::Option* o_pad = grid_cmd->add_flag("--pad-short", grid_cfg.pad_short, "accept short records");
    CLI::Option* o_eval = grid_cmd->add_option("--eval", grid_cfg.eval, "evaluation JSONL");
    CLI::Option* o_measures = grid_cmd->add_option("--measures", grid_measures, "comma list");
    CLI::Option* o_linkages = grid_cmd->add_option("--linkages", grid_linkages, "comma list");
    CLI::Option* o_ks = grid_cmd->add_option("--ks", grid_cfg.ks, "k grid spec");
    CLI::Option* o_out = grid_cmd->add_option("--out-dir", grid_cfg.out_dir, "artifact directory");
    CLI::Option* o_unc = grid_cmd->add_option("--uncovered", grid_cfg.uncovered, "error, drop or keep");
    CLI::Option* o_lap = grid_cmd->add_option("--laplace", grid_cfg.laplace, "pair count smoothing");
    CLI::Option* o_ln = grid_cmd->add_option("--lift-norm", grid_cfg.lift_norm,
                                             "off-diagonal or include-diagonal");
    CLI::Option* o_dm = grid_cmd->add_option("--diag-m", grid_cfg.diag_m, "meaningful cluster size");
    CLI::Option* o_dq = grid_cmd->add_option("--diag-q", grid_cfg.diag_q, "labels per report group");
    CLI::Option* o_dme = grid_cmd->add_option("--diag-measure", grid_cfg.diag_measure,
                                              "measure for the diagnostics tree");
    CLI::Option* o_dli = grid_cmd->add_option("--diag-linkage", grid_cfg.diag_linkage,
                                              "linkage for the diagnostics tree");
    CLI::Option* o_thr = grid_cmd->add_option("--threads", grid_cfg.threads, "cell workers, 0 = auto");
    grid_cmd->callback([&] {
        PipelineConfig cfg;
        if (!grid_config_path.empty()) cfg = load_config_file(grid_config_path);
        // flags win over the config file
        if (o_input->count()) cfg.input = grid_cfg.input;
        if (o_format->count()) cfg.format = grid_cfg.format;
        if (o_k->count()) cfg.k = grid_cfg.k;
        if (o_pad->count()) cfg.pad_short = grid_cfg.pad_short;
        if (o_eval->count()) cfg.eval = grid_cfg.eval;
        if (o_measures->count()) {
            cfg.measures.clear();
            std::stringstream ss(grid_measures);
            std::string item;
            while (std::getline(ss, item, ',')) {
                if (!item.empty()) cfg.measures.push_back(item);
            }
        }
        if (o_linkages->count()) {
            cfg.linkages.clear();
            std::stringstream ss(grid_linkages);
            std::string item;
            while (std::getline(ss, item, ',')) {
                if (!item.empty()) cfg.linkages.push_back(item);
            }
        }
        if (o_ks->count()) cfg.ks = grid_cfg.ks;
        if (o_out->count()) cfg.out_dir = grid_cfg.out_dir;
        if (o_unc->count()) cfg.uncovered = grid_cfg.uncovered;
        if (o_lap->count()) cfg.laplace = grid_cfg.laplace;
        if (o_ln->count()) cfg.lift_norm = grid_cfg.lift_norm;
        if (o_dm->count()) cfg.diag_m = grid_cfg.diag_m;
        if (o_dq->count()) cfg.diag_q = grid_cfg.diag_q;
        if (o_dme->count()) cfg.diag_measure = grid_cfg.diag_measure;
        if (o_dli->count()) cfg.diag_linkage = grid_cfg.diag_linkage;
        if (o_thr->count()) cfg.threads = grid_cfg.threads;
        const GridResult result = run_grid(cfg);
        std::cerr << "wrote " << result.artifacts.size() << " artifacts to " << cfg.out_dir << "\n";
    });

    std::string stage = "hiertree";
    try {
        app.parse(argc, argv);
        for (const CLI::App* sub : app.get_subcommands()) stage = sub->get_name();
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    } catch (const Error& e) {
        for (const CLI::App* sub : app.get_subcommands()) stage = sub->get_name();
        std::cerr << "hiertree " << stage << ": error: " << e.what() << "\n";
        return e.exit_code();
    } catch (const std::exception& e) {
        std::cerr << "hiertree " << stage << ": unexpected error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
