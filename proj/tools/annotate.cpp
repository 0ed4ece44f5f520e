// annotate: command-line front end for the semi-automatic shuttlecock labeler.

#include <csignal>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "shuttle/errors.hpp"
#include "shuttle/eval.hpp"
#include "shuttle/pipeline.hpp"
#include "shuttle/review_server.hpp"
#include "shuttle/synthetic.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace shuttle;

namespace {

ReviewServer* g_server = nullptr;

void write_text(const fs::path& file, const std::string& text) {
    std::ofstream out(file);
    if (!out)
        throw Error("cannot write " + file.string());
    out << text;
}

std::set<Difficulty> parse_difficulty_list(const std::string& csv) {
    std::set<Difficulty> out;
    std::stringstream ss(csv);
    for (std::string item; std::getline(ss, item, ',');)
        if (!item.empty())
            out.insert(parse_difficulty(item));
    return out;
}

struct RunArgs {
    std::string config, sequence, store, person_masks;
    bool dump_masks = false;
    int workers = -1;
};

int cmd_run(const RunArgs& a) {
    PipelineConfig cfg = a.config.empty() ? PipelineConfig{} : load_pipeline_config(a.config);
    if (!a.store.empty())
        cfg.store = a.store;
    if (!a.person_masks.empty())
        cfg.person_masks = a.person_masks;
    if (a.dump_masks)
        cfg.dump_masks = true;
    if (a.workers >= 0)
        cfg.workers = a.workers;
    if (cfg.store.empty())
        throw ConfigError("no label store given (--store or paths.store)");

    SequenceReader reader(a.sequence);
    for (const auto& w : reader.warnings())
        std::cerr << "warning: " << w << "\n";
    if (!reader.gaps().empty())
        std::cerr << "warning: " << reader.gaps().size() << " missing frame indices\n";

    const fs::path mask_dir = cfg.person_masks.empty() ? fs::path(a.sequence) / "person_masks" : cfg.person_masks;
    FilePersonMaskProvider masks(mask_dir);
    StoreLock lock(cfg.store);
    LabelStore store(cfg.store);
    const RunSummary summary = run_pipeline(cfg, reader, &masks, store);
    std::cout << to_json(summary).dump(2) << "\n";
    if (summary.aborted) {
        std::cerr << "error: " << summary.error << "\n";
        return 1;
    }
    return 0;
}

struct ServeArgs {
    std::string store, host = "127.0.0.1", token;
    int port = 8750;
};

int cmd_serve(const ServeArgs& a) {
    StoreLock lock(a.store);
    LabelStore store(a.store);
    ServerOptions opts;
    opts.host = a.host;
    opts.port = a.port;
    if (!a.token.empty())
        opts.token = a.token;
    else if (const char* env = std::getenv("SHUTTLE_REVIEW_TOKEN"))
        opts.token = env;
    ReviewServer server(store, opts);
    const int port = server.bind();
    std::cerr << "serving " << a.store << " on http://" << a.host << ":" << port << "\n";
    g_server = &server;
    std::signal(SIGINT, [](int) { if (g_server) g_server->stop(); });
    std::signal(SIGTERM, [](int) { if (g_server) g_server->stop(); });
    server.run();
    g_server = nullptr;
    return 0;
}

struct EvalArgs {
    std::string gt, pred, by = "difficulty", json_out, csv_out;
    double tau = 25.0, confidence_floor = 0.0, bin_width = 2.0;
    std::int64_t min_count = 50;
    bool single_count = false;
};

int cmd_eval(const EvalArgs& a) {
    MatchConfig mc;
    mc.tau = a.tau;
    mc.confidence_floor = a.confidence_floor;
    mc.single_count = a.single_count;
    mc.validate();

    const auto gt = ground_truth_from_records(read_manifest(a.gt));
    std::ifstream pin(a.pred);
    if (!pin)
        throw Error("cannot open predictions " + a.pred);
    std::vector<std::string> warnings;
    const auto top1 = read_top1_predictions(pin, mc, &warnings);
    const auto matches = match_frames(gt, top1, mc);

    if (a.by == "size") {
        const SizeBinReport bins = size_binned_report(matches, {a.bin_width, a.min_count});
        std::cout << size_bins_csv(bins);
        if (!a.json_out.empty())
            write_text(a.json_out, to_json(bins).dump(2) + "\n");
        if (!a.csv_out.empty())
            write_text(a.csv_out, size_bins_csv(bins));
    } else {
        EvalReport report = stratified_report(matches);
        report.warnings.insert(report.warnings.begin(), warnings.begin(), warnings.end());
        for (const auto& w : report.warnings)
            std::cerr << "warning: " << w << "\n";
        std::cout << format_table(report);
        if (!a.json_out.empty()) {
            json j = to_json(report);
            j["name"] = fs::path(a.gt).parent_path().filename().string();
            write_text(a.json_out, j.dump(2) + "\n");
        }
    }
    return 0;
}

int cmd_crossval(const std::vector<std::string>& files, const std::string& json_out) {
    std::vector<FoldReport> folds;
    for (const auto& file : files) {
        std::ifstream in(file);
        if (!in)
            throw Error("cannot open fold report " + file);
        json j;
        try {
            j = json::parse(in);
        } catch (const json::exception& e) {
            throw ValidationError("malformed fold report " + file + ": " + e.what());
        }
        FoldReport f = fold_report_from_json(j);
        if (f.name.empty())
            f.name = fs::path(file).stem().string();
        folds.push_back(std::move(f));
    }
    const CrossValReport report = crossval_aggregate(folds);
    std::cout << format_crossval_table(report);
    if (!json_out.empty())
        write_text(json_out, to_json(report).dump(2) + "\n");
    return 0;
}

struct ExportArgs {
    std::string store, out, split_by = "background", hold_out, difficulties;
    bool train_only = false, no_images = false;
};

int cmd_export(const ExportArgs& a) {
    const auto manifest = read_manifest(fs::path(a.store) / "manifest.jsonl");
    const SplitSpec spec = a.split_by == "location" ? hold_out_location(manifest, a.hold_out)
                                                    : hold_out_background(manifest, a.hold_out);
    ExportOptions opts;
    if (!a.difficulties.empty())
        opts.difficulties = parse_difficulty_list(a.difficulties);
    opts.filter_train_only = a.train_only;
    opts.copy_images = !a.no_images;
    const ExportResult r = export_split(manifest, spec, a.out, opts);
    for (const auto& [split, n] : r.counts)
        std::cout << to_string(split) << ": " << n << " frames\n";
    if (r.missing_images)
        std::cerr << "warning: " << r.missing_images << " image files not found\n";
    return 0;
}

int cmd_synth(const std::string& out, int frames, std::uint64_t seed) {
    const SyntheticSequence seq = synthesize_sequence(reference_scenario(frames), seed);
    write_synthetic_sequence(out, seq);
    json gt = json::array();
    for (std::size_t i = 0; i < seq.ground_truth.size(); ++i) {
        const BoxPx& b = seq.ground_truth[i];
        gt.push_back({{"frame_index", i}, {"x_c", b.x_c}, {"y_c", b.y_c}, {"w", b.w}, {"h", b.h}});
    }
    write_text(fs::path(out) / "ground_truth.json", gt.dump(1) + "\n");
    std::cout << "wrote " << seq.frames.size() << " frames to " << out << "\n";
    return 0;
}

int cmd_bench(int width, int height, int frames, int workers, const std::string& config) {
    const PipelineConfig cfg = config.empty() ? PipelineConfig{} : load_pipeline_config(config);
    const ThroughputResult r = benchmark_background(width, height, frames, workers, cfg);
    std::cout << json{{"width", r.width}, {"height", r.height}, {"workers", r.workers}, {"frames", r.frames},
                      {"seconds", r.seconds}, {"fps", r.fps}}
                     .dump(2)
              << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Semi-automatic shuttlecock annotation"};
    app.require_subcommand(1);

    RunArgs run;
    auto* run_cmd = app.add_subcommand("run", "Label one frame sequence into a store");
    run_cmd->add_option("--config", run.config, "Pipeline config (JSON)")->check(CLI::ExistingFile);
    run_cmd->add_option("--sequence", run.sequence, "Directory of numbered frames")->required()->check(CLI::ExistingDirectory);
    run_cmd->add_option("--store", run.store, "Label store directory");
    run_cmd->add_option("--person-masks", run.person_masks, "Person mask directory");
    run_cmd->add_option("--workers", run.workers, "Worker threads (0 = all cores)");
    run_cmd->add_flag("--dump-masks", run.dump_masks, "Keep refined foreground masks");

    ServeArgs serve;
    auto* serve_cmd = app.add_subcommand("serve", "Serve a store to the review UI");
    serve_cmd->add_option("--store", serve.store)->required()->check(CLI::ExistingDirectory);
    serve_cmd->add_option("--host", serve.host);
    serve_cmd->add_option("--port", serve.port)->check(CLI::Range(0, 65535));
    serve_cmd->add_option("--token", serve.token, "Shared secret expected in X-Auth-Token");

    EvalArgs ev;
    auto* eval_cmd = app.add_subcommand("eval", "Score predictions against ground truth");
    eval_cmd->add_option("--gt", ev.gt, "Ground-truth manifest.jsonl")->required()->check(CLI::ExistingFile);
    eval_cmd->add_option("--pred", ev.pred, "Predictions, JSON lines")->required()->check(CLI::ExistingFile);
    eval_cmd->add_option("--tau", ev.tau, "Center distance threshold, pixels");
    eval_cmd->add_option("--confidence-floor", ev.confidence_floor);
    eval_cmd->add_flag("--single-count", ev.single_count, "Count a far prediction as a false positive only");
    eval_cmd->add_option("--by", ev.by)->check(CLI::IsMember({"difficulty", "size"}));
    eval_cmd->add_option("--bin-width", ev.bin_width);
    eval_cmd->add_option("--min-count", ev.min_count);
    eval_cmd->add_option("--json", ev.json_out, "Write the report as JSON");
    eval_cmd->add_option("--csv", ev.csv_out, "Write size bins as CSV");

    std::vector<std::string> fold_files;
    std::string crossval_json;
    auto* cv_cmd = app.add_subcommand("crossval", "Pool per-fold eval reports");
    cv_cmd->add_option("reports", fold_files, "Fold report JSON files")->required()->check(CLI::ExistingFile);
    cv_cmd->add_option("--json", crossval_json);

    ExportArgs ex;
    auto* export_cmd = app.add_subcommand("export", "Write a train/val/test split");
    export_cmd->add_option("--store", ex.store)->required()->check(CLI::ExistingDirectory);
    export_cmd->add_option("--out", ex.out)->required();
    export_cmd->add_option("--split-by", ex.split_by)->check(CLI::IsMember({"background", "location"}));
    export_cmd->add_option("--hold-out", ex.hold_out, "Background or location used for testing")->required();
    export_cmd->add_option("--difficulties", ex.difficulties, "Comma list, e.g. easy,medium");
    export_cmd->add_flag("--train-only-filter", ex.train_only, "Filter difficulty in train only");
    export_cmd->add_flag("--no-images", ex.no_images, "Do not copy image files");

    std::string synth_out;
    int synth_frames = 300;
    std::uint64_t synth_seed = 1;
    auto* synth_cmd = app.add_subcommand("synth", "Write the synthetic reference sequence");
    synth_cmd->add_option("--out", synth_out)->required();
    synth_cmd->add_option("--frames", synth_frames)->check(CLI::PositiveNumber);
    synth_cmd->add_option("--seed", synth_seed);

    int bench_w = 1920, bench_h = 1200, bench_frames = 120, bench_workers = 0;
    std::string bench_config;
    auto* bench_cmd = app.add_subcommand("bench", "Measure background modeling throughput");
    bench_cmd->add_option("--width", bench_w)->check(CLI::PositiveNumber);
    bench_cmd->add_option("--height", bench_h)->check(CLI::PositiveNumber);
    bench_cmd->add_option("--frames", bench_frames)->check(CLI::PositiveNumber);
    bench_cmd->add_option("--workers", bench_workers);
    bench_cmd->add_option("--config", bench_config)->check(CLI::ExistingFile);

    auto* config_cmd = app.add_subcommand("config", "Print the default pipeline config");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run_cmd->parsed())
            return cmd_run(run);
        if (serve_cmd->parsed())
            return cmd_serve(serve);
        if (eval_cmd->parsed())
            return cmd_eval(ev);
        if (cv_cmd->parsed())
            return cmd_crossval(fold_files, crossval_json);
        if (export_cmd->parsed())
            return cmd_export(ex);
        if (synth_cmd->parsed())
            return cmd_synth(synth_out, synth_frames, synth_seed);
        if (bench_cmd->parsed())
            return cmd_bench(bench_w, bench_h, bench_frames, bench_workers, bench_config);
        if (config_cmd->parsed()) {
            std::cout << to_json(PipelineConfig{}).dump(2) << "\n";
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
