#include "orbitdet/cli.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "orbitdet/errors.hpp"
#include "orbitdet/json_io.hpp"
#include "orbitdet/ppm.hpp"

namespace orbitdet {

namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitDomain = 1;
constexpr int kExitUsage = 2;

struct GlobalOpts {
    std::string config_path;
    std::string out_dir;  // default output directory for subcommand artifacts
    bool deterministic = false;

    json config;  // parsed --config contents, or empty object

    // Subcommand-level --out wins; otherwise fall back to the global
    // directory with a conventional file name.
    std::string resolve_out(const std::string& specific, const std::string& default_name) const {
        if (!specific.empty()) return specific;
        if (out_dir.empty()) return {};
        std::filesystem::create_directories(out_dir);
        return (std::filesystem::path(out_dir) / default_name).string();
    }

    HeadConfig head_config(const std::string& override_path) const {
        if (!override_path.empty()) return load_head_config(override_path);
        if (config.contains("head")) return head_config_from_json(config.at("head"));
        return HeadConfig{};
    }

    OpConstraintSet constraints(const std::string& override_path) const {
        if (!override_path.empty()) return load_constraints(override_path);
        if (config.contains("constraints")) return constraints_from_json(config.at("constraints"));
        return OpConstraintSet{};
    }
};

std::vector<std::string> expand_images(const std::vector<std::string>& specs) {
    std::vector<std::string> paths;
    for (const std::string& spec : specs) {
        if (fs::is_directory(spec)) {
            std::vector<std::string> dir_paths;
            for (const auto& e : fs::directory_iterator(spec)) {
                if (e.is_regular_file() && e.path().extension() == ".ppm")
                    dir_paths.push_back(e.path().string());
            }
            std::sort(dir_paths.begin(), dir_paths.end());
            paths.insert(paths.end(), dir_paths.begin(), dir_paths.end());
        } else if (fs::is_regular_file(spec)) {
            paths.push_back(spec);
        } else {
            throw IoError("no such image file or directory: '" + spec + "'");
        }
    }
    return paths;
}

struct GraphBundle {
    GraphIR graph;
    WeightStore weights;
};

GraphBundle load_bundle(const std::string& graph_path) {
    GraphBundle b;
    b.graph = load_graph(graph_path);
    b.weights = load_weight_store(b.graph, fs::path(graph_path).parent_path().string());
    return b;
}

// Single image-shaped input node; returns (id, square spatial size).
std::pair<std::string, int> image_input(const GraphIR& g) {
    const auto ids = g.input_ids();
    if (ids.size() != 1) throw ConfigError("graph must have exactly one input node");
    const Node& n = g.node(ids[0]);
    if (n.shape.size() != 4 || n.shape[0] != 1 || n.shape[3] != 3 || n.shape[1] != n.shape[2])
        throw ConfigError("input node must declare shape [1, S, S, 3]");
    return {n.id, n.shape[1]};
}

TensorF32 to_batch(const TensorF32& hw3) {
    Shape s{1, hw3.dim(0), hw3.dim(1), hw3.dim(2)};
    return TensorF32(s, hw3.data);
}

// Head tensors in graph output order, checked against the config's strides.
std::vector<TensorF32> head_tensors(const GraphIR& g, const TensorMap& outputs,
                                    const HeadConfig& cfg) {
    const auto out_ids = g.output_ids();
    if (out_ids.size() != cfg.strides.size())
        throw ConfigError("graph has " + std::to_string(out_ids.size()) + " outputs but head config lists " +
                          std::to_string(cfg.strides.size()) + " strides");
    std::vector<TensorF32> heads;
    for (const std::string& id : out_ids) heads.push_back(outputs.at(id));
    return heads;
}

std::vector<DetectionRecord> infer_one(const GraphBundle& b, const std::string& input_id,
                                       const TensorF32& image, const std::string& image_name,
                                       const HeadConfig& cfg, const ExecOptions& exec_opt,
                                       FilterMode filter_mode) {
    auto [boxed, meta] = letterbox(image, cfg);
    TensorMap inputs;
    inputs.emplace(input_id, to_batch(boxed));
    const TensorMap outputs = execute(b.graph, b.weights, inputs, exec_opt);
    const auto heads = head_tensors(b.graph, outputs, cfg);
    const auto candidates = decode(heads, cfg);
    const auto raw = filter_confidence(candidates, cfg, filter_mode);
    const auto kept = nms(raw, cfg.nms_iou_threshold);
    const auto dets = unletterbox(kept, meta);

    std::vector<DetectionRecord> records;
    records.reserve(dets.size());
    for (const Detection& d : dets) records.push_back({image_name, d});
    return records;
}

// ---- graph subcommands ----

int cmd_graph_validate(const GlobalOpts& opts, const std::string& graph_path,
                       const std::string& constraints_path) {
    const GraphIR g = load_graph(graph_path);
    const auto violations = validate(g, opts.constraints(constraints_path));
    std::cout << violations_to_json(violations).dump(2) << "\n";
    return violations.empty() ? kExitOk : kExitDomain;
}

int cmd_graph_rewrite(const std::string& graph_path, const std::string& out_path, double alpha) {
    if (out_path.empty()) throw ConfigError("an output path is required (--out or global --out <dir>)");
    const GraphIR g = load_graph(graph_path);
    save_graph(out_path, rewrite_mish_to_leaky(g, static_cast<float>(alpha)));
    std::cout << "wrote " << out_path << "\n";
    return kExitOk;
}

int cmd_graph_partition(const GlobalOpts& opts, const std::string& graph_path,
                        const std::string& constraints_path) {
    const GraphIR g = load_graph(graph_path);
    std::cout << partition_to_json(partition(g, opts.constraints(constraints_path))).dump(2) << "\n";
    return kExitOk;
}

int cmd_graph_cost(const std::string& graph_path, int ops_per_clock, int cores, double clock_mhz) {
    const GraphBundle b = load_bundle(graph_path);
    const DpuConfig d{ops_per_clock, cores, clock_mhz * 1e6};
    std::cout << cost_report_to_json(estimate_cost(b.graph, b.weights, d)).dump(2) << "\n";
    return kExitOk;
}

// ---- quantize ----

int cmd_quantize(const std::string& graph_path, const std::string& calib_dir,
                 const std::string& out_path) {
    if (out_path.empty()) throw ConfigError("an output path is required (--out or global --out <dir>)");
    const GraphBundle b = load_bundle(graph_path);
    const auto [input_id, size] = image_input(b.graph);
    const auto paths = expand_images({calib_dir});
    if (paths.empty()) throw ConfigError("calibration directory has no .ppm images");

    std::vector<TensorMap> calib;
    for (const std::string& p : paths) {
        auto [boxed, meta] = letterbox(load_ppm(p), size);
        TensorMap m;
        m.emplace(input_id, to_batch(boxed));
        calib.push_back(std::move(m));
    }
    const QuantParamsMap params = calibrate(b.graph, b.weights, calib);
    save_params(out_path, params);
    std::cout << "calibrated " << paths.size() << " image(s), wrote " << out_path << "\n";
    return kExitOk;
}

// ---- infer ----

struct InferOpts {
    std::string graph_path;
    std::vector<std::string> images;
    std::string out_dir;
    std::string params_path;
    std::string head_path;
    std::string mode = "float";
    std::string filter = "serial";
};

int cmd_infer(const GlobalOpts& opts, const InferOpts& io) {
    if (io.out_dir.empty())
        throw ConfigError("an output directory is required (--out or global --out <dir>)");
    const GraphBundle b = load_bundle(io.graph_path);
    const auto [input_id, size] = image_input(b.graph);
    const HeadConfig cfg = opts.head_config(io.head_path);
    if (cfg.input_size != size)
        throw ConfigError("graph input size " + std::to_string(size) +
                          " does not match head config input_size " + std::to_string(cfg.input_size));

    ExecOptions exec_opt;
    QuantParamsMap params;
    if (io.mode == "fake-quant") {
        if (io.params_path.empty()) throw ConfigError("--mode fake-quant requires --params");
        params = load_params(io.params_path);
        exec_opt.mode = ExecMode::fake_quant;
        exec_opt.qparams = &params;
    } else if (io.mode != "float") {
        throw ConfigError("--mode must be float or fake-quant");
    }
    FilterMode filter_mode;
    if (io.filter == "serial")
        filter_mode = FilterMode::serial;
    else if (io.filter == "parallel")
        filter_mode = FilterMode::parallel;
    else
        throw ConfigError("--filter must be serial or parallel");

    const auto paths = expand_images(io.images);
    if (paths.empty()) throw ConfigError("no input images");
    fs::create_directories(io.out_dir);

    std::vector<DetectionRecord> all;
    json errors = json::array();
    size_t failed = 0;
    for (const std::string& p : paths) {
        const std::string name = fs::path(p).filename().string();
        try {
            const auto records =
                infer_one(b, input_id, load_ppm(p), name, cfg, exec_opt, filter_mode);
            std::cout << name << ": " << records.size() << " detection(s)\n";
            all.insert(all.end(), records.begin(), records.end());
        } catch (const std::exception& e) {
            ++failed;
            errors.push_back({{"image", name}, {"error", e.what()}});
            std::cerr << name << ": error: " << e.what() << "\n";
        }
    }

    const fs::path out(io.out_dir);
    save_detections((out / "detections.json").string(), all);
    save_json((out / "summary.json").string(),
              json{{"images", paths.size()},
                   {"failed", failed},
                   {"detections", all.size()},
                   {"errors", errors}});
    return failed == paths.size() ? kExitDomain : kExitOk;
}

// ---- bench ----

struct BenchOpts {
    std::string mode = "sequential";
    std::vector<double> stage_ms;
    int frames = 40;
    int samples = 3;
    int warmup = 3;
    std::string graph_path;
    std::vector<std::string> images;
    std::string params_path;
    std::string head_path;
    std::string out_path;
    bool table = false;
};

// Per-frame hand-off state for the real-workload pipeline. Stages own
// disjoint frames at any instant, so plain slots are safe.
struct FrameState {
    TensorF32 boxed;
    LetterboxMeta meta;
    std::vector<TensorF32> heads;
    size_t detections = 0;
};

std::vector<StageSpec> build_real_stages(const GlobalOpts& opts, const BenchOpts& bo,
                                         std::vector<FrameState>& state,
                                         std::shared_ptr<GraphBundle>& bundle_out,
                                         std::shared_ptr<QuantParamsMap>& params_out,
                                         HeadConfig& cfg_out) {
    auto bundle = std::make_shared<GraphBundle>(load_bundle(bo.graph_path));
    const auto [input_id, size] = image_input(bundle->graph);
    const HeadConfig cfg = opts.head_config(bo.head_path);
    if (cfg.input_size != size) throw ConfigError("graph input size does not match head config");

    auto params = std::make_shared<QuantParamsMap>();
    ExecOptions exec_opt;
    if (!bo.params_path.empty()) {
        *params = load_params(bo.params_path);
        exec_opt.mode = ExecMode::fake_quant;
        exec_opt.qparams = params.get();
    }

    const auto paths = expand_images(bo.images);
    if (paths.empty()) throw ConfigError("bench with --graph requires images");
    auto images = std::make_shared<std::vector<TensorF32>>();
    for (const std::string& p : paths) images->push_back(load_ppm(p));

    const std::string in_id = input_id;
    std::vector<StageSpec> stages;
    stages.push_back({"preprocess", [&state, images, cfg](int f) {
                          const TensorF32& img = (*images)[static_cast<size_t>(f) % images->size()];
                          auto [boxed, meta] = letterbox(img, cfg);
                          state[static_cast<size_t>(f)].boxed = std::move(boxed);
                          state[static_cast<size_t>(f)].meta = meta;
                      }});
    stages.push_back({"accelerator", [&state, bundle, in_id, exec_opt, cfg](int f) {
                          FrameState& fs = state[static_cast<size_t>(f)];
                          TensorMap inputs;
                          inputs.emplace(in_id, to_batch(fs.boxed));
                          const TensorMap outputs =
                              execute(bundle->graph, bundle->weights, inputs, exec_opt);
                          fs.heads = head_tensors(bundle->graph, outputs, cfg);
                          fs.boxed = TensorF32{};
                      }});
    stages.push_back({"post_processing", [&state, cfg](int f) {
                          FrameState& fs = state[static_cast<size_t>(f)];
                          const auto candidates = decode(fs.heads, cfg);
                          const auto raw = filter_confidence(candidates, cfg, FilterMode::serial);
                          const auto kept = nms(raw, cfg.nms_iou_threshold);
                          fs.detections = unletterbox(kept, fs.meta).size();
                          fs.heads.clear();  // keep at most a pipeline depth of live tensors
                      }});
    bundle_out = bundle;
    params_out = params;
    cfg_out = cfg;
    return stages;
}

void print_bench_table(const PipelineStats& s) {
    std::printf("%-28s %s\n", "Tested part", "Frame rate");
    for (const StageStat& st : s.stage_ms)
        std::printf("%-28s %.1f FPS\n", st.name.c_str(), st.mean_ms > 0 ? 1000.0 / st.mean_ms : 0.0);
    std::printf("%-28s %.1f FPS\n", s.mode == PipelineMode::sequential ? "Average throughput"
                                                                       : "Pipelined throughput",
                s.fps);
}

int cmd_bench(const GlobalOpts& opts, const BenchOpts& bo) {
    std::vector<FrameState> state;
    std::shared_ptr<GraphBundle> bundle;
    std::shared_ptr<QuantParamsMap> params;
    HeadConfig cfg;

    std::vector<StageSpec> stages;
    if (!bo.graph_path.empty()) {
        state.resize(static_cast<size_t>(std::max(bo.frames, bo.samples)));
        stages = build_real_stages(opts, bo, state, bundle, params, cfg);
    } else {
        if (bo.stage_ms.empty())
            throw ConfigError("either --stage-ms delays or --graph must be given");
        for (size_t i = 0; i < bo.stage_ms.size(); ++i)
            stages.push_back(StageSpec::busy_wait("stage_" + std::to_string(i + 1), bo.stage_ms[i]));
    }

    json out;
    if (bo.mode == "latency") {
        const auto samples = measure_latency(stages, bo.samples);
        double mean = 0.0;
        for (double v : samples) mean += v;
        mean /= static_cast<double>(samples.size());
        out = json{{"mode", "latency"}, {"samples", samples.size()}};
        if (!opts.deterministic) {
            out["latency_ms"] = samples;
            out["mean_ms"] = mean;
        }
        if (bo.table) {
            std::printf("%-8s %s\n", "Sample", "Latency ms");
            for (size_t i = 0; i < samples.size(); ++i)
                std::printf("%-8zu %.1f\n", i + 1, samples[i]);
        } else {
            std::cout << out.dump(2) << "\n";
        }
    } else if (bo.mode == "sequential" || bo.mode == "pipelined") {
        PipelineStats stats;
        if (bo.mode == "sequential") {
            stats = run_sequential(stages, bo.frames);
        } else {
            BenchOptions bopt;
            bopt.warmup_frames = bo.warmup;
            stats = run_pipelined(stages, bo.frames, bopt);
        }
        out = pipeline_stats_to_json(stats, opts.deterministic);
        if (bo.table)
            print_bench_table(stats);
        else
            std::cout << out.dump(2) << "\n";
    } else {
        throw ConfigError("--mode must be sequential, pipelined or latency");
    }

    if (!bo.out_path.empty()) save_json(bo.out_path, out);
    return kExitOk;
}

// ---- eval ----

int cmd_eval(const std::string& dets_path, const std::string& annotations_path, double iou_thresh,
             const std::string& out_path, bool table) {
    const auto dets = load_detections(dets_path);
    const auto gts = load_annotations(annotations_path);
    const EvalReport report = evaluate(dets, gts, iou_thresh);
    const json j = eval_report_to_json(report);
    if (table) {
        std::printf("%-8s %s\n", "Class", "Average Precision");
        for (const auto& [cls, ap] : report.per_class_ap)
            std::printf("%-8d %05.2f%%\n", cls, ap * 100.0);
        std::printf("mAP@%.2f %05.2f%%\n", report.iou_threshold, report.map * 100.0);
    } else {
        std::cout << j.dump(2) << "\n";
    }
    if (!out_path.empty()) save_json(out_path, j);
    return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
    CLI::App app{"on-orbit detector deployment toolkit: graph passes, INT8 "
                 "calibration, inference, pipeline benchmarks, mAP evaluation"};
    app.require_subcommand(1);

    GlobalOpts opts;
    app.add_option("--config", opts.config_path, "global config JSON (head/constraints defaults)");
    app.add_option("--out", opts.out_dir, "default output directory for report files");
    app.add_flag("--deterministic", opts.deterministic,
                 "strip timing fields from reports for byte-stable output");

    std::function<int()> action;

    // graph
    auto* graph_cmd = app.add_subcommand("graph", "validate, rewrite or partition a graph");
    graph_cmd->require_subcommand(1);
    std::string graph_path, constraints_path, rewrite_out;
    double alpha = 0.1;

    auto* val = graph_cmd->add_subcommand("validate", "check accelerator compatibility");
    val->add_option("graph", graph_path, "graph JSON")->required();
    val->add_option("--constraints", constraints_path, "constraint set JSON");
    val->callback([&] { action = [&] { return cmd_graph_validate(opts, graph_path, constraints_path); }; });

    auto* rew = graph_cmd->add_subcommand("rewrite", "replace mish activations with leaky ReLU");
    rew->add_option("graph", graph_path, "graph JSON")->required();
    rew->add_option("--out", rewrite_out, "output graph path");
    rew->add_option("--alpha", alpha, "negative-branch slope");
    rew->callback([&] {
        action = [&] {
            return cmd_graph_rewrite(graph_path, opts.resolve_out(rewrite_out, "rewritten.json"),
                                     alpha);
        };
    });

    auto* part = graph_cmd->add_subcommand("partition", "split into accelerator/host segments");
    part->add_option("graph", graph_path, "graph JSON")->required();
    part->add_option("--constraints", constraints_path, "constraint set JSON");
    part->callback([&] { action = [&] { return cmd_graph_partition(opts, graph_path, constraints_path); }; });

    int ops_per_clock = 4096, cores = 1;
    double clock_mhz = 300.0;
    auto* cost = graph_cmd->add_subcommand("cost", "estimate per-node accelerator time");
    cost->add_option("graph", graph_path, "graph JSON")->required();
    cost->add_option("--ops-per-clock", ops_per_clock, "512, 1024, 2048 or 4096");
    cost->add_option("--cores", cores, "1..4");
    cost->add_option("--clock-mhz", clock_mhz, "accelerator clock, MHz");
    cost->callback([&] { action = [&] { return cmd_graph_cost(graph_path, ops_per_clock, cores, clock_mhz); }; });

    // quantize
    std::string calib_dir, params_out;
    auto* quant = app.add_subcommand("quantize", "calibrate INT8 params from images");
    quant->add_option("graph", graph_path, "graph JSON")->required();
    quant->add_option("--calib", calib_dir, "directory of .ppm calibration images")->required();
    quant->add_option("--out", params_out, "output params JSON");
    quant->callback([&] {
        action = [&] {
            return cmd_quantize(graph_path, calib_dir, opts.resolve_out(params_out, "params.json"));
        };
    });

    // infer
    InferOpts io;
    auto* infer = app.add_subcommand("infer", "run detection on images");
    infer->add_option("--graph", io.graph_path, "graph JSON")->required();
    infer->add_option("--images", io.images, "image files or directories")->required();
    infer->add_option("--out", io.out_dir, "output directory");
    infer->add_option("--params", io.params_path, "quant params JSON (fake-quant mode)");
    infer->add_option("--head", io.head_path, "head config JSON");
    infer->add_option("--mode", io.mode, "float | fake-quant");
    infer->add_option("--filter", io.filter, "serial | parallel confidence filtering");
    infer->callback([&] {
        action = [&] {
            InferOpts resolved = io;
            if (resolved.out_dir.empty()) resolved.out_dir = opts.out_dir;
            return cmd_infer(opts, resolved);
        };
    });

    // bench
    BenchOpts bo;
    auto* bench = app.add_subcommand("bench", "measure pipeline latency/throughput");
    bench->add_option("--mode", bo.mode, "sequential | pipelined | latency");
    bench->add_option("--stage-ms", bo.stage_ms, "synthetic stage duration(s), ms");
    bench->add_option("--frames", bo.frames, "frames to push through");
    bench->add_option("--samples", bo.samples, "latency samples");
    bench->add_option("--warmup", bo.warmup, "pipelined warm-up frames excluded from fps");
    bench->add_option("--graph", bo.graph_path, "real workload: graph JSON");
    bench->add_option("--images", bo.images, "real workload: images");
    bench->add_option("--params", bo.params_path, "real workload: quant params (fake-quant)");
    bench->add_option("--head", bo.head_path, "head config JSON");
    bench->add_option("--out", bo.out_path, "write stats JSON here");
    bench->add_flag("--table", bo.table, "print a throughput/latency table instead of JSON");
    bench->callback([&] {
        action = [&] {
            BenchOpts resolved = bo;
            if (resolved.out_path.empty() && !opts.out_dir.empty())
                resolved.out_path = opts.resolve_out("", "bench.json");
            return cmd_bench(opts, resolved);
        };
    });

    // eval
    std::string dets_path, annotations_path, report_out;
    double iou_thresh = 0.5;
    bool eval_table = false;
    auto* ev = app.add_subcommand("eval", "per-class AP and mAP at an IoU threshold");
    ev->add_option("--dets", dets_path, "detections JSON")->required();
    ev->add_option("--annotations", annotations_path, "annotations JSON")->required();
    ev->add_option("--iou", iou_thresh, "matching threshold");
    ev->add_option("--out", report_out, "write report JSON here");
    ev->add_flag("--table", eval_table, "print a per-class table instead of JSON");
    ev->callback([&] {
        action = [&] {
            return cmd_eval(dets_path, annotations_path, iou_thresh,
                            opts.resolve_out(report_out, "report.json"), eval_table);
        };
    });

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (!opts.config_path.empty()) opts.config = load_json(opts.config_path);
        if (!action) return kExitUsage;
        return action();
    } catch (const DomainError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitDomain;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    }
}

}  // namespace orbitdet
