#pragma once

#include <functional>
#include <string>
#include <vector>

namespace orbitdet {

/// One pipeline stage: a name and a per-frame unit of work. Real workloads
/// (graph execution, post-processing) wrap their per-frame state in the
/// closure; synthetic stages spin on the monotonic clock for a fixed
/// duration rather than sleeping (sleep granularity is coarser than the
/// sub-millisecond accounting here).
struct StageSpec {
    std::string name;
    std::function<void(int frame)> work;

    static StageSpec busy_wait(std::string name, double ms);  // ConfigError if ms <= 0
};

enum class PipelineMode { sequential, pipelined };

const char* to_string(PipelineMode m);

struct StageStat {
    std::string name;
    double mean_ms = 0.0;
};

/// Measurements from one harness run. `fps` is frames/total wall time in
/// sequential mode; in pipelined mode it is the steady-state rate with the
/// first `warmup_frames` completions excluded (pipeline fill distorts
/// small-N numbers), with `total_ms` still covering the raw run.
struct PipelineStats {
    PipelineMode mode = PipelineMode::sequential;
    int frames = 0;
    int warmup_frames = 0;
    std::vector<StageStat> stage_ms;
    std::vector<double> latency_ms;  // per-frame end-to-end
    double latency_mean_ms = 0.0;
    double total_ms = 0.0;
    double fps = 0.0;
};

struct BenchOptions {
    int warmup_frames = 3;  // pipelined mode only
};

/// One frame at a time through every stage; throughput is bounded by the sum
/// of stage times.
PipelineStats run_sequential(const std::vector<StageSpec>& stages, int frames);

/// Stages run concurrently on different frames, connected by depth-1 hand-off
/// buffers; steady-state throughput approaches 1/max(stage time) while
/// per-frame latency stays >= the sum of stage times.
PipelineStats run_pipelined(const std::vector<StageSpec>& stages, int frames,
                            const BenchOptions& opt = {});

/// Per-sample end-to-end wall-clock (ms), stages run sequentially per sample.
std::vector<double> measure_latency(const std::vector<StageSpec>& stages, int samples);

}  // namespace orbitdet
