#include "orbitdet/bench.hpp"

#include <chrono>
#include <condition_variable>
#include <memory>
#include <mutex>
#include <optional>
#include <thread>

#include "orbitdet/errors.hpp"

namespace orbitdet {

namespace {

using Clock = std::chrono::steady_clock;

double ms_between(Clock::time_point a, Clock::time_point b) {
    return std::chrono::duration<double, std::milli>(b - a).count();
}

// Depth-1 hand-off buffer between consecutive stages: a producer blocks while
// the slot is occupied, which is exactly the one-frame overlap being modeled.
template <typename T>
class HandoffSlot {
public:
    void push(T v) {
        std::unique_lock lk(m_);
        cv_space_.wait(lk, [&] { return !slot_.has_value(); });
        slot_ = std::move(v);
        cv_item_.notify_one();
    }

    std::optional<T> pop() {
        std::unique_lock lk(m_);
        cv_item_.wait(lk, [&] { return slot_.has_value() || closed_; });
        if (!slot_.has_value()) return std::nullopt;
        T v = std::move(*slot_);
        slot_.reset();
        cv_space_.notify_one();
        return v;
    }

    void close() {
        std::lock_guard lk(m_);
        closed_ = true;
        cv_item_.notify_all();
    }

private:
    std::mutex m_;
    std::condition_variable cv_item_, cv_space_;
    std::optional<T> slot_;
    bool closed_ = false;
};

void check_run(const std::vector<StageSpec>& stages, int frames, size_t min_stages) {
    if (stages.size() < min_stages)
        throw ConfigError("at least " + std::to_string(min_stages) + " stage(s) required");
    if (frames < 1) throw ConfigError("at least one frame required");
    for (const StageSpec& s : stages)
        if (!s.work) throw ConfigError("stage '" + s.name + "' has no work function");
}

}  // namespace

const char* to_string(PipelineMode m) {
    return m == PipelineMode::sequential ? "sequential" : "pipelined";
}

StageSpec StageSpec::busy_wait(std::string name, double ms) {
    if (!(ms > 0.0)) throw ConfigError("synthetic stage duration must be > 0 ms");
    const auto dur = std::chrono::duration_cast<Clock::duration>(
        std::chrono::duration<double, std::milli>(ms));
    return StageSpec{std::move(name), [dur](int) {
                         const auto end = Clock::now() + dur;
                         while (Clock::now() < end) {
                         }
                     }};
}

PipelineStats run_sequential(const std::vector<StageSpec>& stages, int frames) {
    check_run(stages, frames, 1);

    std::vector<double> stage_total(stages.size(), 0.0);
    PipelineStats stats;
    stats.mode = PipelineMode::sequential;
    stats.frames = frames;
    stats.latency_ms.resize(static_cast<size_t>(frames));

    const auto run_start = Clock::now();
    for (int f = 0; f < frames; ++f) {
        const auto frame_start = Clock::now();
        for (size_t i = 0; i < stages.size(); ++i) {
            const auto t0 = Clock::now();
            stages[i].work(f);
            stage_total[i] += ms_between(t0, Clock::now());
        }
        stats.latency_ms[static_cast<size_t>(f)] = ms_between(frame_start, Clock::now());
    }
    stats.total_ms = ms_between(run_start, Clock::now());

    for (size_t i = 0; i < stages.size(); ++i)
        stats.stage_ms.push_back({stages[i].name, stage_total[i] / frames});
    for (double l : stats.latency_ms) stats.latency_mean_ms += l;
    stats.latency_mean_ms /= frames;
    stats.fps = frames / (stats.total_ms / 1000.0);
    return stats;
}

PipelineStats run_pipelined(const std::vector<StageSpec>& stages, int frames,
                            const BenchOptions& opt) {
    check_run(stages, frames, 2);

    struct Token {
        int frame;
        Clock::time_point in;  // when stage 0 began processing this frame
    };

    const size_t ns = stages.size();
    std::vector<std::unique_ptr<HandoffSlot<Token>>> chans;
    for (size_t i = 0; i + 1 < ns; ++i) chans.push_back(std::make_unique<HandoffSlot<Token>>());

    std::vector<double> stage_total(ns, 0.0);
    std::vector<double> latency(static_cast<size_t>(frames), 0.0);
    std::vector<Clock::time_point> completion(static_cast<size_t>(frames));

    const auto run_start = Clock::now();
    std::vector<std::thread> workers;
    for (size_t i = 0; i < ns; ++i) {
        workers.emplace_back([&, i] {
            if (i == 0) {
                for (int f = 0; f < frames; ++f) {
                    Token tok{f, Clock::now()};
                    const auto t0 = Clock::now();
                    stages[0].work(f);
                    stage_total[0] += ms_between(t0, Clock::now());
                    if (ns > 1)
                        chans[0]->push(tok);  // blocks while downstream is busy
                }
                chans[0]->close();
            } else {
                while (auto tok = chans[i - 1]->pop()) {
                    const auto t0 = Clock::now();
                    stages[i].work(tok->frame);
                    stage_total[i] += ms_between(t0, Clock::now());
                    if (i + 1 < ns) {
                        chans[i]->push(*tok);
                    } else {
                        const auto done = Clock::now();
                        completion[static_cast<size_t>(tok->frame)] = done;
                        latency[static_cast<size_t>(tok->frame)] = ms_between(tok->in, done);
                    }
                }
                if (i + 1 < ns) chans[i]->close();
            }
        });
    }
    for (auto& t : workers) t.join();

    PipelineStats stats;
    stats.mode = PipelineMode::pipelined;
    stats.frames = frames;
    stats.warmup_frames = std::min(std::max(opt.warmup_frames, 0), frames - 1);
    stats.latency_ms = std::move(latency);
    for (size_t i = 0; i < ns; ++i) stats.stage_ms.push_back({stages[i].name, stage_total[i] / frames});
    for (double l : stats.latency_ms) stats.latency_mean_ms += l;
    stats.latency_mean_ms /= frames;
    stats.total_ms = ms_between(run_start, completion[static_cast<size_t>(frames - 1)]);

    // Steady-state rate over the post-warmup completions.
    const int w = stats.warmup_frames;
    const auto window_start =
        w == 0 ? run_start : completion[static_cast<size_t>(w - 1)];
    const double window_ms = ms_between(window_start, completion[static_cast<size_t>(frames - 1)]);
    stats.fps = (frames - w) / (window_ms / 1000.0);
    return stats;
}

std::vector<double> measure_latency(const std::vector<StageSpec>& stages, int samples) {
    check_run(stages, samples, 1);
    std::vector<double> out(static_cast<size_t>(samples), 0.0);
    for (int s = 0; s < samples; ++s) {
        const auto t0 = Clock::now();
        for (const StageSpec& st : stages) st.work(s);
        out[static_cast<size_t>(s)] = ms_between(t0, Clock::now());
    }
    return out;
}

}  // namespace orbitdet
