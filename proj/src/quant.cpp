#include "orbitdet/quant.hpp"

#include <algorithm>
#include <cmath>

#include "orbitdet/errors.hpp"
#include "orbitdet/graph_exec.hpp"

namespace orbitdet {

namespace {

// Round-to-nearest, ties to even. Explicit so results do not depend on the
// process-wide FP rounding mode.
double round_half_even(double v) {
    const double fl = std::floor(v);
    const double diff = v - fl;
    if (diff > 0.5) return fl + 1.0;
    if (diff < 0.5) return fl;
    return std::fmod(fl, 2.0) == 0.0 ? fl : fl + 1.0;
}

float max_abs_of(const TensorF32& t) {
    float m = 0.0f;
    for (float v : t.data) m = std::max(m, std::fabs(v));
    return m;
}

void max_merge(std::map<std::string, float>& into, const std::map<std::string, float>& from) {
    for (const auto& [k, v] : from) {
        auto it = into.find(k);
        if (it == into.end())
            into.emplace(k, v);
        else
            it->second = std::max(it->second, v);
    }
}

}  // namespace

int select_fraction_bits(float max_abs) {
    if (!(max_abs >= 0.0f)) throw ConfigError("max_abs must be >= 0");
    for (int f = 16; f > -16; --f)
        if (127.0 * std::ldexp(1.0, -f) >= static_cast<double>(max_abs)) return f;
    return -16;
}

TensorI8 quantize(const TensorF32& x, QuantParams p) {
    TensorI8 out(x.shape, p);
    for (size_t i = 0; i < x.data.size(); ++i) {
        const double scaled = std::ldexp(static_cast<double>(x.data[i]), p.fraction_bits);
        const double q = std::clamp(round_half_even(scaled), -128.0, 127.0);
        out.data[i] = static_cast<int8_t>(q);
    }
    return out;
}

TensorF32 dequantize(const TensorI8& q) {
    TensorF32 out(q.shape);
    for (size_t i = 0; i < q.data.size(); ++i)
        out.data[i] = static_cast<float>(std::ldexp(static_cast<double>(q.data[i]), -q.params.fraction_bits));
    return out;
}

TensorF32 fake_quantize(const TensorF32& x, QuantParams p) {
    return dequantize(quantize(x, p));
}

void CalibrationStats::merge(const CalibrationStats& other) {
    max_merge(edge_max_abs, other.edge_max_abs);
    max_merge(weight_max_abs, other.weight_max_abs);
    sample_count += other.sample_count;
}

CalibrationStats observe_activations(const GraphIR& g, const WeightStore& w,
                                     const TensorMap& inputs) {
    check_structure(g);
    TensorMap values = seed_inputs(g, inputs);
    std::vector<std::string> rest;
    for (const Node& n : g.nodes)
        if (n.op != OpKind::input) rest.push_back(n.id);
    execute_nodes(g, w, rest, values);

    CalibrationStats stats;
    stats.sample_count = 1;
    for (const Node& n : g.nodes) {
        if (n.op == OpKind::output) continue;
        stats.edge_max_abs[n.id] = max_abs_of(values.at(n.id));
        if (n.op == OpKind::conv2d)
            stats.weight_max_abs[n.id] = max_abs_of(w.get(n.conv.weights));
    }
    return stats;
}

QuantParamsMap derive_params(const CalibrationStats& stats) {
    if (stats.sample_count < 1)
        throw ConfigError("cannot derive quant params from zero calibration samples");
    QuantParamsMap params;
    for (const auto& [id, m] : stats.edge_max_abs) params.edges[id] = select_fraction_bits(m);
    for (const auto& [id, m] : stats.weight_max_abs) params.weights[id] = select_fraction_bits(m);
    return params;
}

QuantParamsMap calibrate(const GraphIR& g, const WeightStore& w,
                         const std::vector<TensorMap>& calibration_inputs) {
    if (calibration_inputs.empty()) throw ConfigError("calibration set is empty");
    CalibrationStats stats;
    for (const TensorMap& inputs : calibration_inputs)
        stats.merge(observe_activations(g, w, inputs));
    return derive_params(stats);
}

}  // namespace orbitdet
