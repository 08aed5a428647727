#pragma once

#include <map>
#include <string>
#include <vector>

#include "orbitdet/graph.hpp"
#include "orbitdet/quant.hpp"
#include "orbitdet/tensor.hpp"

namespace orbitdet {

/// Weight tensors keyed by the reference strings conv nodes carry
/// (file paths in serialized graphs, arbitrary keys in tests).
struct WeightStore {
    std::map<std::string, TensorF32> tensors;

    const TensorF32& get(const std::string& key) const;  // GraphError if missing
};

enum class ExecMode { float32, fake_quant };

struct ExecOptions {
    ExecMode mode = ExecMode::float32;
    // Required in fake_quant mode: must cover every activation edge and every
    // conv weight tensor. Missing entries raise ConfigError.
    const QuantParamsMap* qparams = nullptr;
};

/// Runs the whole graph: seeds input-node values from `inputs`, executes all
/// remaining nodes in listed (topological) order, returns outputs keyed by
/// output-node id. In fake_quant mode every produced activation (inputs
/// included) passes through quantize-then-dequantize with its edge's params;
/// conv weights are fake-quantized before use. Output nodes pass their input
/// through untouched.
TensorMap execute(const GraphIR& g, const WeightStore& w, const TensorMap& inputs,
                  const ExecOptions& opt = {});

/// Runs just the listed nodes (e.g. one partition segment) against an
/// existing value environment, extending it in place. Callers seed `values`
/// with input-node tensors (fake-quantized already, in fake_quant mode).
void execute_nodes(const GraphIR& g, const WeightStore& w,
                   const std::vector<std::string>& node_ids, TensorMap& values,
                   const ExecOptions& opt = {});

/// Seeds a value environment from graph inputs (applying input-edge fake
/// quantization when requested). Shape-checked against declared input shapes.
TensorMap seed_inputs(const GraphIR& g, const TensorMap& inputs, const ExecOptions& opt = {});

/// Output-node values pulled out of a fully-executed environment.
TensorMap collect_outputs(const GraphIR& g, const TensorMap& values);

/// Static shape resolution for every node. Conv kernel dims come from the
/// weight store.
std::map<std::string, Shape> infer_shapes(const GraphIR& g, const WeightStore& w);

/// First-order DPU-style time estimate: conv nodes cost 2 ops per MAC,
/// everything else costs its output element count; seconds =
/// ops / (ops_per_clock * clock_hz * cores). Memory traffic is ignored.
struct CostReport {
    std::map<std::string, double> per_node_s;
    double total_s = 0.0;
};

CostReport estimate_cost(const GraphIR& g, const WeightStore& w, const DpuConfig& d);

}  // namespace orbitdet
