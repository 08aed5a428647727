#pragma once

#include <map>
#include <string>
#include <vector>

#include "orbitdet/tensor.hpp"

namespace orbitdet {

struct GraphIR;
struct WeightStore;

/// Largest f in [-16, 16] with 127 * 2^(-f) >= max_abs. max_abs == 0 yields
/// 16 (finest scale; everything quantizes to 0).
int select_fraction_bits(float max_abs);

/// q = clamp(round_half_to_even(x * 2^f), -128, 127), elementwise.
/// Clamping is the defined overflow behavior.
TensorI8 quantize(const TensorF32& x, QuantParams p);

/// x_hat = q * 2^(-f), using the params carried by the tensor.
TensorF32 dequantize(const TensorI8& q);

/// quantize then dequantize: the fake-quant round trip used to simulate INT8
/// execution in float.
TensorF32 fake_quantize(const TensorF32& x, QuantParams p);

/// Per-edge (keyed by producing node id) and per-weight (keyed by conv node
/// id) fraction-bits assignments for a graph.
struct QuantParamsMap {
    std::map<std::string, int> edges;
    std::map<std::string, int> weights;

    bool operator==(const QuantParamsMap&) const = default;
};

/// Running max-abs observations over calibration runs. Merging is an
/// associative max per key; sample counts add.
struct CalibrationStats {
    std::map<std::string, float> edge_max_abs;
    std::map<std::string, float> weight_max_abs;
    int sample_count = 0;

    void merge(const CalibrationStats& other);
};

/// One float-mode run over `inputs`, recording max-abs per activation edge
/// (every non-output node, inputs included) and per conv weight tensor.
CalibrationStats observe_activations(const GraphIR& g, const WeightStore& w,
                                     const TensorMap& inputs);

/// Picks fraction bits per edge/weight from accumulated stats.
/// Requires sample_count >= 1.
QuantParamsMap derive_params(const CalibrationStats& stats);

/// Full calibration: float-execute each input set, max-merge, derive.
/// Throws ConfigError on an empty calibration set.
QuantParamsMap calibrate(const GraphIR& g, const WeightStore& w,
                         const std::vector<TensorMap>& calibration_inputs);

}  // namespace orbitdet
