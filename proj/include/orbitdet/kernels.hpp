#pragma once

#include "orbitdet/tensor.hpp"

namespace orbitdet {

/// x * tanh(softplus(x)), numerically stable for large |x|.
float mish(float x);

/// x for x >= 0, alpha * x otherwise.
float leaky_relu(float x, float alpha);

TensorF32 mish(const TensorF32& t);
TensorF32 leaky_relu(const TensorF32& t, float alpha);

/// Cross-correlation over an NHWC input with zero padding.
/// weights: (out_ch, kh, kw, in_ch); bias: (out_ch).
/// Output spatial dim = floor((in + 2*pad - k) / stride) + 1.
TensorF32 conv2d(const TensorF32& input, const TensorF32& weights, const TensorF32& bias,
                 int stride = 1, int pad = 0);

/// Per-window maximum over an NHWC input.
/// Output spatial dim = floor((in - k) / stride) + 1.
/// Kernel-size hardware limits are the graph validator's business, not this
/// kernel's; it doubles as the host-fallback executor for any k.
TensorF32 max_pool2d(const TensorF32& input, int k, int stride);

/// Each spatial pixel replicated into a 2x2 block; H and W double.
TensorF32 upsample_nearest2x(const TensorF32& input);

/// Channel concatenation; batch and spatial dims must match.
TensorF32 concat_channels(const TensorF32& a, const TensorF32& b);

/// Elementwise sum; shapes must match.
TensorF32 add(const TensorF32& a, const TensorF32& b);

}  // namespace orbitdet
