#pragma once

#include <string>

#include "orbitdet/tensor.hpp"

namespace orbitdet {

/// Reads a binary PPM (P6, maxval 255) into an HxWx3 tensor with values in
/// [0, 1].
TensorF32 load_ppm(const std::string& path);

/// Writes an HxWx3 tensor (values clamped to [0, 1]) as binary PPM.
void save_ppm(const std::string& path, const TensorF32& image);

}  // namespace orbitdet
