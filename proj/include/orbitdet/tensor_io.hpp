#pragma once

#include <string>

#include "orbitdet/tensor.hpp"

namespace orbitdet {

// TNSR binary tensor file:
//   magic "TNSR"
//   1 byte dtype        0 = f32, 1 = i8
//   1 byte ndim
//   ndim x 4-byte little-endian unsigned dims
//   raw little-endian payload
//   dtype 1 only: 1 trailing signed byte of fraction bits

void save_tensor(const std::string& path, const TensorF32& t);
void save_tensor(const std::string& path, const TensorI8& t);

TensorF32 load_tensor_f32(const std::string& path);  // IoError on bad file or dtype
TensorI8 load_tensor_i8(const std::string& path);

}  // namespace orbitdet
