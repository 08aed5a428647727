#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <map>
#include <string>
#include <vector>

#include "orbitdet/errors.hpp"

namespace orbitdet {

/// Dense tensor shape. 4-D activations are NHWC (batch, height, width,
/// channels). Zero-size dims are representable (an empty tensor) but
/// operations that need real extents check positivity themselves.
struct Shape {
    std::vector<int> dims;

    Shape() = default;
    Shape(std::initializer_list<int> d) : dims(d) {}
    explicit Shape(std::vector<int> d) : dims(std::move(d)) {}

    int rank() const { return static_cast<int>(dims.size()); }
    int dim(int i) const { return dims.at(static_cast<size_t>(i)); }

    int64_t elems() const {
        int64_t n = 1;
        for (int d : dims) {
            if (d < 0) throw ShapeError("negative dim in shape " + str());
            n *= d;
        }
        return dims.empty() ? 0 : n;
    }

    std::string str() const {
        std::string s;
        for (size_t i = 0; i < dims.size(); ++i) {
            if (i) s += 'x';
            s += std::to_string(dims[i]);
        }
        return s.empty() ? "()" : s;
    }

    bool operator==(const Shape&) const = default;
};

/// Symmetric power-of-two fixed-point parameters: scale = 2^(-fraction_bits),
/// zero point pinned at 0. fraction_bits may be negative.
struct QuantParams {
    int fraction_bits = 0;

    double scale() const { return std::ldexp(1.0, -fraction_bits); }
    double step() const { return scale(); }
    double max_value() const { return 127.0 * scale(); }
    double min_value() const { return -128.0 * scale(); }

    bool operator==(const QuantParams&) const = default;
};

/// Dense FP32 tensor, flat row-major storage.
struct TensorF32 {
    Shape shape;
    std::vector<float> data;

    TensorF32() = default;

    explicit TensorF32(Shape s) : shape(std::move(s)) {
        data.assign(static_cast<size_t>(shape.elems()), 0.0f);
    }

    TensorF32(Shape s, std::vector<float> d) : shape(std::move(s)), data(std::move(d)) {
        if (static_cast<int64_t>(data.size()) != shape.elems())
            throw ShapeError("tensor data length " + std::to_string(data.size()) +
                             " does not match shape " + shape.str());
    }

    static TensorF32 full(Shape s, float v) {
        TensorF32 t(std::move(s));
        for (auto& x : t.data) x = v;
        return t;
    }

    int64_t size() const { return static_cast<int64_t>(data.size()); }
    int dim(int i) const { return shape.dim(i); }

    // NHWC accessors, unchecked beyond debug builds.
    float& at(int n, int h, int w, int c) {
        return data[static_cast<size_t>(((static_cast<int64_t>(n) * dim(1) + h) * dim(2) + w) * dim(3) + c)];
    }
    float at(int n, int h, int w, int c) const {
        return data[static_cast<size_t>(((static_cast<int64_t>(n) * dim(1) + h) * dim(2) + w) * dim(3) + c)];
    }
    float& at(int h, int w, int c) {
        return data[static_cast<size_t>((static_cast<int64_t>(h) * dim(1) + w) * dim(2) + c)];
    }
    float at(int h, int w, int c) const {
        return data[static_cast<size_t>((static_cast<int64_t>(h) * dim(1) + w) * dim(2) + c)];
    }
};

/// Dense INT8 tensor with its quantization parameters.
struct TensorI8 {
    Shape shape;
    std::vector<int8_t> data;
    QuantParams params;

    TensorI8() = default;

    TensorI8(Shape s, QuantParams p) : shape(std::move(s)), params(p) {
        data.assign(static_cast<size_t>(shape.elems()), 0);
    }

    TensorI8(Shape s, std::vector<int8_t> d, QuantParams p)
        : shape(std::move(s)), data(std::move(d)), params(p) {
        if (static_cast<int64_t>(data.size()) != shape.elems())
            throw ShapeError("tensor data length " + std::to_string(data.size()) +
                             " does not match shape " + shape.str());
    }

    int64_t size() const { return static_cast<int64_t>(data.size()); }
    int dim(int i) const { return shape.dim(i); }
};

/// Named tensor environment: graph input/output/intermediate values.
using TensorMap = std::map<std::string, TensorF32>;

}  // namespace orbitdet
