#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "orbitdet/graph_exec.hpp"
#include "orbitdet/kernels.hpp"
#include "orbitdet/quant.hpp"

using namespace orbitdet;

namespace {

// input -> conv(identity weights) -> leaky -> output on a 2x2x1 image
struct TwoLayerGraph {
    GraphIR g;
    WeightStore w;

    TwoLayerGraph() {
        g.nodes = {
            {"in", OpKind::input, {}, {1, 2, 2, 1}, {}, {}, {}},
            {"conv", OpKind::conv2d, {"in"}, {}, {"w", "b", 1, 0}, {}, {}},
            {"act", OpKind::activation, {"conv"}, {}, {}, {}, {ActFn::leaky_relu, 0.1f}},
            {"out", OpKind::output, {"act"}, {}, {}, {}, {}},
        };
        w.tensors.emplace("w", TensorF32(Shape{1, 1, 1, 1}, {1.0f}));
        w.tensors.emplace("b", TensorF32(Shape{1}, {0.0f}));
    }
};

}  // namespace

TEST_CASE("fraction-bit selection rule") {
    CHECK(select_fraction_bits(0.0f) == 16);
    // 127*2^-6 = 1.984 >= 1, 127*2^-7 = 0.992 < 1
    CHECK(select_fraction_bits(1.0f) == 6);
    // 127*2^0 = 127 >= 100, 127*2^-1 = 63.5 < 100
    CHECK(select_fraction_bits(100.0f) == 0);
    CHECK(select_fraction_bits(1e10f) == -16);  // clamped

    std::mt19937 rng(13);
    std::uniform_real_distribution<float> dist(1e-6f, 1e5f);
    for (int i = 0; i < 2000; ++i) {
        const float m = dist(rng);
        const int f = select_fraction_bits(m);
        CHECK(f >= -16);
        CHECK(f <= 16);
        CHECK(127.0 * std::ldexp(1.0, -f) >= static_cast<double>(m));
        if (f < 16)  // f is maximal
            CHECK(127.0 * std::ldexp(1.0, -(f + 1)) < static_cast<double>(m));
    }
}

TEST_CASE("quantize examples and clamping") {
    const QuantParams p6{6};
    CHECK(quantize(TensorF32(Shape{1}, {0.0f}), p6).data[0] == 0);
    CHECK(quantize(TensorF32(Shape{1}, {0.0f}), QuantParams{-3}).data[0] == 0);
    CHECK(quantize(TensorF32(Shape{1}, {1.0f}), p6).data[0] == 64);
    CHECK(quantize(TensorF32(Shape{1}, {10.0f}), p6).data[0] == 127);   // clamped high
    CHECK(quantize(TensorF32(Shape{1}, {-10.0f}), p6).data[0] == -128); // clamped low
}

TEST_CASE("round half to even") {
    const QuantParams p0{0};
    CHECK(quantize(TensorF32(Shape{4}, {2.5f, 3.5f, -2.5f, -3.5f}), p0).data ==
          std::vector<int8_t>{2, 4, -2, -4});
}

TEST_CASE("dequantize examples") {
    CHECK(dequantize(TensorI8(Shape{1}, {0}, QuantParams{6})).data[0] == 0.0f);
    CHECK(dequantize(TensorI8(Shape{1}, {64}, QuantParams{6})).data[0] == 1.0f);
    CHECK(dequantize(TensorI8(Shape{1}, {-8}, QuantParams{-2})).data[0] == -32.0f);
}

TEST_CASE("round-trip error stays within half a step") {
    std::mt19937 rng(19);
    for (int f = -2; f <= 10; ++f) {
        const QuantParams p{f};
        const double limit = 127.0 * p.scale();
        std::uniform_real_distribution<float> dist(static_cast<float>(-limit),
                                                   static_cast<float>(limit));
        TensorF32 x(Shape{2000});
        for (auto& v : x.data) v = dist(rng);
        const TensorF32 back = dequantize(quantize(x, p));
        for (size_t i = 0; i < x.data.size(); ++i)
            CHECK(std::fabs(static_cast<double>(back.data[i]) - static_cast<double>(x.data[i])) <=
                  p.scale() / 2.0);
    }
}

TEST_CASE("quantize is monotone non-decreasing") {
    std::mt19937 rng(37);
    std::uniform_real_distribution<float> dist(-4.0f, 4.0f);
    TensorF32 x(Shape{500});
    for (auto& v : x.data) v = dist(rng);
    std::sort(x.data.begin(), x.data.end());
    const TensorI8 q = quantize(x, QuantParams{5});
    for (size_t i = 1; i < q.data.size(); ++i) CHECK(q.data[i] >= q.data[i - 1]);
}

TEST_CASE("calibration on constant-zero activations picks the finest scale") {
    TwoLayerGraph t;
    TensorMap zeros;
    zeros.emplace("in", TensorF32(Shape{1, 2, 2, 1}));
    const QuantParamsMap params = calibrate(t.g, t.w, {zeros});
    CHECK(params.edges.at("in") == 16);
    CHECK(params.edges.at("conv") == 16);
    CHECK(params.edges.at("act") == 16);
    CHECK(params.edges.count("out") == 0);      // outputs are not edges
    CHECK(params.weights.at("conv") == 6);      // identity weight, max_abs 1
}

TEST_CASE("calibration is order-independent") {
    TwoLayerGraph t;
    std::mt19937 rng(43);
    std::uniform_real_distribution<float> dist(-3.0f, 3.0f);
    std::vector<TensorMap> calib;
    for (int i = 0; i < 5; ++i) {
        TensorF32 in(Shape{1, 2, 2, 1});
        for (auto& v : in.data) v = dist(rng);
        TensorMap m;
        m.emplace("in", std::move(in));
        calib.push_back(std::move(m));
    }
    const QuantParamsMap a = calibrate(t.g, t.w, calib);
    std::reverse(calib.begin(), calib.end());
    const QuantParamsMap b = calibrate(t.g, t.w, calib);
    CHECK(a == b);
}

TEST_CASE("calibration rejects an empty set") {
    TwoLayerGraph t;
    CHECK_THROWS_AS(calibrate(t.g, t.w, {}), ConfigError);
}

TEST_CASE("stats merge is an associative max") {
    CalibrationStats a, b;
    a.edge_max_abs = {{"x", 1.0f}, {"y", 3.0f}};
    a.sample_count = 1;
    b.edge_max_abs = {{"x", 2.0f}, {"z", 0.5f}};
    b.sample_count = 2;
    a.merge(b);
    CHECK(a.edge_max_abs.at("x") == 2.0f);
    CHECK(a.edge_max_abs.at("y") == 3.0f);
    CHECK(a.edge_max_abs.at("z") == 0.5f);
    CHECK(a.sample_count == 3);
}

TEST_CASE("fake-quant output approaches float output as scales refine") {
    TwoLayerGraph t;
    std::mt19937 rng(47);
    // small dynamic range: inside the representable span even at f = 14
    std::uniform_real_distribution<float> dist(-0.004f, 0.004f);
    TensorF32 in(Shape{1, 2, 2, 1});
    for (auto& v : in.data) v = dist(rng);
    TensorMap inputs;
    inputs.emplace("in", in);

    const TensorMap f32 = execute(t.g, t.w, inputs);

    auto max_err = [&](int f) {
        QuantParamsMap qp;
        qp.edges = {{"in", f}, {"conv", f}, {"act", f}};
        qp.weights = {{"conv", 6}};
        ExecOptions opt;
        opt.mode = ExecMode::fake_quant;
        opt.qparams = &qp;
        const TensorMap fq = execute(t.g, t.w, inputs, opt);
        double err = 0.0;
        const auto& a = f32.at("out").data;
        const auto& b = fq.at("out").data;
        for (size_t i = 0; i < a.size(); ++i)
            err = std::max(err, std::fabs(static_cast<double>(a[i]) - b[i]));
        return err;
    };

    double prev = max_err(4);
    for (int f = 6; f <= 14; f += 2) {
        const double e = max_err(f);
        CHECK(e <= prev + 1e-12);
        prev = e;
    }
    CHECK(max_err(14) < max_err(4));
    // identity weights are exactly representable at f=6, so the error is
    // bounded by the fake-quant steps the value passes through
    CHECK(max_err(12) <= 2.0 * std::ldexp(1.0, -12));
}
