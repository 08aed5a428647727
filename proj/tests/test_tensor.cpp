#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstring>
#include <random>

#include "orbitdet/kernels.hpp"
#include "oracles.hpp"

using namespace orbitdet;

namespace {

TensorF32 random_tensor(Shape s, std::mt19937& rng, float lo = -1.0f, float hi = 1.0f) {
    std::uniform_real_distribution<float> dist(lo, hi);
    TensorF32 t(std::move(s));
    for (auto& v : t.data) v = dist(rng);
    return t;
}

}  // namespace

TEST_CASE("shape element count and validation") {
    CHECK(Shape{1, 416, 416, 3}.elems() == 416 * 416 * 3);
    CHECK(Shape{2}.elems() == 2);
    CHECK(Shape{1, 1, 1, 0}.elems() == 0);
    CHECK_THROWS_AS(TensorF32(Shape{2, 2}, std::vector<float>{1.0f}), ShapeError);
}

TEST_CASE("mish matches the defining formula") {
    CHECK(mish(0.0f) == 0.0f);
    CHECK(mish(1.0f) == doctest::Approx(0.8651).epsilon(1e-4));
    CHECK(static_cast<double>(mish(100.0f)) == doctest::Approx(100.0).epsilon(1e-6));

    // high-precision scalar oracle over a grid
    for (float x = -10.0f; x <= 10.0f; x += 0.37f) {
        const double expected = static_cast<double>(oracle::mish_ref(x));
        CHECK(static_cast<double>(mish(x)) == doctest::Approx(expected).epsilon(1e-6));
    }
}

TEST_CASE("mish is stable and bounded for extreme inputs") {
    CHECK(std::isfinite(mish(88.0f)));
    CHECK(std::isfinite(mish(500.0f)));
    CHECK(std::isfinite(mish(-500.0f)));
    CHECK(static_cast<double>(mish(500.0f)) == doctest::Approx(500.0).epsilon(1e-9));
    CHECK(std::fabs(mish(-100.0f)) < 1e-30f);

    std::mt19937 rng(7);
    std::uniform_real_distribution<float> dist(-50.0f, 50.0f);
    for (int i = 0; i < 2000; ++i) {
        const float x = dist(rng);
        CHECK(std::fabs(mish(x)) <= std::fabs(x) + 1.0f);
    }
}

TEST_CASE("leaky_relu branches and homogeneity") {
    CHECK(leaky_relu(5.0f, 0.1f) == 5.0f);
    CHECK(leaky_relu(-10.0f, 0.1f) == doctest::Approx(-1.0));
    CHECK(leaky_relu(0.0f, 0.1f) == 0.0f);

    std::mt19937 rng(11);
    std::uniform_real_distribution<float> xs(-20.0f, 20.0f);
    std::uniform_real_distribution<float> cs(0.01f, 50.0f);
    for (int i = 0; i < 2000; ++i) {
        const float x = xs(rng), c = cs(rng);
        CHECK(leaky_relu(c * x, 0.1f) ==
              doctest::Approx(c * leaky_relu(x, 0.1f)).epsilon(1e-5));
    }
}

TEST_CASE("conv2d identity kernel") {
    std::mt19937 rng(3);
    const TensorF32 in = random_tensor(Shape{1, 3, 3, 1}, rng);
    const TensorF32 w(Shape{1, 1, 1, 1}, {1.0f});
    const TensorF32 b(Shape{1}, {0.0f});
    const TensorF32 out = conv2d(in, w, b, 1, 0);
    CHECK(out.shape == in.shape);
    for (size_t i = 0; i < in.data.size(); ++i) CHECK(out.data[i] == in.data[i]);
}

TEST_CASE("conv2d all-ones hand sum") {
    const TensorF32 in = TensorF32::full(Shape{1, 3, 3, 1}, 1.0f);
    const TensorF32 w = TensorF32::full(Shape{1, 3, 3, 1}, 1.0f);
    const TensorF32 b(Shape{1}, {0.0f});
    const TensorF32 out = conv2d(in, w, b, 1, 0);
    CHECK(out.shape == Shape{1, 1, 1, 1});
    CHECK(out.data[0] == doctest::Approx(9.0));
}

TEST_CASE("conv2d agrees with the naive reference on random cases") {
    std::mt19937 rng(17);
    const TensorF32 in = random_tensor(Shape{1, 8, 8, 3}, rng);
    const TensorF32 w = random_tensor(Shape{4, 3, 3, 3}, rng);
    const TensorF32 b = random_tensor(Shape{4}, rng);
    const TensorF32 got = conv2d(in, w, b, 1, 0);
    const TensorF32 want = oracle::conv2d_ref(in, w, b, 1, 0);
    REQUIRE(got.shape == want.shape);
    for (size_t i = 0; i < got.data.size(); ++i)
        CHECK(got.data[i] == doctest::Approx(want.data[i]).epsilon(1e-5));

    // randomized shapes, strides and pads
    std::uniform_int_distribution<int> kdist(1, 3), cdist(1, 4), sdist(1, 2), pdist(0, 2);
    for (int t = 0; t < 50; ++t) {
        const int k = kdist(rng), ic = cdist(rng), oc = cdist(rng);
        std::uniform_int_distribution<int> hwdist(k, 12);
        const int h = hwdist(rng), wd = hwdist(rng);
        const int stride = sdist(rng), pad = pdist(rng);
        const TensorF32 x = random_tensor(Shape{1, h, wd, ic}, rng);
        const TensorF32 ww = random_tensor(Shape{oc, k, k, ic}, rng);
        const TensorF32 bb = random_tensor(Shape{oc}, rng);
        const TensorF32 g = conv2d(x, ww, bb, stride, pad);
        const TensorF32 r = oracle::conv2d_ref(x, ww, bb, stride, pad);
        REQUIRE(g.shape == r.shape);
        for (size_t i = 0; i < g.data.size(); ++i) {
            CHECK(g.data[i] ==
                  doctest::Approx(r.data[i]).epsilon(1e-5).scale(std::max(1.0f, std::fabs(r.data[i]))));
            CHECK(std::isfinite(g.data[i]));
        }
    }
}

TEST_CASE("conv2d shape errors") {
    const TensorF32 in(Shape{1, 3, 3, 2});
    CHECK_THROWS_AS(conv2d(in, TensorF32(Shape{1, 1, 1, 3}), TensorF32(Shape{1}), 1, 0),
                    ShapeError);  // channel mismatch
    CHECK_THROWS_AS(conv2d(in, TensorF32(Shape{1, 5, 5, 2}), TensorF32(Shape{1}), 1, 0),
                    ShapeError);  // kernel exceeds padded input
    CHECK_THROWS_AS(conv2d(in, TensorF32(Shape{1, 1, 1, 2}), TensorF32(Shape{2}), 1, 0),
                    ShapeError);  // bias length
    CHECK_NOTHROW(conv2d(in, TensorF32(Shape{1, 5, 5, 2}), TensorF32(Shape{1}), 1, 1));
}

TEST_CASE("max_pool2d singleton windows and hand case") {
    std::mt19937 rng(5);
    const TensorF32 in = random_tensor(Shape{1, 4, 5, 2}, rng);
    const TensorF32 same = max_pool2d(in, 1, 1);
    CHECK(same.shape == in.shape);
    CHECK(std::memcmp(same.data.data(), in.data.data(), in.data.size() * sizeof(float)) == 0);

    const TensorF32 quad(Shape{1, 2, 2, 1}, {1.0f, 2.0f, 3.0f, 4.0f});
    const TensorF32 out = max_pool2d(quad, 2, 2);
    CHECK(out.shape == Shape{1, 1, 1, 1});
    CHECK(out.data[0] == 4.0f);
}

TEST_CASE("max_pool2d matches the naive reference exactly") {
    std::mt19937 rng(23);
    const TensorF32 in = random_tensor(Shape{1, 16, 16, 2}, rng);
    const TensorF32 got = max_pool2d(in, 8, 8);
    const TensorF32 want = oracle::max_pool2d_ref(in, 8, 8);
    REQUIRE(got.shape == want.shape);
    CHECK(std::memcmp(got.data.data(), want.data.data(), got.data.size() * sizeof(float)) == 0);

    std::uniform_int_distribution<int> kdist(1, 8), sdist(1, 4), cdist(1, 8);
    for (int t = 0; t < 50; ++t) {
        const int k = kdist(rng), stride = sdist(rng), c = cdist(rng);
        std::uniform_int_distribution<int> hwdist(k, 16);
        const TensorF32 x = random_tensor(Shape{1, hwdist(rng), hwdist(rng), c}, rng);
        const TensorF32 g = max_pool2d(x, k, stride);
        const TensorF32 r = oracle::max_pool2d_ref(x, k, stride);
        REQUIRE(g.shape == r.shape);
        CHECK(std::memcmp(g.data.data(), r.data.data(), g.data.size() * sizeof(float)) == 0);
    }

    CHECK_THROWS_AS(max_pool2d(TensorF32(Shape{1, 4, 4, 1}), 5, 1), ShapeError);
}

TEST_CASE("upsample_nearest2x replication and inverse pair") {
    const TensorF32 one(Shape{1, 1, 1, 1}, {7.0f});
    const TensorF32 up = upsample_nearest2x(one);
    CHECK(up.shape == Shape{1, 2, 2, 1});
    for (float v : up.data) CHECK(v == 7.0f);

    const TensorF32 col(Shape{1, 2, 1, 1}, {1.0f, 2.0f});
    const TensorF32 up2 = upsample_nearest2x(col);
    CHECK(up2.shape == Shape{1, 4, 2, 1});
    CHECK(up2.data == std::vector<float>{1, 1, 1, 1, 2, 2, 2, 2});

    std::mt19937 rng(29);
    const TensorF32 t = random_tensor(Shape{1, 5, 7, 3}, rng);
    const TensorF32 down = max_pool2d(upsample_nearest2x(t), 1, 2);
    CHECK(down.shape == t.shape);
    CHECK(std::memcmp(down.data.data(), t.data.data(), t.data.size() * sizeof(float)) == 0);
}

TEST_CASE("concat_channels") {
    const TensorF32 a(Shape{1, 1, 1, 1}, {1.0f});
    const TensorF32 b(Shape{1, 1, 1, 2}, {2.0f, 3.0f});
    const TensorF32 out = concat_channels(a, b);
    CHECK(out.shape == Shape{1, 1, 1, 3});
    CHECK(out.data == std::vector<float>{1, 2, 3});

    // empty-channel tensor is a no-op partner
    const TensorF32 empty(Shape{1, 1, 1, 0});
    const TensorF32 same = concat_channels(a, empty);
    CHECK(same.shape == a.shape);
    CHECK(same.data == a.data);

    std::mt19937 rng(31);
    const TensorF32 x = random_tensor(Shape{2, 3, 4, 2}, rng);
    const TensorF32 y = random_tensor(Shape{2, 3, 4, 5}, rng);
    CHECK(concat_channels(x, y).size() == x.size() + y.size());

    CHECK_THROWS_AS(concat_channels(x, TensorF32(Shape{2, 4, 3, 5})), ShapeError);
}

TEST_CASE("add elementwise") {
    const TensorF32 a(Shape{1, 1, 2, 1}, {1.0f, 2.0f});
    const TensorF32 b(Shape{1, 1, 2, 1}, {10.0f, 20.0f});
    CHECK(add(a, b).data == std::vector<float>{11.0f, 22.0f});
    CHECK_THROWS_AS(add(a, TensorF32(Shape{1, 2, 1, 1})), ShapeError);
}

TEST_CASE("kernels are pure: identical runs produce bit-identical outputs") {
    std::mt19937 rng(41);
    const TensorF32 in = random_tensor(Shape{1, 9, 9, 3}, rng);
    const TensorF32 w = random_tensor(Shape{2, 3, 3, 3}, rng);
    const TensorF32 b = random_tensor(Shape{2}, rng);

    const TensorF32 c1 = conv2d(in, w, b, 2, 1);
    const TensorF32 c2 = conv2d(in, w, b, 2, 1);
    CHECK(std::memcmp(c1.data.data(), c2.data.data(), c1.data.size() * sizeof(float)) == 0);

    const TensorF32 m1 = mish(c1);
    const TensorF32 m2 = mish(c2);
    CHECK(std::memcmp(m1.data.data(), m2.data.data(), m1.data.size() * sizeof(float)) == 0);
    for (float v : m1.data) CHECK(std::isfinite(v));
}
