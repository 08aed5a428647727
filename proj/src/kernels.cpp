#include "orbitdet/kernels.hpp"

#include <cmath>

namespace orbitdet {

float mish(float x) {
    // softplus(x) = ln(1 + e^x); for x > 20 the +1 is below double epsilon of
    // e^x and ln(1+e^x) == x to float precision, so skip the exp entirely.
    // That keeps e^x from overflowing near x ~ 89.
    const double xd = static_cast<double>(x);
    const double sp = xd > 20.0 ? xd : std::log1p(std::exp(xd));
    return static_cast<float>(xd * std::tanh(sp));
}

float leaky_relu(float x, float alpha) {
    return x >= 0.0f ? x : alpha * x;
}

TensorF32 mish(const TensorF32& t) {
    TensorF32 out(t.shape);
    for (size_t i = 0; i < t.data.size(); ++i) out.data[i] = mish(t.data[i]);
    return out;
}

TensorF32 leaky_relu(const TensorF32& t, float alpha) {
    TensorF32 out(t.shape);
    for (size_t i = 0; i < t.data.size(); ++i) out.data[i] = leaky_relu(t.data[i], alpha);
    return out;
}

namespace {

void require_4d(const TensorF32& t, const char* what) {
    if (t.shape.rank() != 4)
        throw ShapeError(std::string(what) + " must be 4-D, got " + t.shape.str());
}

}  // namespace

TensorF32 conv2d(const TensorF32& input, const TensorF32& weights, const TensorF32& bias,
                 int stride, int pad) {
    require_4d(input, "conv2d input");
    require_4d(weights, "conv2d weights");
    if (stride < 1) throw ShapeError("conv2d stride must be >= 1");
    if (pad < 0) throw ShapeError("conv2d pad must be >= 0");

    const int n = input.dim(0), ih = input.dim(1), iw = input.dim(2), ic = input.dim(3);
    const int oc = weights.dim(0), kh = weights.dim(1), kw = weights.dim(2), wc = weights.dim(3);
    if (wc != ic)
        throw ShapeError("conv2d channel mismatch: input has " + std::to_string(ic) +
                         ", weights expect " + std::to_string(wc));
    if (bias.shape.rank() != 1 || bias.dim(0) != oc)
        throw ShapeError("conv2d bias must be 1-D of length " + std::to_string(oc));

    const int oh = (ih + 2 * pad - kh) / stride + 1;
    const int ow = (iw + 2 * pad - kw) / stride + 1;
    if (kh > ih + 2 * pad || kw > iw + 2 * pad || oh < 1 || ow < 1)
        throw ShapeError("conv2d kernel " + std::to_string(kh) + "x" + std::to_string(kw) +
                         " exceeds padded input " + input.shape.str());

    TensorF32 out(Shape{n, oh, ow, oc});
    for (int b = 0; b < n; ++b) {
        for (int oy = 0; oy < oh; ++oy) {
            for (int ox = 0; ox < ow; ++ox) {
                for (int f = 0; f < oc; ++f) {
                    double acc = bias.data[static_cast<size_t>(f)];
                    for (int ky = 0; ky < kh; ++ky) {
                        const int iy = oy * stride + ky - pad;
                        if (iy < 0 || iy >= ih) continue;
                        for (int kx = 0; kx < kw; ++kx) {
                            const int ix = ox * stride + kx - pad;
                            if (ix < 0 || ix >= iw) continue;
                            for (int c = 0; c < ic; ++c)
                                acc += static_cast<double>(input.at(b, iy, ix, c)) *
                                       static_cast<double>(weights.at(f, ky, kx, c));
                        }
                    }
                    out.at(b, oy, ox, f) = static_cast<float>(acc);
                }
            }
        }
    }
    return out;
}

TensorF32 max_pool2d(const TensorF32& input, int k, int stride) {
    require_4d(input, "max_pool2d input");
    if (k < 1) throw ShapeError("max_pool2d kernel must be >= 1");
    if (stride < 1) throw ShapeError("max_pool2d stride must be >= 1");

    const int n = input.dim(0), ih = input.dim(1), iw = input.dim(2), ch = input.dim(3);
    if (k > ih || k > iw)
        throw ShapeError("max_pool2d kernel " + std::to_string(k) + " exceeds input " +
                         input.shape.str());

    const int oh = (ih - k) / stride + 1;
    const int ow = (iw - k) / stride + 1;
    TensorF32 out(Shape{n, oh, ow, ch});
    for (int b = 0; b < n; ++b) {
        for (int oy = 0; oy < oh; ++oy) {
            for (int ox = 0; ox < ow; ++ox) {
                for (int c = 0; c < ch; ++c) {
                    float m = input.at(b, oy * stride, ox * stride, c);
                    for (int ky = 0; ky < k; ++ky)
                        for (int kx = 0; kx < k; ++kx)
                            m = std::max(m, input.at(b, oy * stride + ky, ox * stride + kx, c));
                    out.at(b, oy, ox, c) = m;
                }
            }
        }
    }
    return out;
}

TensorF32 upsample_nearest2x(const TensorF32& input) {
    require_4d(input, "upsample_nearest2x input");
    const int n = input.dim(0), ih = input.dim(1), iw = input.dim(2), ch = input.dim(3);
    TensorF32 out(Shape{n, ih * 2, iw * 2, ch});
    for (int b = 0; b < n; ++b)
        for (int y = 0; y < ih * 2; ++y)
            for (int x = 0; x < iw * 2; ++x)
                for (int c = 0; c < ch; ++c)
                    out.at(b, y, x, c) = input.at(b, y / 2, x / 2, c);
    return out;
}

TensorF32 concat_channels(const TensorF32& a, const TensorF32& b) {
    require_4d(a, "concat_channels input");
    require_4d(b, "concat_channels input");
    for (int i = 0; i < 3; ++i)
        if (a.dim(i) != b.dim(i))
            throw ShapeError("concat_channels spatial mismatch: " + a.shape.str() + " vs " +
                             b.shape.str());

    const int n = a.dim(0), h = a.dim(1), w = a.dim(2);
    const int ca = a.dim(3), cb = b.dim(3);
    TensorF32 out(Shape{n, h, w, ca + cb});
    for (int bn = 0; bn < n; ++bn) {
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                for (int c = 0; c < ca; ++c) out.at(bn, y, x, c) = a.at(bn, y, x, c);
                for (int c = 0; c < cb; ++c) out.at(bn, y, x, ca + c) = b.at(bn, y, x, c);
            }
        }
    }
    return out;
}

TensorF32 add(const TensorF32& a, const TensorF32& b) {
    if (!(a.shape == b.shape))
        throw ShapeError("add shape mismatch: " + a.shape.str() + " vs " + b.shape.str());
    TensorF32 out(a.shape);
    for (size_t i = 0; i < a.data.size(); ++i) out.data[i] = a.data[i] + b.data[i];
    return out;
}

}  // namespace orbitdet
