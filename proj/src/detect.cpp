#include "orbitdet/detect.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <thread>

#include "orbitdet/errors.hpp"

namespace orbitdet {

namespace {

float sigmoid(float t) {
    if (t >= 0.0f) return 1.0f / (1.0f + std::exp(-t));
    const float e = std::exp(t);
    return e / (1.0f + e);
}

// Bilinear sample with half-pixel centers, clamped to the image.
float sample_bilinear(const TensorF32& img, double sy, double sx, int c) {
    const int h = img.dim(0), w = img.dim(1);
    const double fy = std::clamp(sy, 0.0, static_cast<double>(h - 1));
    const double fx = std::clamp(sx, 0.0, static_cast<double>(w - 1));
    const int y0 = static_cast<int>(std::floor(fy));
    const int x0 = static_cast<int>(std::floor(fx));
    const int y1 = std::min(y0 + 1, h - 1);
    const int x1 = std::min(x0 + 1, w - 1);
    const double dy = fy - y0, dx = fx - x0;
    const double top = img.at(y0, x0, c) * (1.0 - dx) + img.at(y0, x1, c) * dx;
    const double bot = img.at(y1, x0, c) * (1.0 - dx) + img.at(y1, x1, c) * dx;
    return static_cast<float>(top * (1.0 - dy) + bot * dy);
}

}  // namespace

int64_t HeadConfig::total_candidates() const {
    int64_t total = 0;
    for (size_t i = 0; i < strides.size(); ++i) {
        const int64_t g = input_size / strides[i];
        total += g * g * static_cast<int64_t>(anchors[i].size());
    }
    return total;
}

void check_config(const HeadConfig& cfg) {
    if (cfg.input_size < 1) throw ConfigError("input_size must be >= 1");
    if (cfg.strides.empty()) throw ConfigError("at least one stride required");
    if (cfg.anchors.size() != cfg.strides.size())
        throw ConfigError("anchors must list one entry per stride");
    for (size_t i = 0; i < cfg.strides.size(); ++i) {
        if (cfg.strides[i] < 1 || cfg.input_size % cfg.strides[i] != 0)
            throw ConfigError("input_size must be divisible by every stride");
        if (cfg.anchors[i].empty()) throw ConfigError("each stride needs >= 1 anchor");
    }
    if (cfg.num_classes < 1) throw ConfigError("num_classes must be >= 1");
    if (!(cfg.conf_threshold > 0.0f && cfg.conf_threshold < 1.0f))
        throw ConfigError("conf_threshold must be in (0, 1)");
    if (!(cfg.nms_iou_threshold > 0.0f && cfg.nms_iou_threshold < 1.0f))
        throw ConfigError("nms_iou_threshold must be in (0, 1)");
}

double iou(const BBox& a, const BBox& b) {
    const double ix = std::max(0.0, std::min<double>(a.x + a.w, b.x + b.w) - std::max<double>(a.x, b.x));
    const double iy = std::max(0.0, std::min<double>(a.y + a.h, b.y + b.h) - std::max<double>(a.y, b.y));
    const double inter = ix * iy;
    const double uni = static_cast<double>(a.w) * a.h + static_cast<double>(b.w) * b.h - inter;
    return uni > 0.0 ? inter / uni : 0.0;
}

std::pair<TensorF32, LetterboxMeta> letterbox(const TensorF32& image, int input_size) {
    if (image.shape.rank() != 3 || image.dim(2) != 3)
        throw ShapeError("letterbox expects an HxWx3 image, got " + image.shape.str());
    const int orig_h = image.dim(0), orig_w = image.dim(1);
    if (orig_h < 1 || orig_w < 1) throw ShapeError("letterbox image must be non-empty");

    LetterboxMeta meta;
    meta.orig_w = orig_w;
    meta.orig_h = orig_h;
    meta.scale = std::min(static_cast<double>(input_size) / orig_w,
                          static_cast<double>(input_size) / orig_h);
    const int new_w = static_cast<int>(std::lround(orig_w * meta.scale));
    const int new_h = static_cast<int>(std::lround(orig_h * meta.scale));
    meta.pad_x = (input_size - new_w) / 2;  // remainder goes to the right/bottom bar
    meta.pad_y = (input_size - new_h) / 2;

    TensorF32 out = TensorF32::full(Shape{input_size, input_size, 3}, 0.5f);
    for (int y = 0; y < new_h; ++y) {
        const double sy = (y + 0.5) / meta.scale - 0.5;
        for (int x = 0; x < new_w; ++x) {
            const double sx = (x + 0.5) / meta.scale - 0.5;
            for (int c = 0; c < 3; ++c)
                out.at(y + meta.pad_y, x + meta.pad_x, c) = sample_bilinear(image, sy, sx, c);
        }
    }
    return {std::move(out), meta};
}

std::pair<TensorF32, LetterboxMeta> letterbox(const TensorF32& image, const HeadConfig& cfg) {
    return letterbox(image, cfg.input_size);
}

std::vector<Candidate> decode(const std::vector<TensorF32>& head_outputs, const HeadConfig& cfg) {
    check_config(cfg);
    if (head_outputs.size() != cfg.strides.size())
        throw ShapeError("expected " + std::to_string(cfg.strides.size()) + " head tensors, got " +
                         std::to_string(head_outputs.size()));

    std::vector<Candidate> out;
    out.reserve(static_cast<size_t>(cfg.total_candidates()));
    int index = 0;
    for (size_t si = 0; si < cfg.strides.size(); ++si) {
        const int s = cfg.strides[si];
        const int grid = cfg.input_size / s;
        const int na = static_cast<int>(cfg.anchors[si].size());
        const int ch = na * (5 + cfg.num_classes);

        const TensorF32& t = head_outputs[si];
        // accept HxWxC or 1xHxWxC
        int rank = t.shape.rank();
        if (!((rank == 3 && t.dim(0) == grid && t.dim(1) == grid && t.dim(2) == ch) ||
              (rank == 4 && t.dim(0) == 1 && t.dim(1) == grid && t.dim(2) == grid && t.dim(3) == ch)))
            throw ShapeError("head tensor for stride " + std::to_string(s) + " must be " +
                             std::to_string(grid) + "x" + std::to_string(grid) + "x" +
                             std::to_string(ch) + ", got " + t.shape.str());
        auto val = [&](int row, int col, int c) {
            return rank == 3 ? t.at(row, col, c) : t.at(0, row, col, c);
        };

        for (int row = 0; row < grid; ++row) {
            for (int col = 0; col < grid; ++col) {
                for (int a = 0; a < na; ++a) {
                    const int base = a * (5 + cfg.num_classes);
                    Candidate cand;
                    cand.index = index++;
                    cand.cx = (sigmoid(val(row, col, base + 0)) + col) * s;
                    cand.cy = (sigmoid(val(row, col, base + 1)) + row) * s;
                    cand.w = cfg.anchors[si][a].first * std::exp(val(row, col, base + 2));
                    cand.h = cfg.anchors[si][a].second * std::exp(val(row, col, base + 3));
                    cand.objectness = sigmoid(val(row, col, base + 4));
                    cand.class_scores.resize(static_cast<size_t>(cfg.num_classes));
                    for (int k = 0; k < cfg.num_classes; ++k)
                        cand.class_scores[static_cast<size_t>(k)] =
                            sigmoid(val(row, col, base + 5 + k));
                    out.push_back(std::move(cand));
                }
            }
        }
    }
    return out;
}

namespace {

void filter_range(const std::vector<Candidate>& candidates, const HeadConfig& cfg, size_t begin,
                  size_t end, std::vector<RawDetection>& out) {
    for (size_t i = begin; i < end; ++i) {
        const Candidate& cand = candidates[i];
        for (size_t k = 0; k < cand.class_scores.size(); ++k) {
            const float joint = cand.objectness * cand.class_scores[k];
            if (joint > cfg.conf_threshold) {
                RawDetection d;
                d.candidate_index = cand.index;
                d.class_id = static_cast<int>(k);
                d.score = joint;
                d.box = {cand.cx - cand.w / 2.0f, cand.cy - cand.h / 2.0f, cand.w, cand.h};
                out.push_back(d);
            }
        }
    }
}

}  // namespace

std::vector<RawDetection> filter_confidence(const std::vector<Candidate>& candidates,
                                            const HeadConfig& cfg, FilterMode mode) {
    if (mode == FilterMode::serial || candidates.size() < 2) {
        std::vector<RawDetection> out;
        filter_range(candidates, cfg, 0, candidates.size(), out);
        return out;
    }

    // Each prediction is independent of the others, so the scan splits into
    // contiguous chunks; concatenating chunk outputs preserves index order.
    const unsigned hw = std::thread::hardware_concurrency();
    const size_t workers = std::min<size_t>(std::max(hw, 1u), std::min<size_t>(candidates.size(), 8));
    std::vector<std::vector<RawDetection>> partial(workers);
    std::vector<std::thread> threads;
    const size_t chunk = (candidates.size() + workers - 1) / workers;
    for (size_t t = 0; t < workers; ++t) {
        const size_t begin = t * chunk;
        const size_t end = std::min(candidates.size(), begin + chunk);
        threads.emplace_back([&, begin, end, t] {
            filter_range(candidates, cfg, begin, end, partial[t]);
        });
    }
    for (auto& th : threads) th.join();

    std::vector<RawDetection> out;
    for (auto& p : partial) out.insert(out.end(), p.begin(), p.end());
    return out;
}

std::vector<RawDetection> nms(const std::vector<RawDetection>& dets, float iou_thresh) {
    // rank: score descending, ties by ascending position in the input list
    std::vector<size_t> order(dets.size());
    std::iota(order.begin(), order.end(), size_t{0});
    std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
        if (dets[a].score != dets[b].score) return dets[a].score > dets[b].score;
        return a < b;
    });

    std::vector<bool> suppressed(dets.size(), false);
    std::vector<RawDetection> kept;
    for (size_t oi = 0; oi < order.size(); ++oi) {
        const size_t i = order[oi];
        if (suppressed[i]) continue;
        kept.push_back(dets[i]);
        for (size_t oj = oi + 1; oj < order.size(); ++oj) {
            const size_t j = order[oj];
            if (suppressed[j] || dets[j].class_id != dets[i].class_id) continue;
            if (iou(dets[i].box, dets[j].box) > iou_thresh) suppressed[j] = true;
        }
    }
    return kept;  // already in (score desc, input position asc) order
}

std::vector<Detection> unletterbox(const std::vector<RawDetection>& dets,
                                   const LetterboxMeta& meta) {
    std::vector<Detection> out;
    out.reserve(dets.size());
    for (const RawDetection& d : dets) {
        double x = (d.box.x - meta.pad_x) / meta.scale;
        double y = (d.box.y - meta.pad_y) / meta.scale;
        double w = d.box.w / meta.scale;
        double h = d.box.h / meta.scale;
        // clip to the original image
        const double x2 = std::clamp(x + w, 0.0, static_cast<double>(meta.orig_w));
        const double y2 = std::clamp(y + h, 0.0, static_cast<double>(meta.orig_h));
        x = std::clamp(x, 0.0, static_cast<double>(meta.orig_w));
        y = std::clamp(y, 0.0, static_cast<double>(meta.orig_h));
        w = x2 - x;
        h = y2 - y;
        if (w <= 0.0 || h <= 0.0) continue;  // entirely inside a padding bar
        Detection det;
        det.class_id = d.class_id;
        det.score = d.score;
        det.bbox = {static_cast<float>(x), static_cast<float>(y), static_cast<float>(w),
                    static_cast<float>(h)};
        out.push_back(det);
    }
    return out;
}

}  // namespace orbitdet
