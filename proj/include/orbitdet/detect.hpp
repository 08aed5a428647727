#pragma once

#include <string>
#include <utility>
#include <vector>

#include "orbitdet/tensor.hpp"

namespace orbitdet {

/// Detection-head geometry and thresholds. The defaults use one anchor per
/// scale so a 416 input yields 52^2 + 26^2 + 13^2 = 3549 candidates.
struct HeadConfig {
    int input_size = 416;
    std::vector<int> strides = {8, 16, 32};
    // anchors[i] holds the (w, h) pixel priors for strides[i]
    std::vector<std::vector<std::pair<float, float>>> anchors = {
        {{32.0f, 32.0f}}, {{96.0f, 96.0f}}, {{224.0f, 224.0f}}};
    int num_classes = 3;
    float conf_threshold = 0.25f;
    float nms_iou_threshold = 0.45f;

    int64_t total_candidates() const;
};

void check_config(const HeadConfig& cfg);  // throws ConfigError

/// How a source image was mapped into the square network input.
struct LetterboxMeta {
    double scale = 1.0;  // min(input/orig_w, input/orig_h)
    int pad_x = 0;       // left bar width, px
    int pad_y = 0;       // top bar height, px
    int orig_w = 0;
    int orig_h = 0;
};

/// Axis-aligned box, top-left corner + size.
struct BBox {
    float x = 0, y = 0, w = 0, h = 0;
};

/// Intersection over union, in [0, 1].
double iou(const BBox& a, const BBox& b);

/// One decoded head cell/anchor before thresholding. Box is center-form in
/// letterbox coordinates; index is the candidate's position in decode order.
struct Candidate {
    int index = 0;
    float cx = 0, cy = 0, w = 0, h = 0;
    float objectness = 0;
    std::vector<float> class_scores;
};

/// A thresholded (candidate, class) pair, still in letterbox coordinates.
struct RawDetection {
    int candidate_index = 0;
    int class_id = 0;
    float score = 0;  // objectness * class score
    BBox box;
};

/// Final classified, scored, localized box in original-image pixels.
struct Detection {
    int class_id = 0;
    float score = 0;
    BBox bbox;
};

/// Detection plus the image it belongs to; the unit the detections JSON and
/// the evaluator work with.
struct DetectionRecord {
    std::string image;
    Detection det;
};

/// Bilinear resize into the square network input, centered, with mid-gray
/// (0.5) bars preserving aspect ratio. Image is HxWx3 with values in [0, 1].
std::pair<TensorF32, LetterboxMeta> letterbox(const TensorF32& image, int input_size);
std::pair<TensorF32, LetterboxMeta> letterbox(const TensorF32& image, const HeadConfig& cfg);

/// Decodes raw head tensors (one per stride, HxWxC or 1xHxWxC) into
/// candidates: cx = (sigmoid(tx)+col)*stride, cy likewise with row,
/// w = anchor_w*exp(tw), h = anchor_h*exp(th), objectness and class scores
/// through sigmoid. Candidate count always equals cfg.total_candidates().
std::vector<Candidate> decode(const std::vector<TensorF32>& head_outputs, const HeadConfig& cfg);

enum class FilterMode { serial, parallel };

/// Keeps (candidate, class) pairs with objectness * class score strictly
/// above cfg.conf_threshold. Output is ordered by ascending candidate index
/// (class id ascending within a candidate) in both modes; parallel mode just
/// splits the scan across workers.
std::vector<RawDetection> filter_confidence(const std::vector<Candidate>& candidates,
                                            const HeadConfig& cfg,
                                            FilterMode mode = FilterMode::serial);

/// Greedy per-class non-max suppression. Boxes are ranked by (score desc,
/// input position asc); a box is suppressed when a kept box of the same class
/// overlaps it with IoU > iou_thresh. Output is sorted by (score desc, input
/// position asc).
std::vector<RawDetection> nms(const std::vector<RawDetection>& dets, float iou_thresh);

/// Maps letterbox-space boxes back to original-image pixels and clips to the
/// image bounds. Boxes left degenerate by clipping are dropped.
std::vector<Detection> unletterbox(const std::vector<RawDetection>& dets,
                                   const LetterboxMeta& meta);

}  // namespace orbitdet
