#pragma once

#include <map>
#include <string>
#include <vector>

#include "orbitdet/detect.hpp"

namespace orbitdet {

/// One labeled box from the annotation set.
struct GroundTruth {
    std::string image;
    int class_id = 0;
    BBox bbox;
};

/// Per-class average precision and their mean at a fixed IoU threshold.
struct EvalReport {
    double iou_threshold = 0.5;
    std::map<int, double> per_class_ap;  // classes present in ground truth
    double map = 0.0;
};

/// Greedy VOC-style matching over detections already sorted by score
/// descending (ties by input order): per image+class, a detection is TP when
/// its best-IoU unmatched ground truth reaches the threshold; each ground
/// truth matches at most once. Returns one TP/FP label per detection, in
/// input order.
std::vector<bool> match_detections(const std::vector<DetectionRecord>& dets,
                                   const std::vector<GroundTruth>& gts, double iou_thresh);

/// Area under the precision-recall curve (all points, precision envelope made
/// monotone non-increasing before integration). `labels` must be in score
/// order.
double average_precision(const std::vector<bool>& labels, int num_gt);

/// Unweighted mean over classes that have ground truth. Throws DomainError on
/// an empty map.
double mean_ap(const std::map<int, double>& per_class_ap);

/// Full evaluation: per class present in the ground truth, sort that class's
/// detections by score, match, and integrate. Detections of classes with no
/// ground truth are excluded rather than scored zero.
EvalReport evaluate(const std::vector<DetectionRecord>& dets,
                    const std::vector<GroundTruth>& gts, double iou_thresh = 0.5);

}  // namespace orbitdet
