#include "orbitdet/eval.hpp"

#include <algorithm>
#include <numeric>

#include "orbitdet/errors.hpp"

namespace orbitdet {

std::vector<bool> match_detections(const std::vector<DetectionRecord>& dets,
                                   const std::vector<GroundTruth>& gts, double iou_thresh) {
    std::vector<bool> gt_used(gts.size(), false);
    std::vector<bool> labels(dets.size(), false);
    for (size_t i = 0; i < dets.size(); ++i) {
        const DetectionRecord& d = dets[i];
        double best = -1.0;
        size_t best_j = gts.size();
        for (size_t j = 0; j < gts.size(); ++j) {
            if (gt_used[j] || gts[j].image != d.image || gts[j].class_id != d.det.class_id)
                continue;
            const double v = iou(d.det.bbox, gts[j].bbox);
            if (v > best) {
                best = v;
                best_j = j;
            }
        }
        if (best_j < gts.size() && best >= iou_thresh) {
            labels[i] = true;
            gt_used[best_j] = true;
        }
    }
    return labels;
}

double average_precision(const std::vector<bool>& labels, int num_gt) {
    if (num_gt <= 0) return 0.0;
    const size_t n = labels.size();
    if (n == 0) return 0.0;

    std::vector<double> recall(n), precision(n);
    int tp = 0, fp = 0;
    for (size_t i = 0; i < n; ++i) {
        labels[i] ? ++tp : ++fp;
        recall[i] = static_cast<double>(tp) / num_gt;
        precision[i] = static_cast<double>(tp) / (tp + fp);
    }
    // precision envelope: monotone non-increasing from the right
    for (size_t i = n - 1; i-- > 0;) precision[i] = std::max(precision[i], precision[i + 1]);

    double ap = 0.0, prev_recall = 0.0;
    for (size_t i = 0; i < n; ++i) {
        ap += (recall[i] - prev_recall) * precision[i];
        prev_recall = recall[i];
    }
    return ap;
}

double mean_ap(const std::map<int, double>& per_class_ap) {
    if (per_class_ap.empty()) throw DomainError("no class has ground truth");
    double sum = 0.0;
    for (const auto& [cls, ap] : per_class_ap) sum += ap;
    return sum / static_cast<double>(per_class_ap.size());
}

EvalReport evaluate(const std::vector<DetectionRecord>& dets, const std::vector<GroundTruth>& gts,
                    double iou_thresh) {
    EvalReport report;
    report.iou_threshold = iou_thresh;

    std::map<int, int> gt_count;
    for (const GroundTruth& g : gts) ++gt_count[g.class_id];
    if (gt_count.empty()) throw DomainError("no class has ground truth");

    for (const auto& [cls, num_gt] : gt_count) {
        std::vector<size_t> order;
        for (size_t i = 0; i < dets.size(); ++i)
            if (dets[i].det.class_id == cls) order.push_back(i);
        std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
            if (dets[a].det.score != dets[b].det.score) return dets[a].det.score > dets[b].det.score;
            return a < b;
        });

        std::vector<DetectionRecord> cls_dets;
        cls_dets.reserve(order.size());
        for (size_t i : order) cls_dets.push_back(dets[i]);
        std::vector<GroundTruth> cls_gts;
        for (const GroundTruth& g : gts)
            if (g.class_id == cls) cls_gts.push_back(g);

        const std::vector<bool> labels = match_detections(cls_dets, cls_gts, iou_thresh);
        report.per_class_ap[cls] = average_precision(labels, num_gt);
    }
    report.map = mean_ap(report.per_class_ap);
    return report;
}

}  // namespace orbitdet
