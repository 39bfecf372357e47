#include "sentinel/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "sentinel/error.hpp"

namespace sentinel {

std::size_t MatchResult::true_positives() const noexcept {
    return static_cast<std::size_t>(std::count_if(
        assignments.begin(), assignments.end(),
        [](const PredAssignment& a) { return a.outcome == MatchOutcome::TP; }));
}

std::size_t MatchResult::false_positives() const noexcept {
    return assignments.size() - true_positives();
}

namespace {

std::vector<std::size_t> confidence_order(std::span<const Detection> preds) {
    std::vector<std::size_t> order(preds.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return preds[a].confidence > preds[b].confidence;
    });
    return order;
}

}  // namespace

MatchResult match_detections(std::span<const Detection> preds,
                             std::span<const GroundTruth> gts, double iou_threshold) {
    if (!(iou_threshold > 0.0 && iou_threshold <= 1.0)) {
        throw Error(Errc::InvalidArgument, "iou_threshold must be in (0, 1]");
    }
    MatchResult result;
    result.assignments.reserve(preds.size());
    std::vector<bool> claimed(gts.size(), false);

    for (std::size_t pi : confidence_order(preds)) {
        const Detection& pred = preds[pi];
        std::optional<std::size_t> best;
        double best_iou = iou_threshold;
        for (std::size_t gi = 0; gi < gts.size(); ++gi) {
            if (claimed[gi] || gts[gi].class_id != pred.class_id) {
                continue;
            }
            const double overlap = iou(pred.bbox, gts[gi].bbox);
            if (overlap >= best_iou && (!best || overlap > best_iou)) {
                best = gi;
                best_iou = overlap;
            }
        }
        PredAssignment a{pi, best, best ? MatchOutcome::TP : MatchOutcome::FP};
        if (best) {
            claimed[*best] = true;
        }
        result.assignments.push_back(a);
    }
    result.false_negatives =
        static_cast<std::size_t>(std::count(claimed.begin(), claimed.end(), false));
    return result;
}

PrecisionRecall precision_recall(std::size_t tp, std::size_t fp, std::size_t fn) noexcept {
    PrecisionRecall pr;
    pr.precision = (tp + fp) == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fp);
    pr.recall = (tp + fn) == 0 ? 1.0 : static_cast<double>(tp) / static_cast<double>(tp + fn);
    return pr;
}

PrecisionRecall precision_recall(const MatchResult& result) noexcept {
    return precision_recall(result.true_positives(), result.false_positives(),
                            result.false_negatives);
}

double average_precision(std::vector<RankedPrediction> ranked, std::size_t num_gt) {
    if (num_gt == 0) {
        return ranked.empty() ? 1.0 : 0.0;
    }
    if (ranked.empty()) {
        return 0.0;
    }
    std::stable_sort(ranked.begin(), ranked.end(),
                     [](const RankedPrediction& a, const RankedPrediction& b) {
                         return a.confidence > b.confidence;
                     });

    const std::size_t n = ranked.size();
    std::vector<double> precision(n);
    std::vector<double> recall(n);
    std::size_t tp = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (ranked[i].is_tp) {
            ++tp;
        }
        precision[i] = static_cast<double>(tp) / static_cast<double>(i + 1);
        recall[i] = static_cast<double>(tp) / static_cast<double>(num_gt);
    }
    // Precision envelope: running max from the right.
    for (std::size_t i = n - 1; i > 0; --i) {
        precision[i - 1] = std::max(precision[i - 1], precision[i]);
    }
    double ap = 0.0;
    double prev_recall = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (recall[i] > prev_recall) {
            ap += (recall[i] - prev_recall) * precision[i];
            prev_recall = recall[i];
        }
    }
    return ap;
}

std::vector<double> iou_range(double start, double stop, double step) {
    if (!(step > 0.0) || stop < start) {
        throw Error(Errc::InvalidArgument, "invalid IoU range");
    }
    const auto count = static_cast<std::size_t>(std::floor((stop - start) / step + 1e-9)) + 1;
    std::vector<double> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        const double v = std::round((start + static_cast<double>(i) * step) * 1e6) / 1e6;
        if (!(v > 0.0 && v <= 1.0)) {
            throw Error(Errc::InvalidArgument, "IoU thresholds must lie in (0, 1]");
        }
        out.push_back(v);
    }
    return out;
}

std::vector<double> coco_thresholds() { return iou_range(0.50, 0.95, 0.05); }

namespace {

struct ClassSlice {
    std::vector<Detection> preds;
    std::vector<GroundTruth> gts;
};

ClassSlice slice_class(const EvalImage& image, int class_id) {
    ClassSlice s;
    for (const auto& p : image.preds) {
        if (p.class_id == class_id) s.preds.push_back(p);
    }
    for (const auto& g : image.gts) {
        if (g.class_id == class_id) s.gts.push_back(g);
    }
    return s;
}

}  // namespace

MeanApResult mean_ap(std::span<const EvalImage> images, std::span<const int> class_ids,
                     std::span<const double> iou_thresholds) {
    MeanApResult result;
    double sum = 0.0;
    std::size_t included = 0;

    for (int cls : class_ids) {
        std::vector<ClassSlice> slices;
        slices.reserve(images.size());
        ClassAp cap;
        cap.class_id = cls;
        for (const auto& image : images) {
            slices.push_back(slice_class(image, cls));
            cap.num_gt += slices.back().gts.size();
        }
        for (double thr : iou_thresholds) {
            std::vector<RankedPrediction> ranked;
            for (const auto& s : slices) {
                const MatchResult m = match_detections(s.preds, s.gts, thr);
                for (const auto& a : m.assignments) {
                    ranked.push_back({s.preds[a.pred_index].confidence,
                                      a.outcome == MatchOutcome::TP});
                }
            }
            cap.ap_per_threshold.push_back(average_precision(std::move(ranked), cap.num_gt));
        }
        if (!cap.ap_per_threshold.empty()) {
            cap.mean = std::accumulate(cap.ap_per_threshold.begin(), cap.ap_per_threshold.end(), 0.0) /
                       static_cast<double>(cap.ap_per_threshold.size());
        }
        if (cap.num_gt > 0) {
            sum += cap.mean;
            ++included;
        }
        result.per_class.push_back(std::move(cap));
    }
    if (included == 0) {
        result.empty_class_set = true;
        result.value = 0.0;
    } else {
        result.value = sum / static_cast<double>(included);
    }
    return result;
}

std::size_t ConfusionMatrix::total() const noexcept {
    return std::accumulate(cells_.begin(), cells_.end(), std::size_t{0});
}

std::size_t ConfusionMatrix::trace() const noexcept {
    std::size_t t = 0;
    for (std::size_t i = 0; i < size(); ++i) {
        t += cells_[i * size() + i];
    }
    return t;
}

ConfusionMatrix& ConfusionMatrix::operator+=(const ConfusionMatrix& other) {
    if (other.num_classes_ != num_classes_) {
        throw Error(Errc::InvalidArgument, "confusion matrix class count mismatch");
    }
    for (std::size_t i = 0; i < cells_.size(); ++i) {
        cells_[i] += other.cells_[i];
    }
    return *this;
}

ConfusionMatrix confusion_matrix(std::span<const Detection> preds,
                                 std::span<const GroundTruth> gts, double iou_threshold,
                                 double confidence_floor, std::size_t num_classes) {
    if (!(confidence_floor >= 0.0 && confidence_floor <= 1.0)) {
        throw Error(Errc::InvalidArgument, "confidence_floor must be in [0, 1]");
    }
    auto check_class = [num_classes](int cls) {
        if (cls < 0 || static_cast<std::size_t>(cls) >= num_classes) {
            throw Error(Errc::InvalidArgument, "class id " + std::to_string(cls) + " out of range");
        }
        return static_cast<std::size_t>(cls);
    };

    std::vector<Detection> kept;
    for (const auto& p : preds) {
        if (p.confidence >= confidence_floor) kept.push_back(p);
    }
    ConfusionMatrix cm(num_classes);
    const MatchResult m = match_detections(kept, gts, iou_threshold);
    std::vector<bool> gt_matched(gts.size(), false);
    for (const auto& a : m.assignments) {
        const std::size_t pred_cls = check_class(kept[a.pred_index].class_id);
        if (a.gt_index) {
            gt_matched[*a.gt_index] = true;
            cm.increment(check_class(gts[*a.gt_index].class_id), pred_cls);
        } else {
            cm.increment(cm.background(), pred_cls);
        }
    }
    for (std::size_t gi = 0; gi < gts.size(); ++gi) {
        if (!gt_matched[gi]) {
            cm.increment(check_class(gts[gi].class_id), cm.background());
        }
    }
    return cm;
}

Accuracy accuracy(const ConfusionMatrix& matrix) noexcept {
    const std::size_t total = matrix.total();
    if (total == 0) {
        return {0.0, true};
    }
    return {static_cast<double>(matrix.trace()) / static_cast<double>(total), false};
}

MetricsReport evaluate(std::span<const EvalImage> images,
                       const std::vector<std::string>& class_names,
                       const EvalOptions& options) {
    if (options.iou_thresholds.empty()) {
        throw Error(Errc::InvalidArgument, "at least one IoU threshold is required");
    }
    MetricsReport report;
    report.class_names = class_names;
    report.iou_thresholds = options.iou_thresholds;

    const std::size_t num_classes = class_names.size();
    std::vector<int> class_ids(num_classes);
    std::iota(class_ids.begin(), class_ids.end(), 0);

    const double primary = options.iou_thresholds.front();
    const std::span<const double> first_only(options.iou_thresholds.data(), 1);
    const MeanApResult map_first = mean_ap(images, class_ids, first_only);
    const MeanApResult map_all = mean_ap(images, class_ids, options.iou_thresholds);
    report.class_ap = map_all.per_class;

    report.confusion = ConfusionMatrix(num_classes);
    for (const auto& image : images) {
        report.confusion += confusion_matrix(image.preds, image.gts, primary,
                                             options.confidence_floor, num_classes);
    }
    report.accuracy = accuracy(report.confusion);
    if (report.accuracy.empty) {
        report.warnings.emplace_back("confusion matrix is empty; accuracy reported as 0");
    }
    if (map_all.empty_class_set) {
        report.warnings.emplace_back("no class has ground truth; mAP reported as 0");
    }

    double p_sum = 0.0;
    double r_sum = 0.0;
    for (std::size_t c = 0; c < num_classes; ++c) {
        const int cls = class_ids[c];
        ClassRow row;
        row.name = class_names[c];
        std::size_t tp = 0;
        std::size_t fp = 0;
        std::size_t fn = 0;
        for (const auto& image : images) {
            const ClassSlice s = slice_class(image, cls);
            if (!s.gts.empty()) ++row.images;
            row.instances += s.gts.size();
            const MatchResult m = match_detections(s.preds, s.gts, primary);
            tp += m.true_positives();
            fp += m.false_positives();
            fn += m.false_negatives;
        }
        if (row.instances == 0) {
            continue;
        }
        const PrecisionRecall pr = precision_recall(tp, fp, fn);
        row.precision = pr.precision;
        row.recall = pr.recall;
        row.map50 = map_first.per_class[c].mean;
        row.map50_95 = map_all.per_class[c].mean;
        p_sum += row.precision;
        r_sum += row.recall;
        report.class_rows.push_back(std::move(row));
    }

    report.all.name = "all";
    report.all.images = images.size();
    for (const auto& row : report.class_rows) {
        report.all.instances += row.instances;
    }
    if (!report.class_rows.empty()) {
        const auto k = static_cast<double>(report.class_rows.size());
        report.all.precision = p_sum / k;
        report.all.recall = r_sum / k;
    }
    report.all.map50 = map_first.value;
    report.all.map50_95 = map_all.value;
    return report;
}

}  // namespace sentinel
