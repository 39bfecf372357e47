#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sentinel/geometry.hpp"

namespace sentinel {

struct Detection {
    BBox bbox;
    int class_id = 0;
    double confidence = 0.0;
};

struct GroundTruth {
    BBox bbox;
    int class_id = 0;
};

enum class MatchOutcome { TP, FP };

struct PredAssignment {
    std::size_t pred_index = 0;
    std::optional<std::size_t> gt_index;
    MatchOutcome outcome = MatchOutcome::FP;
};

/// Assignments are listed in processing order (descending confidence,
/// lower prediction index first on ties).
struct MatchResult {
    std::vector<PredAssignment> assignments;
    std::size_t false_negatives = 0;

    std::size_t true_positives() const noexcept;
    std::size_t false_positives() const noexcept;
};

/// Greedy one-to-one matching. Each prediction claims the unclaimed
/// same-class ground truth with the highest IoU (lowest index on ties),
/// provided that IoU reaches the threshold.
///
/// Throws Error(InvalidArgument) unless iou_threshold is in (0, 1].
MatchResult match_detections(std::span<const Detection> preds,
                             std::span<const GroundTruth> gts,
                             double iou_threshold);

struct PrecisionRecall {
    double precision = 0.0;
    double recall = 0.0;
};

/// P = TP/(TP+FP), 0 without predictions. R = TP/(TP+FN), 1 without ground truth.
PrecisionRecall precision_recall(std::size_t tp, std::size_t fp, std::size_t fn) noexcept;
PrecisionRecall precision_recall(const MatchResult& result) noexcept;

struct RankedPrediction {
    double confidence = 0.0;
    bool is_tp = false;
};

/// All-point interpolated average precision. The ranking is stable-sorted by
/// descending confidence, so equal confidences keep their input order.
///
/// num_gt == 0 yields 1 for an empty ranking and 0 otherwise.
double average_precision(std::vector<RankedPrediction> ranked, std::size_t num_gt);

/// One image's worth of labels and predictions.
struct EvalImage {
    std::string image_id;
    std::vector<GroundTruth> gts;
    std::vector<Detection> preds;
};

/// Evenly spaced IoU thresholds from start to stop inclusive. Each value is
/// snapped to a 1e-6 grid so 0.50:0.95:0.05 yields exactly the ten decimal
/// values (nearest doubles) rather than accumulated sums.
std::vector<double> iou_range(double start, double stop, double step);

/// The ten thresholds 0.50, 0.55, ..., 0.95.
std::vector<double> coco_thresholds();

struct ClassAp {
    int class_id = 0;
    std::size_t num_gt = 0;
    std::vector<double> ap_per_threshold;
    double mean = 0.0;
};

struct MeanApResult {
    double value = 0.0;
    std::vector<ClassAp> per_class;   // every requested class, included or not
    bool empty_class_set = false;     // no class had ground truth
};

/// Mean over classes (those with ground truth somewhere in the dataset) of
/// the per-class mean AP over the given thresholds. Predictions are ranked
/// across images in dataset order.
MeanApResult mean_ap(std::span<const EvalImage> images, std::span<const int> class_ids,
                     std::span<const double> iou_thresholds);

/// Square count matrix over classes plus a trailing background slot.
/// Rows are truth, columns are prediction.
class ConfusionMatrix {
public:
    ConfusionMatrix() = default;
    explicit ConfusionMatrix(std::size_t num_classes)
        : num_classes_(num_classes), cells_((num_classes + 1) * (num_classes + 1), 0) {}

    std::size_t num_classes() const noexcept { return num_classes_; }
    std::size_t size() const noexcept { return num_classes_ + 1; }
    std::size_t background() const noexcept { return num_classes_; }

    std::size_t at(std::size_t truth, std::size_t pred) const { return cells_.at(index(truth, pred)); }
    void increment(std::size_t truth, std::size_t pred) { ++cells_.at(index(truth, pred)); }

    std::size_t total() const noexcept;
    std::size_t trace() const noexcept;

    ConfusionMatrix& operator+=(const ConfusionMatrix& other);
    friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;

private:
    std::size_t index(std::size_t truth, std::size_t pred) const { return truth * size() + pred; }

    std::size_t num_classes_ = 0;
    std::vector<std::size_t> cells_;
};

/// Detection confusion matrix at an operating point. Predictions below
/// confidence_floor are dropped; the remainder go through match_detections.
/// Class ids must lie in [0, num_classes).
ConfusionMatrix confusion_matrix(std::span<const Detection> preds,
                                 std::span<const GroundTruth> gts, double iou_threshold,
                                 double confidence_floor, std::size_t num_classes);

struct Accuracy {
    double value = 0.0;
    bool empty = false;  // matrix had no counts; value is 0
};

/// trace / total.
Accuracy accuracy(const ConfusionMatrix& matrix) noexcept;

struct ClassRow {
    std::string name;
    std::size_t images = 0;
    std::size_t instances = 0;
    double precision = 0.0;
    double recall = 0.0;
    double map50 = 0.0;
    double map50_95 = 0.0;
};

struct MetricsReport {
    std::vector<ClassRow> class_rows;   // classes with at least one instance
    ClassRow all;
    std::vector<std::string> class_names;
    std::vector<ClassAp> class_ap;      // per class, per threshold
    ConfusionMatrix confusion;
    Accuracy accuracy;
    std::vector<double> iou_thresholds;
    std::vector<std::string> warnings;
};

struct EvalOptions {
    std::vector<double> iou_thresholds = coco_thresholds();
    double confidence_floor = 0.25;
};

/// Full report. class_names[i] names class id i. P, R and mAP50 are taken at
/// the first IoU threshold over all predictions; mAP50-95 is the mean over
/// every configured threshold. The confusion matrix uses the first threshold
/// and the confidence floor.
MetricsReport evaluate(std::span<const EvalImage> images,
                       const std::vector<std::string>& class_names,
                       const EvalOptions& options);

}  // namespace sentinel
