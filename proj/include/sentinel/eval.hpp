#pragma once

#include <filesystem>
#include <istream>
#include <optional>
#include <string>
#include <vector>

#include "sentinel/metrics.hpp"
#include "sentinel/report.hpp"

namespace sentinel {

/// Ground truth and predictions grouped per image, in ground-truth file order.
struct EvalDataset {
    std::vector<EvalImage> images;
    std::vector<std::string> class_names;   // index = class id
};

/// Both files share one line-delimited schema:
///   {"image_id": str, "class_id": int, "bbox": [x0,y0,x1,y1], "confidence": num}
/// `confidence` is required for predictions and forbidden for ground truth.
/// A ground-truth line with only `image_id` declares an image without labels.
///
/// Without class_names the table is "0".."N-1" for the largest id seen.
/// Errors: SchemaError (line-numbered), UnknownImageId for a prediction on
/// an image that has no ground-truth line.
EvalDataset load_eval_dataset(std::istream& gt, std::istream& pred,
                              std::optional<std::vector<std::string>> class_names = std::nullopt);
EvalDataset load_eval_dataset(const std::filesystem::path& gt_path,
                              const std::filesystem::path& pred_path,
                              std::optional<std::vector<std::string>> class_names = std::nullopt);

/// One name per non-empty line.
std::vector<std::string> load_class_names(const std::filesystem::path& path);

/// Parses "0.5" or "0.5:0.95:0.05".
std::vector<double> parse_iou_spec(const std::string& spec);

struct EvalResult {
    MetricsReport report;
    std::string rendered;
};

EvalResult run_eval(const EvalDataset& dataset, const EvalOptions& options, ReportFormat format);

/// Full-precision JSON form of a report, for tooling and oracle comparison.
std::string report_to_json(const MetricsReport& report);

}  // namespace sentinel
