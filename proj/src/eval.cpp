#include "sentinel/eval.hpp"

#include <algorithm>
#include <fstream>
#include <map>

#include "sentinel/error.hpp"
#include "sentinel/jsonl.hpp"

namespace sentinel {

namespace {

constexpr Errc kSchema = Errc::SchemaError;

int get_class(const jsonl::json& obj, std::size_t line) {
    const auto id = jsonl::get_integer(obj, "class_id", line, kSchema);
    if (id < 0 || id > 100000) {
        throw SchemaError(kSchema, line, "class_id out of range");
    }
    return static_cast<int>(id);
}

std::string context(const char* which, const SchemaError& e) {
    return std::string(which) + ": " + e.what();
}

}  // namespace

EvalDataset load_eval_dataset(std::istream& gt, std::istream& pred,
                              std::optional<std::vector<std::string>> class_names) {
    EvalDataset ds;
    std::map<std::string, std::size_t> index;
    int max_class = -1;

    try {
        jsonl::for_each_record(gt, kSchema, [&](std::size_t line, const jsonl::json& obj) {
            jsonl::check_keys(obj, {"image_id", "class_id", "bbox"}, line, kSchema);
            const std::string image_id = jsonl::get_string(obj, "image_id", line, kSchema);
            auto [it, inserted] = index.try_emplace(image_id, ds.images.size());
            if (inserted) ds.images.push_back({image_id, {}, {}});
            const bool has_class = obj.contains("class_id");
            const bool has_box = obj.contains("bbox");
            if (!has_class && !has_box) return;   // image declaration only
            if (has_class != has_box) {
                throw SchemaError(kSchema, line, "ground truth needs both class_id and bbox");
            }
            GroundTruth g{jsonl::get_bbox(obj, "bbox", line, kSchema), get_class(obj, line)};
            max_class = std::max(max_class, g.class_id);
            ds.images[it->second].gts.push_back(g);
        });
    } catch (const SchemaError& e) {
        throw SchemaError(e.code(), e.line(), context("ground truth", e));
    }

    try {
        jsonl::for_each_record(pred, kSchema, [&](std::size_t line, const jsonl::json& obj) {
            jsonl::check_keys(obj, {"image_id", "class_id", "bbox", "confidence"}, line, kSchema);
            const std::string image_id = jsonl::get_string(obj, "image_id", line, kSchema);
            const auto it = index.find(image_id);
            if (it == index.end()) {
                throw SchemaError(Errc::UnknownImageId, line,
                                  "prediction for image '" + image_id + "' which has no ground truth line");
            }
            Detection d{jsonl::get_bbox(obj, "bbox", line, kSchema), get_class(obj, line),
                        jsonl::get_number(obj, "confidence", line, kSchema)};
            if (d.confidence < 0.0 || d.confidence > 1.0) {
                throw SchemaError(kSchema, line, "confidence must be in [0, 1]");
            }
            max_class = std::max(max_class, d.class_id);
            ds.images[it->second].preds.push_back(d);
        });
    } catch (const SchemaError& e) {
        throw SchemaError(e.code(), e.line(), context("predictions", e));
    }

    if (class_names) {
        if (max_class >= static_cast<int>(class_names->size())) {
            throw Error(kSchema, "class_id " + std::to_string(max_class) +
                                     " is missing from the class name table");
        }
        ds.class_names = std::move(*class_names);
    } else {
        for (int c = 0; c <= max_class; ++c) ds.class_names.push_back(std::to_string(c));
    }
    return ds;
}

EvalDataset load_eval_dataset(const std::filesystem::path& gt_path,
                              const std::filesystem::path& pred_path,
                              std::optional<std::vector<std::string>> class_names) {
    std::ifstream gt(gt_path);
    if (!gt) throw Error(Errc::IoError, "cannot open " + gt_path.string());
    std::ifstream pred(pred_path);
    if (!pred) throw Error(Errc::IoError, "cannot open " + pred_path.string());
    return load_eval_dataset(gt, pred, std::move(class_names));
}

std::vector<std::string> load_class_names(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(Errc::IoError, "cannot open " + path.string());
    std::vector<std::string> names;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (!line.empty()) names.push_back(line);
    }
    return names;
}

std::vector<double> parse_iou_spec(const std::string& spec) {
    std::vector<double> parts;
    std::size_t start = 0;
    while (true) {
        const auto colon = spec.find(':', start);
        const std::string piece = spec.substr(start, colon == std::string::npos ? std::string::npos : colon - start);
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(piece, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (piece.empty() || used != piece.size()) {
            throw Error(Errc::InvalidArgument, "bad IoU spec '" + spec + "'");
        }
        parts.push_back(v);
        if (colon == std::string::npos) break;
        start = colon + 1;
    }
    if (parts.size() == 1) {
        return iou_range(parts[0], parts[0], 1.0);
    }
    if (parts.size() == 3) {
        return iou_range(parts[0], parts[1], parts[2]);
    }
    throw Error(Errc::InvalidArgument, "IoU spec must be 'thr' or 'start:stop:step'");
}

EvalResult run_eval(const EvalDataset& dataset, const EvalOptions& options, ReportFormat format) {
    EvalResult r;
    r.report = evaluate(dataset.images, dataset.class_names, options);
    r.rendered = render_report(r.report, format);
    return r;
}

std::string report_to_json(const MetricsReport& report) {
    auto row_json = [](const ClassRow& row) {
        return jsonl::json{{"name", row.name},         {"images", row.images},
                           {"instances", row.instances}, {"precision", row.precision},
                           {"recall", row.recall},       {"map50", row.map50},
                           {"map50_95", row.map50_95}};
    };
    jsonl::json rows = jsonl::json::array();
    for (const auto& row : report.class_rows) rows.push_back(row_json(row));
    jsonl::json aps = jsonl::json::array();
    for (const auto& c : report.class_ap) {
        aps.push_back({{"class_id", c.class_id},
                       {"num_gt", c.num_gt},
                       {"ap", c.ap_per_threshold},
                       {"mean", c.mean}});
    }
    jsonl::json matrix = jsonl::json::array();
    for (std::size_t i = 0; i < report.confusion.size(); ++i) {
        jsonl::json row = jsonl::json::array();
        for (std::size_t j = 0; j < report.confusion.size(); ++j) row.push_back(report.confusion.at(i, j));
        matrix.push_back(row);
    }
    jsonl::json doc{{"all", row_json(report.all)},
                    {"classes", rows},
                    {"class_names", report.class_names},
                    {"class_ap", aps},
                    {"iou_thresholds", report.iou_thresholds},
                    {"confusion", matrix},
                    {"accuracy", report.accuracy.value},
                    {"warnings", report.warnings}};
    return doc.dump(2) + "\n";
}

}  // namespace sentinel
