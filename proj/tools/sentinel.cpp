#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "sentinel/api.hpp"
#include "sentinel/config.hpp"
#include "sentinel/error.hpp"
#include "sentinel/eval.hpp"
#include "sentinel/pipeline.hpp"
#include "sentinel/watchlist.hpp"

namespace {

using namespace sentinel;

std::vector<double> read_embedding(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(Errc::IoError, "cannot open " + path);
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw Error(Errc::InvalidArgument, path + ": " + e.what());
    }
    if (!doc.is_array()) throw Error(Errc::InvalidArgument, path + ": expected a JSON array of numbers");
    std::vector<double> values;
    for (const auto& v : doc) {
        if (!v.is_number()) throw Error(Errc::InvalidArgument, path + ": expected a JSON array of numbers");
        values.push_back(v.get<double>());
    }
    return values;
}

int run_eval_command(const std::string& gt, const std::string& pred, const std::string& iou,
                     double floor, const std::string& format, const std::string& names) {
    std::optional<std::vector<std::string>> class_names;
    if (!names.empty()) class_names = load_class_names(names);
    const EvalDataset ds = load_eval_dataset(gt, pred, class_names);
    EvalOptions options;
    options.iou_thresholds = parse_iou_spec(iou);
    options.confidence_floor = floor;
    const EvalResult r = run_eval(ds, options, format == "csv" ? ReportFormat::Csv : ReportFormat::Text);
    if (format == "json") {
        std::cout << report_to_json(r.report);
    } else {
        std::cout << r.rendered;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Plate and face watchlist pipeline"};
    app.require_subcommand(1);

    std::string config_path;

    auto* run = app.add_subcommand("run", "Process a frame manifest and write the event log");
    run->add_option("--config", config_path, "Pipeline config (JSON)")->required()->check(CLI::ExistingFile);

    auto* serve = app.add_subcommand("serve", "Run the pipeline with the HTTP API");
    serve->add_option("--config", config_path, "Pipeline config (JSON)")->required()->check(CLI::ExistingFile);

    std::string gt_path;
    std::string pred_path;
    std::string iou_spec = "0.5:0.95:0.05";
    double conf_floor = 0.25;
    std::string format = "text";
    std::string names_path;
    auto* eval = app.add_subcommand("eval", "Score detections against ground truth");
    eval->add_option("--gt", gt_path, "Ground truth JSONL")->required()->check(CLI::ExistingFile);
    eval->add_option("--pred", pred_path, "Predictions JSONL")->required()->check(CLI::ExistingFile);
    eval->add_option("--iou", iou_spec, "IoU threshold or start:stop:step")->capture_default_str();
    eval->add_option("--conf-floor", conf_floor, "Confusion matrix confidence floor")
        ->check(CLI::Range(0.0, 1.0))
        ->capture_default_str();
    eval->add_option("--format", format, "text, csv or json")
        ->check(CLI::IsMember({"text", "csv", "json"}))
        ->capture_default_str();
    eval->add_option("--names", names_path, "Class names, one per line")->check(CLI::ExistingFile);

    std::string watchlist_file;
    std::size_t dim = kDefaultEmbeddingDim;
    auto* wl = app.add_subcommand("watchlist", "Edit a watchlist file");
    wl->require_subcommand(1);
    auto* wl_source = wl->add_option_group("source");
    wl_source->add_option("--config", config_path, "Use the watchlist named by this config")
        ->check(CLI::ExistingFile);
    wl_source->add_option("--file", watchlist_file, "Watchlist JSON path");
    wl_source->require_option(1);
    wl->add_option("--dim", dim, "Embedding dimension when using --file")->capture_default_str();

    std::string plate_text;
    std::string label;
    auto* add_plate = wl->add_subcommand("add-plate", "Add a plate entry");
    add_plate->add_option("plate", plate_text, "Plate text")->required();
    add_plate->add_option("--label", label, "Free-form label");

    std::string person;
    std::string embedding_path;
    std::vector<std::string> linked;
    auto* add_face = wl->add_subcommand("add-face", "Add a face entry");
    add_face->add_option("--name", person, "Person name")->required();
    add_face->add_option("--embedding", embedding_path, "JSON array of embedding values")
        ->required()
        ->check(CLI::ExistingFile);
    add_face->add_option("--plate", linked, "Linked plate (repeatable)");

    auto* list = wl->add_subcommand("list", "Print the watchlist");

    std::string entry_id;
    auto* rm = wl->add_subcommand("rm", "Remove an entry by id");
    rm->add_option("id", entry_id, "Entry id (P<n> or F<n>)")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run) {
            const RunSummary s = run_pipeline(load_config(config_path));
            std::cout << "frames " << s.frames_processed << ", alerts " << s.alert_count << ", log "
                      << s.event_log_path.string() << "\n";
            return 0;
        }
        if (*serve) {
            serve_api(load_config(config_path));
            return 0;
        }
        if (*eval) {
            return run_eval_command(gt_path, pred_path, iou_spec, conf_floor, format, names_path);
        }
        if (*wl) {
            std::filesystem::path path = watchlist_file;
            if (!config_path.empty()) {
                const PipelineConfig cfg = load_config(config_path);
                if (cfg.watchlist.empty()) {
                    throw Error(Errc::ConfigError, "config has no watchlist path");
                }
                path = cfg.watchlist;
                dim = cfg.embedding_dim;
            }
            WatchlistStore store(path, dim);
            if (*add_plate) {
                std::cout << to_json(store.add_plate(plate_text, label)).dump() << "\n";
            } else if (*add_face) {
                std::cout << to_json(store.add_face(person, read_embedding(embedding_path), linked)).dump()
                          << "\n";
            } else if (*list) {
                std::cout << to_json(*store.snapshot()).dump(2) << "\n";
            } else if (*rm) {
                const bool removed = entry_id.starts_with("F") ? store.remove_face(entry_id)
                                                               : store.remove_plate(entry_id);
                if (!removed) throw Error(Errc::NotFound, "no entry with id " + entry_id);
            }
            return 0;
        }
    } catch (const Error& e) {
        std::cerr << "error [" << to_string(e.code()) << "]: " << e.what() << "\n";
        switch (e.code()) {
            case Errc::ConfigError:
            case Errc::InvalidArgument:
                return 2;
            default:
                return 1;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
