#include <doctest.h>

#include "sentinel/error.hpp"
#include "sentinel/metrics.hpp"
#include "sentinel/report.hpp"

using namespace sentinel;

TEST_CASE("round half to even on decimal text") {
    CHECK(round_half_even(0.9625, 3) == "0.962");
    CHECK(round_half_even(0.9635, 3) == "0.964");
    CHECK(round_half_even(0.9626, 3) == "0.963");
    CHECK(round_half_even(0.5, 0) == "0");
    CHECK(round_half_even(1.5, 0) == "2");
    CHECK(round_half_even(2.5, 0) == "2");
    CHECK(round_half_even(0.9995, 3) == "1.000");
    CHECK(round_half_even(9.9996, 3) == "10.000");
    CHECK(round_half_even(0.0, 3) == "0.000");
    CHECK(round_half_even(1.0, 3) == "1.000");
    CHECK(round_half_even(-0.0004, 3) == "0.000");
    CHECK(round_half_even(-0.0016, 3) == "-0.002");
    CHECK(round_half_even(1e-20, 3) == "0.000");
    // 0.1 + 0.2 is 0.30000000000000004: not a tie at the 16th place.
    CHECK(round_half_even(0.1 + 0.2, 3) == "0.300");
    CHECK_THROWS_AS(round_half_even(0.5, -1), Error);
}

TEST_CASE("percent formatting") {
    CHECK(format_percent(0.87) == "87.0%");
    CHECK(format_percent(1.0) == "100.0%");
    CHECK(format_percent(0.0) == "0.0%");
    CHECK(format_percent(4.0 / 9.0) == "44.4%");
    CHECK(format_percent(0.0005) == "0.0%");
    CHECK(format_percent(0.0015) == "0.2%");
}

TEST_CASE("summary row from stored aggregates") {
    ClassRow row{"all", 64, 68, 0.961, 0.838, 0.926, 0.582};
    CHECK(render_summary_row(row) == "all 64 68 0.961 0.838 0.926 0.582");
}

TEST_CASE("rendering rounds only at render time") {
    ClassRow row{"plate", 3, 4, 2.0 / 3.0, 0.8375, 0.9265, 0.5825};
    CHECK(render_summary_row(row) == "plate 3 4 0.667 0.838 0.926 0.582");
    CHECK(row.precision == 2.0 / 3.0);
}

TEST_CASE("text and csv report layout") {
    MetricsReport r;
    r.class_names = {"plate"};
    r.all = {"all", 1, 1, 1.0, 1.0, 1.0, 0.5};
    r.class_rows = {{"plate", 1, 1, 1.0, 1.0, 1.0, 0.5}};
    r.confusion = ConfusionMatrix(1);
    r.confusion.increment(0, 0);
    r.accuracy = accuracy(r.confusion);
    r.iou_thresholds = {0.5, 0.95};

    const std::string text = render_report(r, ReportFormat::Text);
    CHECK(text ==
          "Class Images Instances Box(P R mAP50 mAP50-95)\n"
          "all 1 1 1.000 1.000 1.000 0.500\n"
          "plate 1 1 1.000 1.000 1.000 0.500\n"
          "\n"
          "Confusion matrix (rows = truth, columns = prediction, IoU 0.50)\n"
          "truth\\pred,plate,background\n"
          "plate,1,0\n"
          "background,0,0\n"
          "\n"
          "Accuracy: 100.0%\n");

    const std::string csv = render_report(r, ReportFormat::Csv);
    CHECK(csv ==
          "class,images,instances,precision,recall,map50,map50_95\n"
          "all,1,1,1.000,1.000,1.000,0.500\n"
          "plate,1,1,1.000,1.000,1.000,0.500\n"
          "\n"
          "truth\\pred,plate,background\n"
          "plate,1,0\n"
          "background,0,0\n"
          "\n"
          "accuracy,1.000\n");

    r.warnings = {"confusion matrix is empty"};
    CHECK(render_report(r, ReportFormat::Text).ends_with("warning: confusion matrix is empty\n"));
}
