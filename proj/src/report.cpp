#include "sentinel/report.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <sstream>

#include "sentinel/error.hpp"

namespace sentinel {

namespace {

struct Decimal {
    bool negative = false;
    std::string integer;   // at least one digit
    std::string fraction;
};

Decimal shortest_decimal(double value) {
    if (!std::isfinite(value)) {
        throw Error(Errc::InvalidArgument, "cannot render a non-finite value");
    }
    std::array<char, 512> buf{};
    auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value,
                                   std::chars_format::fixed);
    if (ec != std::errc{}) {
        throw Error(Errc::InvalidArgument, "value out of renderable range");
    }
    std::string_view text(buf.data(), static_cast<std::size_t>(end - buf.data()));
    Decimal d;
    if (!text.empty() && text.front() == '-') {
        d.negative = true;
        text.remove_prefix(1);
    }
    const auto dot = text.find('.');
    d.integer = std::string(text.substr(0, dot));
    if (dot != std::string_view::npos) {
        d.fraction = std::string(text.substr(dot + 1));
    }
    return d;
}

// Adds one unit in the last place of digits; returns true on overflow.
bool increment_digits(std::string& digits) {
    for (auto it = digits.rbegin(); it != digits.rend(); ++it) {
        if (*it == '9') {
            *it = '0';
        } else {
            ++*it;
            return false;
        }
    }
    return true;
}

}  // namespace

std::string round_half_even(double value, int decimals) {
    if (decimals < 0) {
        throw Error(Errc::InvalidArgument, "decimals must be non-negative");
    }
    Decimal d = shortest_decimal(value);
    const auto places = static_cast<std::size_t>(decimals);

    if (d.fraction.size() > places) {
        const char first_dropped = d.fraction[places];
        const bool rest_nonzero =
            d.fraction.find_first_not_of('0', places + 1) != std::string::npos;
        std::string kept = d.fraction.substr(0, places);
        const char last_kept = places > 0 ? kept.back() : d.integer.back();
        const bool odd = ((last_kept - '0') % 2) != 0;
        const bool round_up =
            first_dropped > '5' || (first_dropped == '5' && (rest_nonzero || odd));
        if (round_up) {
            if (increment_digits(kept)) {
                if (increment_digits(d.integer)) {
                    d.integer.insert(d.integer.begin(), '1');
                }
            }
        }
        d.fraction = std::move(kept);
    } else {
        d.fraction.append(places - d.fraction.size(), '0');
    }

    std::string out;
    const bool all_zero = d.integer.find_first_not_of('0') == std::string::npos &&
                          d.fraction.find_first_not_of('0') == std::string::npos;
    if (d.negative && !all_zero) {
        out.push_back('-');
    }
    out += d.integer;
    if (places > 0) {
        out.push_back('.');
        out += d.fraction;
    }
    return out;
}

std::string format_percent(double ratio) {
    // Shift the decimal point on the rounded string, not on the double.
    std::string r = round_half_even(ratio, 3);
    std::string sign;
    if (!r.empty() && r.front() == '-') {
        sign = "-";
        r.erase(r.begin());
    }
    const auto dot = r.find('.');
    std::string digits = r.substr(0, dot) + r.substr(dot + 1);  // value * 1000
    while (digits.size() > 2 && digits.front() == '0') {
        digits.erase(digits.begin());
    }
    if (digits.size() < 2) {
        digits.insert(digits.begin(), '0');
    }
    return sign + digits.substr(0, digits.size() - 1) + "." + digits.substr(digits.size() - 1) + "%";
}

std::string render_summary_row(const ClassRow& row) {
    std::ostringstream os;
    os << row.name << ' ' << row.images << ' ' << row.instances << ' '
       << round_half_even(row.precision, 3) << ' ' << round_half_even(row.recall, 3) << ' '
       << round_half_even(row.map50, 3) << ' ' << round_half_even(row.map50_95, 3);
    return os.str();
}

std::string render_confusion_csv(const MetricsReport& report) {
    const ConfusionMatrix& cm = report.confusion;
    auto label = [&](std::size_t i) {
        return i == cm.background() ? std::string("background") : report.class_names.at(i);
    };
    std::ostringstream os;
    os << "truth\\pred";
    for (std::size_t j = 0; j < cm.size(); ++j) {
        os << ',' << label(j);
    }
    os << '\n';
    for (std::size_t i = 0; i < cm.size(); ++i) {
        os << label(i);
        for (std::size_t j = 0; j < cm.size(); ++j) {
            os << ',' << cm.at(i, j);
        }
        os << '\n';
    }
    return os.str();
}

std::string render_report(const MetricsReport& report, ReportFormat format) {
    std::ostringstream os;
    if (format == ReportFormat::Text) {
        os << kSummaryHeader << '\n';
        os << render_summary_row(report.all) << '\n';
        for (const auto& row : report.class_rows) {
            os << render_summary_row(row) << '\n';
        }
        os << '\n'
           << "Confusion matrix (rows = truth, columns = prediction, IoU "
           << round_half_even(report.iou_thresholds.front(), 2) << ")\n";
        os << render_confusion_csv(report);
        os << '\n' << "Accuracy: " << format_percent(report.accuracy.value) << '\n';
    } else {
        os << "class,images,instances,precision,recall,map50,map50_95\n";
        auto csv_row = [&os](const ClassRow& row) {
            os << row.name << ',' << row.images << ',' << row.instances << ','
               << round_half_even(row.precision, 3) << ',' << round_half_even(row.recall, 3)
               << ',' << round_half_even(row.map50, 3) << ','
               << round_half_even(row.map50_95, 3) << '\n';
        };
        csv_row(report.all);
        for (const auto& row : report.class_rows) {
            csv_row(row);
        }
        os << '\n' << render_confusion_csv(report);
        os << '\n' << "accuracy," << round_half_even(report.accuracy.value, 3) << '\n';
    }
    for (const auto& w : report.warnings) {
        os << "warning: " << w << '\n';
    }
    return os.str();
}

}  // namespace sentinel
