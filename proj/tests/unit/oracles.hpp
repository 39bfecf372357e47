// Brute-force reference implementations used only by tests. They are kept
// deliberately naive and share no code with the library beyond plain types.
#pragma once

#include <algorithm>
#include <cstddef>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "sentinel/metrics.hpp"

namespace oracle {

/// Area counted on a grid of `cell`-sized squares. Exact for boxes whose
/// coordinates are multiples of `cell`.
inline double grid_iou(const sentinel::BBox& a, const sentinel::BBox& b, double cell, double extent) {
    const auto n = static_cast<long>(extent / cell);
    long in_a = 0, in_b = 0, both = 0;
    for (long i = 0; i < n; ++i) {
        const double x = (i + 0.5) * cell;
        for (long j = 0; j < n; ++j) {
            const double y = (j + 0.5) * cell;
            const bool pa = x > a.x_min && x < a.x_max && y > a.y_min && y < a.y_max;
            const bool pb = x > b.x_min && x < b.x_max && y > b.y_min && y < b.y_max;
            in_a += pa;
            in_b += pb;
            both += pa && pb;
        }
    }
    const long uni = in_a + in_b - both;
    return uni == 0 ? 0.0 : static_cast<double>(both) / static_cast<double>(uni);
}

/// Greedy matching restated as a search: enumerate every injective partial
/// assignment and keep the one whose per-prediction keys (matched, IoU,
/// -gt index), read in processing order, are lexicographically largest.
struct Assignment {
    std::vector<std::optional<std::size_t>> gt_for_pred;   // by original pred index
    std::size_t fn = 0;
};

inline Assignment exhaustive_match(const std::vector<sentinel::Detection>& preds,
                                   const std::vector<sentinel::GroundTruth>& gts, double thr) {
    std::vector<std::size_t> order(preds.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return preds[a].confidence > preds[b].confidence;
    });

    using Key = std::vector<std::tuple<int, double, long>>;
    std::optional<Key> best_key;
    std::vector<std::optional<std::size_t>> current(preds.size()), best(preds.size());
    std::vector<bool> used(gts.size(), false);

    std::function<void(std::size_t)> rec = [&](std::size_t k) {
        if (k == order.size()) {
            Key key;
            for (std::size_t p : order) {
                if (current[p]) {
                    key.emplace_back(1, sentinel::iou(preds[p].bbox, gts[*current[p]].bbox),
                                     -static_cast<long>(*current[p]));
                } else {
                    key.emplace_back(0, 0.0, 0);
                }
            }
            if (!best_key || key > *best_key) {
                best_key = key;
                best = current;
            }
            return;
        }
        const std::size_t p = order[k];
        current[p].reset();
        rec(k + 1);
        for (std::size_t g = 0; g < gts.size(); ++g) {
            if (used[g] || gts[g].class_id != preds[p].class_id) continue;
            if (sentinel::iou(preds[p].bbox, gts[g].bbox) < thr) continue;
            used[g] = true;
            current[p] = g;
            rec(k + 1);
            current[p].reset();
            used[g] = false;
        }
    };
    rec(0);

    Assignment out{best, gts.size()};
    for (const auto& g : best) out.fn -= g.has_value();
    return out;
}

/// AP as a sum over true positives of the best precision reachable at or
/// beyond that rank, each weighted by 1 / num_gt.
inline double step_curve_ap(std::vector<sentinel::RankedPrediction> ranked, std::size_t num_gt) {
    if (num_gt == 0) return ranked.empty() ? 1.0 : 0.0;
    std::stable_sort(ranked.begin(), ranked.end(),
                     [](const auto& a, const auto& b) { return a.confidence > b.confidence; });
    std::vector<double> precision(ranked.size());
    std::size_t tp = 0;
    for (std::size_t i = 0; i < ranked.size(); ++i) {
        tp += ranked[i].is_tp;
        precision[i] = static_cast<double>(tp) / static_cast<double>(i + 1);
    }
    double ap = 0.0;
    for (std::size_t k = 0; k < ranked.size(); ++k) {
        if (!ranked[k].is_tp) continue;
        double best = 0.0;
        for (std::size_t j = k; j < ranked.size(); ++j) best = std::max(best, precision[j]);
        ap += best / static_cast<double>(num_gt);
    }
    return ap;
}

/// Plain recursive edit distance with an explicit list of free pairs.
inline int edit_distance(const std::string& a, const std::string& b,
                         const std::vector<std::pair<char, char>>& free_pairs) {
    auto sub_cost = [&](char x, char y) {
        if (x == y) return 0;
        for (auto [p, q] : free_pairs) {
            if ((x == p && y == q) || (x == q && y == p)) return 0;
        }
        return 1;
    };
    std::vector<std::vector<int>> memo(a.size() + 1, std::vector<int>(b.size() + 1, -1));
    std::function<int(std::size_t, std::size_t)> d = [&](std::size_t i, std::size_t j) -> int {
        if (i == 0) return static_cast<int>(j);
        if (j == 0) return static_cast<int>(i);
        int& m = memo[i][j];
        if (m >= 0) return m;
        m = std::min({d(i - 1, j) + 1, d(i, j - 1) + 1, d(i - 1, j - 1) + sub_cost(a[i - 1], b[j - 1])});
        return m;
    };
    return d(a.size(), b.size());
}

inline const std::vector<std::pair<char, char>>& default_pairs() {
    static const std::vector<std::pair<char, char>> pairs{
        {'O', '0'}, {'I', '1'}, {'B', '8'}, {'S', '5'}, {'Z', '2'}};
    return pairs;
}

}  // namespace oracle
