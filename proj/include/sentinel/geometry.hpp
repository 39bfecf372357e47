#pragma once

namespace sentinel {

/// Axis-aligned box in continuous pixel coordinates.
struct BBox {
    double x_min = 0.0;
    double y_min = 0.0;
    double x_max = 0.0;
    double y_max = 0.0;

    double width() const noexcept { return x_max - x_min; }
    double height() const noexcept { return y_max - y_min; }
    double area() const noexcept { return width() * height(); }
    double center_x() const noexcept { return 0.5 * (x_min + x_max); }
    double center_y() const noexcept { return 0.5 * (y_min + y_max); }

    /// Finite coordinates with min <= max on both axes. Degenerate boxes are valid.
    bool valid() const noexcept;

    /// Closed containment test.
    bool contains(double x, double y) const noexcept {
        return x >= x_min && x <= x_max && y >= y_min && y <= y_max;
    }

    friend bool operator==(const BBox&, const BBox&) = default;
};

/// Intersection over union in [0, 1]; 0 when the union has zero area.
double iou(const BBox& a, const BBox& b) noexcept;

}  // namespace sentinel
