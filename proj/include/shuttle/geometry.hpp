#pragma once

#include <algorithm>
#include <cmath>

namespace shuttle {

struct PointD {
    double x = 0.0;
    double y = 0.0;

    friend bool operator==(const PointD&, const PointD&) = default;
};

inline double distance(PointD a, PointD b) { return std::hypot(a.x - b.x, a.y - b.y); }

/// Box in continuous pixel coordinates: pixel (i, j) covers [i, i+1) x [j, j+1).
struct BoxPx {
    double x_c = 0.0;
    double y_c = 0.0;
    double w = 0.0;
    double h = 0.0;

    PointD center() const { return {x_c, y_c}; }
    double side_length() const { return std::sqrt(w * h); }
    bool inside(int width, int height) const {
        return w > 0 && h > 0 && x_c - w / 2 >= 0 && y_c - h / 2 >= 0 && x_c + w / 2 <= width &&
               y_c + h / 2 <= height;
    }

    friend bool operator==(const BoxPx&, const BoxPx&) = default;
};

/// Inclusive integer pixel rectangle.
struct PixelBox {
    int x_min = 0;
    int y_min = 0;
    int x_max = -1;
    int y_max = -1;

    int width() const { return x_max - x_min + 1; }
    int height() const { return y_max - y_min + 1; }
    bool empty() const { return x_max < x_min || y_max < y_min; }
    bool contains(int x, int y) const { return x >= x_min && x <= x_max && y >= y_min && y <= y_max; }
    bool contains(PointD p) const { return p.x >= x_min && p.x <= x_max && p.y >= y_min && p.y <= y_max; }

    BoxPx to_box() const {
        return {(x_min + x_max + 1) / 2.0, (y_min + y_max + 1) / 2.0, double(width()), double(height())};
    }

    void extend(int x, int y) {
        if (empty()) {
            *this = {x, y, x, y};
            return;
        }
        x_min = std::min(x_min, x);
        y_min = std::min(y_min, y);
        x_max = std::max(x_max, x);
        y_max = std::max(y_max, y);
    }

    friend bool operator==(const PixelBox&, const PixelBox&) = default;
};

}  // namespace shuttle
