#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "shuttle/errors.hpp"

namespace shuttle {

/// One byte per pixel, 0 or 1, row-major.
class BinaryMask {
public:
    BinaryMask() = default;
    BinaryMask(int width, int height) : width_(width), height_(height), bits_(std::size_t(width) * height, 0) {
        if (width <= 0 || height <= 0)
            throw Error("mask dimensions must be positive");
    }

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    std::size_t size() const noexcept { return bits_.size(); }

    bool at(int x, int y) const { return bits_[std::size_t(y) * width_ + x] != 0; }
    void set(int x, int y, bool v = true) { bits_[std::size_t(y) * width_ + x] = v ? 1 : 0; }

    std::uint8_t* row(int y) { return bits_.data() + std::size_t(y) * width_; }
    const std::uint8_t* row(int y) const { return bits_.data() + std::size_t(y) * width_; }
    std::uint8_t* data() { return bits_.data(); }
    const std::uint8_t* data() const { return bits_.data(); }

    std::size_t count() const {
        return std::size_t(std::count(bits_.begin(), bits_.end(), std::uint8_t{1}));
    }
    double fraction() const { return bits_.empty() ? 0.0 : double(count()) / double(bits_.size()); }

    void fill_rect(int x0, int y0, int x1, int y1, bool v = true) {
        for (int y = std::max(0, y0); y <= std::min(height_ - 1, y1); ++y)
            for (int x = std::max(0, x0); x <= std::min(width_ - 1, x1); ++x)
                set(x, y, v);
    }

    bool same_shape(const BinaryMask& o) const { return width_ == o.width_ && height_ == o.height_; }

    friend bool operator==(const BinaryMask&, const BinaryMask&) = default;

private:
    int width_ = 0;
    int height_ = 0;
    std::vector<std::uint8_t> bits_;
};

using ForegroundMask = BinaryMask;

/// Opponent segmentation for one frame, produced outside this library.
struct PersonMask {
    BinaryMask bits;
    std::string source;
};

}  // namespace shuttle
