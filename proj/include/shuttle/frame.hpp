#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "shuttle/errors.hpp"

namespace shuttle {

struct Rgb {
    std::uint8_t r = 0;
    std::uint8_t g = 0;
    std::uint8_t b = 0;

    friend bool operator==(const Rgb&, const Rgb&) = default;
};

struct FrameMeta {
    std::string sequence_id;
    std::int64_t frame_index = 0;
    int width = 1920;
    int height = 1200;
    double fps = 60.0;

    double timestamp() const { return static_cast<double>(frame_index) / fps; }
};

/// Interleaved 8-bit RGB image plus its position in a sequence.
class Frame {
public:
    Frame() = default;
    Frame(FrameMeta meta, std::vector<std::uint8_t> pixels) : meta_(std::move(meta)), pixels_(std::move(pixels)) {
        if (meta_.width <= 0 || meta_.height <= 0)
            throw Error("frame dimensions must be positive");
        if (pixels_.size() != std::size_t(meta_.width) * meta_.height * 3)
            throw Error("pixel buffer length does not match width*height*3");
    }

    const FrameMeta& meta() const noexcept { return meta_; }
    FrameMeta& meta() noexcept { return meta_; }
    int width() const noexcept { return meta_.width; }
    int height() const noexcept { return meta_.height; }

    std::span<const std::uint8_t> pixels() const noexcept { return pixels_; }
    std::span<std::uint8_t> pixels() noexcept { return pixels_; }

    const std::uint8_t* row(int y) const { return pixels_.data() + std::size_t(y) * meta_.width * 3; }
    std::uint8_t* row(int y) { return pixels_.data() + std::size_t(y) * meta_.width * 3; }

    Rgb at(int x, int y) const {
        const auto* p = row(y) + 3 * x;
        return {p[0], p[1], p[2]};
    }

private:
    FrameMeta meta_;
    std::vector<std::uint8_t> pixels_;
};

}  // namespace shuttle
