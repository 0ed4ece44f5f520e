#include "shuttle/morphology.hpp"

#include <algorithm>
#include <cstring>
#include <type_traits>
#include <vector>

#include "shuttle/errors.hpp"
#include "shuttle/parallel.hpp"

namespace shuttle {

namespace {

enum class Op { erode, dilate };

using Row = std::uint8_t* __restrict;
using ConstRow = const std::uint8_t* __restrict;

// Rectangle morphology is separable: a horizontal pass then a vertical pass.
// With out-of-image pixels fixed at 0 the decomposition stays exact.
template <Op op>
void horizontal_row(ConstRow src, Row dst, int w, int radius) {
    if constexpr (op == Op::erode) {
        if (2 * radius + 1 > w) {
            std::memset(dst, 0, w);
            return;
        }
        std::memset(dst, 0, radius);
        std::memset(dst + w - radius, 0, radius);
        std::memcpy(dst + radius, src, w - 2 * radius);
        for (int k = -radius + 1; k <= radius; ++k)
            for (int x = radius; x < w - radius; ++x)
                dst[x] &= src[x + k];
    } else {
        std::memcpy(dst, src, w);
        for (int k = 1; k <= radius && k < w; ++k) {
            for (int x = 0; x < w - k; ++x)
                dst[x] |= src[x + k];
            for (int x = k; x < w; ++x)
                dst[x] |= src[x - k];
        }
    }
}

template <Op op>
void vertical_row(const BinaryMask& in, Row dst, int y, int radius) {
    const int w = in.width();
    const int h = in.height();
    if constexpr (op == Op::erode) {
        if (y - radius < 0 || y + radius >= h) {
            std::memset(dst, 0, w);
            return;
        }
    }
    const int lo = std::max(0, y - radius);
    const int hi = std::min(h - 1, y + radius);
    std::memcpy(dst, in.row(lo), w);
    for (int k = lo + 1; k <= hi; ++k) {
        ConstRow src = in.row(k);
        if constexpr (op == Op::erode) {
            for (int x = 0; x < w; ++x)
                dst[x] &= src[x];
        } else {
            for (int x = 0; x < w; ++x)
                dst[x] |= src[x];
        }
    }
}

// in -> out through tmp; all three must have the same shape and out != in.
template <Op op>
void apply_into(const BinaryMask& in, BinaryMask& tmp, BinaryMask& out, int element_width, int element_height,
                int workers) {
    const int rx = element_width / 2;
    const int ry = element_height / 2;
    const int w = in.width();
    parallel_rows(in.height(), workers, [&](int begin, int end) {
        for (int y = begin; y < end; ++y)
            horizontal_row<op>(in.row(y), tmp.row(y), w, rx);
    });
    parallel_rows(in.height(), workers, [&](int begin, int end) {
        for (int y = begin; y < end; ++y)
            vertical_row<op>(tmp, out.row(y), y, ry);
    });
}

void check_element(int element_width, int element_height) {
    if (element_width < 1 || element_height < 1 || element_width % 2 == 0 || element_height % 2 == 0)
        throw ConfigError("structuring element sides must be odd positive integers");
}

template <Op op>
BinaryMask apply(const BinaryMask& in, int element_width, int element_height, int workers) {
    check_element(element_width, element_height);
    BinaryMask tmp(in.width(), in.height());
    BinaryMask out(in.width(), in.height());
    apply_into<op>(in, tmp, out, element_width, element_height, workers);
    return out;
}

}  // namespace

void MorphConfig::validate() const {
    if (element_width < 1 || element_height < 1 || element_width % 2 == 0 || element_height % 2 == 0)
        throw ConfigError("morph structuring element sides must be odd positive integers");
    if (open_iterations < 0 || close_iterations < 0)
        throw ConfigError("morph iteration counts must be non-negative");
}

BinaryMask erode(const BinaryMask& in, int element_width, int element_height, int workers) {
    return apply<Op::erode>(in, element_width, element_height, workers);
}

BinaryMask dilate(const BinaryMask& in, int element_width, int element_height, int workers) {
    return apply<Op::dilate>(in, element_width, element_height, workers);
}

BinaryMask refine(const BinaryMask& mask, const MorphConfig& cfg, int workers) {
    cfg.validate();
    const int ew = cfg.element_width;
    const int eh = cfg.element_height;
    BinaryMask cur = mask;
    BinaryMask next(mask.width(), mask.height());
    BinaryMask tmp(mask.width(), mask.height());
    const auto step = [&](auto op) {
        apply_into<decltype(op)::value>(cur, tmp, next, ew, eh, workers);
        std::swap(cur, next);
    };
    using E = std::integral_constant<Op, Op::erode>;
    using D = std::integral_constant<Op, Op::dilate>;
    for (int i = 0; i < cfg.open_iterations; ++i) {
        step(E{});
        step(D{});
    }
    for (int i = 0; i < cfg.close_iterations; ++i) {
        step(D{});
        step(E{});
    }
    return cur;
}

}  // namespace shuttle
