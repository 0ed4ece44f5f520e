#pragma once

#include "shuttle/binary_mask.hpp"

namespace shuttle {

struct MorphConfig {
    int element_width = 3;   // rectangle, odd
    int element_height = 3;  // rectangle, odd
    int open_iterations = 1;
    int close_iterations = 1;

    void validate() const;
};

// Rectangular binary morphology. Pixels outside the image count as
// background for both operations, so erosion eats into the border.
BinaryMask erode(const BinaryMask& in, int element_width, int element_height, int workers = 1);
BinaryMask dilate(const BinaryMask& in, int element_width, int element_height, int workers = 1);

/// Opening (erode, dilate) open_iterations times, then closing (dilate, erode)
/// close_iterations times.
BinaryMask refine(const BinaryMask& mask, const MorphConfig& cfg, int workers = 1);

}  // namespace shuttle
