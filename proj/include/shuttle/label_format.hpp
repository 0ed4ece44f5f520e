#pragma once

#include <cstddef>
#include <string>
#include <string_view>

#include "shuttle/geometry.hpp"

namespace shuttle {

/// `0 x_c/W y_c/H w/W h/H\n` with six decimals; class 0 is the shuttlecock.
/// Throws ValidationError when the box leaves the frame.
std::string to_normalized_record(const BoxPx& box, int frame_width, int frame_height);

/// Inverse of to_normalized_record up to quantization. Throws ParseError
/// (carrying line_number) on a wrong field count, non-numeric field, class
/// other than 0 or a value outside [0, 1].
BoxPx parse_label_line(std::string_view line, int frame_width, int frame_height, std::size_t line_number = 0);

}  // namespace shuttle
