#include "shuttle/label_format.hpp"

#include <charconv>
#include <cstdio>
#include <vector>

#include "shuttle/errors.hpp"

namespace shuttle {

namespace {

constexpr double kBoundsSlack = 1e-9;

std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r' || line[i] == '\n'))
            ++i;
        const std::size_t start = i;
        while (i < line.size() && !(line[i] == ' ' || line[i] == '\t' || line[i] == '\r' || line[i] == '\n'))
            ++i;
        if (i > start)
            out.push_back(line.substr(start, i - start));
    }
    return out;
}

double parse_number(std::string_view field, std::size_t line_number) {
    double v = 0;
    const auto [end, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
    if (ec != std::errc{} || end != field.data() + field.size())
        throw ParseError(line_number, "non-numeric field '" + std::string(field) + "'");
    return v;
}

}  // namespace

std::string to_normalized_record(const BoxPx& box, int frame_width, int frame_height) {
    if (frame_width <= 0 || frame_height <= 0)
        throw ValidationError("frame dimensions must be positive");
    if (!(box.w > 0 && box.h > 0) || box.x_c - box.w / 2 < -kBoundsSlack || box.y_c - box.h / 2 < -kBoundsSlack ||
        box.x_c + box.w / 2 > frame_width + kBoundsSlack || box.y_c + box.h / 2 > frame_height + kBoundsSlack)
        throw ValidationError("box lies outside the frame");
    char buf[96];
    std::snprintf(buf, sizeof buf, "0 %.6f %.6f %.6f %.6f\n", box.x_c / frame_width, box.y_c / frame_height,
                  box.w / frame_width, box.h / frame_height);
    return buf;
}

BoxPx parse_label_line(std::string_view line, int frame_width, int frame_height, std::size_t line_number) {
    const auto fields = split_fields(line);
    if (fields.size() != 5)
        throw ParseError(line_number, "expected 5 fields, found " + std::to_string(fields.size()));
    if (fields[0] != "0") {
        // Accept numeric spellings of zero, reject everything else as an unknown class.
        double cls = -1;
        const auto [end, ec] = std::from_chars(fields[0].data(), fields[0].data() + fields[0].size(), cls);
        if (ec != std::errc{} || end != fields[0].data() + fields[0].size() || cls != 0.0)
            throw ParseError(line_number, "unknown class '" + std::string(fields[0]) + "'");
    }
    double v[4];
    for (int i = 0; i < 4; ++i) {
        v[i] = parse_number(fields[i + 1], line_number);
        if (!(v[i] >= 0.0 && v[i] <= 1.0))
            throw ParseError(line_number, "coordinate out of range: " + std::string(fields[i + 1]));
    }
    if (v[2] == 0.0 || v[3] == 0.0)
        throw ParseError(line_number, "box has zero size");
    return {v[0] * frame_width, v[1] * frame_height, v[2] * frame_width, v[3] * frame_height};
}

}  // namespace shuttle
