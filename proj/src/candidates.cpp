#include "shuttle/candidates.hpp"

#include <algorithm>
#include <unordered_set>

#include "shuttle/errors.hpp"
#include "shuttle/frame_io.hpp"
#include "shuttle/morphology.hpp"

namespace fs = std::filesystem;

namespace shuttle {

ComponentMap label_components(const ForegroundMask& mask, std::int64_t frame_index) {
    ComponentMap map;
    map.width = mask.width();
    map.height = mask.height();
    map.labels.assign(mask.size(), 0);
    const int w = mask.width();
    const int h = mask.height();

    std::vector<std::pair<int, int>> stack;
    for (int y = 0; y < h; ++y) {
        const std::uint8_t* row = mask.row(y);
        for (int x = 0; x < w; ++x) {
            if (!row[x] || map.labels[std::size_t(y) * w + x])
                continue;

            const auto id = std::int32_t(map.blobs.size() + 1);
            Blob blob;
            blob.id = id;
            blob.frame_index = frame_index;
            std::int64_t sum_x = 0, sum_y = 0;

            map.labels[std::size_t(y) * w + x] = id;
            stack.assign(1, {x, y});
            while (!stack.empty()) {
                auto [cx, cy] = stack.back();
                stack.pop_back();
                ++blob.area;
                sum_x += cx;
                sum_y += cy;
                blob.bbox.extend(cx, cy);
                for (int ny = std::max(0, cy - 1); ny <= std::min(h - 1, cy + 1); ++ny) {
                    const std::uint8_t* nrow = mask.row(ny);
                    for (int nx = std::max(0, cx - 1); nx <= std::min(w - 1, cx + 1); ++nx) {
                        auto& label = map.labels[std::size_t(ny) * w + nx];
                        if (nrow[nx] && !label) {
                            label = id;
                            stack.emplace_back(nx, ny);
                        }
                    }
                }
            }
            blob.centroid = {double(sum_x) / double(blob.area), double(sum_y) / double(blob.area)};
            map.blobs.push_back(blob);
        }
    }
    return map;
}

std::vector<Blob> connected_components(const ForegroundMask& mask, std::int64_t frame_index) {
    return label_components(mask, frame_index).blobs;
}

double SpatialFilterConfig::threshold_row(int height) const {
    return y_threshold ? *y_threshold : y_threshold_fraction * height;
}

void SpatialFilterConfig::validate(int height) const {
    if (person_mask_dilation < 0)
        throw ConfigError("spatial.person_mask_dilation must be non-negative");
    if (!y_threshold && (y_threshold_fraction < 0 || y_threshold_fraction > 1))
        throw ConfigError("spatial.y_threshold_fraction must be in [0, 1]");
    if (y_threshold && (*y_threshold < 0 || (height > 0 && *y_threshold > height)))
        throw ConfigError("spatial.y_threshold must be within [0, height]");
}

std::vector<Blob> remove_person_overlap(const std::vector<Blob>& blobs, const ComponentMap& components,
                                        const PersonMask& person, const SpatialFilterConfig& cfg) {
    if (person.bits.width() != components.width || person.bits.height() != components.height)
        throw Error("person mask size does not match the foreground mask");
    if (blobs.empty())
        return {};

    const int side = 2 * cfg.person_mask_dilation + 1;
    const BinaryMask grown = cfg.person_mask_dilation > 0 ? dilate(person.bits, side, side) : person.bits;

    std::unordered_set<std::int32_t> touched;
    for (const auto& blob : blobs) {
        for (int y = blob.bbox.y_min; y <= blob.bbox.y_max && !touched.contains(blob.id); ++y) {
            const std::uint8_t* g = grown.row(y);
            for (int x = blob.bbox.x_min; x <= blob.bbox.x_max; ++x) {
                if (g[x] && components.label_at(x, y) == blob.id) {
                    touched.insert(blob.id);
                    break;
                }
            }
        }
    }
    std::vector<Blob> kept;
    for (const auto& blob : blobs)
        if (!touched.contains(blob.id))
            kept.push_back(blob);
    return kept;
}

std::vector<Blob> remove_person_overlap(const std::vector<Blob>& blobs, const ForegroundMask& mask,
                                        const PersonMask& person, const SpatialFilterConfig& cfg) {
    return remove_person_overlap(blobs, label_components(mask), person, cfg);
}

std::vector<Blob> apply_vertical_filter(const std::vector<Blob>& blobs, const SpatialFilterConfig& cfg, int height) {
    const double limit = cfg.threshold_row(height);
    std::vector<Blob> kept;
    std::copy_if(blobs.begin(), blobs.end(), std::back_inserter(kept),
                 [limit](const Blob& b) { return !(b.centroid.y > limit); });
    return kept;
}

std::optional<PersonMask> FilePersonMaskProvider::mask_for(const FrameMeta& frame) {
    for (const char* ext : {".png", ".jpg", ".jpeg"}) {
        const fs::path file = directory_ / frame_filename(frame.frame_index, ext);
        if (fs::exists(file))
            return PersonMask{read_mask(file), "file:" + directory_.string()};
    }
    return std::nullopt;
}

}  // namespace shuttle
