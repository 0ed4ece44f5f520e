#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "shuttle/binary_mask.hpp"
#include "shuttle/frame.hpp"
#include "shuttle/geometry.hpp"

namespace shuttle {

/// One 8-connected foreground component.
struct Blob {
    int id = 0;               // 1-based, raster order of the component's first pixel
    std::int64_t area = 0;
    PixelBox bbox;            // inclusive
    PointD centroid;          // mean of member pixel indices
    std::int64_t frame_index = 0;
};

/// Component labels per pixel (0 = background) alongside the blob list.
struct ComponentMap {
    int width = 0;
    int height = 0;
    std::vector<std::int32_t> labels;
    std::vector<Blob> blobs;

    std::int32_t label_at(int x, int y) const { return labels[std::size_t(y) * width + x]; }
};

ComponentMap label_components(const ForegroundMask& mask, std::int64_t frame_index = 0);
std::vector<Blob> connected_components(const ForegroundMask& mask, std::int64_t frame_index = 0);

enum class MissingMaskPolicy { skip_removal, defer_frame };

struct SpatialFilterConfig {
    /// Absolute exclusion row; when unset, y_threshold_fraction * height is used.
    std::optional<double> y_threshold;
    double y_threshold_fraction = 0.83;
    int person_mask_dilation = 5;
    MissingMaskPolicy missing_person_mask = MissingMaskPolicy::defer_frame;

    double threshold_row(int height) const;
    void validate(int height = 0) const;
};

/// Drops every blob that has a member pixel inside the person mask dilated by
/// cfg.person_mask_dilation (square element of side 2*d+1).
std::vector<Blob> remove_person_overlap(const std::vector<Blob>& blobs, const ComponentMap& components,
                                        const PersonMask& person, const SpatialFilterConfig& cfg);
std::vector<Blob> remove_person_overlap(const std::vector<Blob>& blobs, const ForegroundMask& mask,
                                        const PersonMask& person, const SpatialFilterConfig& cfg);

/// Drops blobs whose centroid row is strictly below (greater than) the threshold row.
std::vector<Blob> apply_vertical_filter(const std::vector<Blob>& blobs, const SpatialFilterConfig& cfg, int height);

/// Source of opponent masks, keyed by frame.
class PersonMaskProvider {
public:
    virtual ~PersonMaskProvider() = default;
    virtual std::optional<PersonMask> mask_for(const FrameMeta& frame) = 0;
};

/// Reads `<directory>/<frame file name>` (nonzero = person). Missing file -> nullopt.
class FilePersonMaskProvider final : public PersonMaskProvider {
public:
    explicit FilePersonMaskProvider(std::filesystem::path directory) : directory_(std::move(directory)) {}
    std::optional<PersonMask> mask_for(const FrameMeta& frame) override;

private:
    std::filesystem::path directory_;
};

class MemoryPersonMaskProvider final : public PersonMaskProvider {
public:
    explicit MemoryPersonMaskProvider(const std::vector<PersonMask>& masks) : masks_(&masks) {}
    std::optional<PersonMask> mask_for(const FrameMeta& frame) override {
        if (frame.frame_index < 0 || std::size_t(frame.frame_index) >= masks_->size())
            return std::nullopt;
        return (*masks_)[frame.frame_index];
    }

private:
    const std::vector<PersonMask>* masks_;
};

}  // namespace shuttle
