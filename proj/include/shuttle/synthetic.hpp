#pragma once

#include <cstdint>
#include <vector>

#include "shuttle/binary_mask.hpp"
#include "shuttle/frame.hpp"
#include "shuttle/frame_io.hpp"
#include "shuttle/geometry.hpp"

namespace shuttle {

struct BackgroundTexture {
    enum class Kind { flat, checkerboard, noise };

    Kind kind = Kind::flat;
    Rgb color_a{90, 110, 90};
    Rgb color_b{150, 150, 140};
    int cell = 32;              // checkerboard cell side, pixels
    int noise_amplitude = 40;   // static per-pixel texture, +/- intensity around color_a
};

/// A stationary-camera scene: static background, one moving opponent
/// rectangle and one small moving disc (the shuttlecock).
struct SyntheticScenario {
    std::string sequence_id = "synthetic";
    int width = 640;
    int height = 400;
    double fps = 60.0;
    BackgroundTexture background;
    std::vector<PointD> object_trajectory;  // one center per frame
    double object_radius = 6.0;
    Rgb object_color{245, 245, 245};
    std::vector<PixelBox> person_regions;   // one per frame; empty box = no person
    Rgb person_color{40, 40, 150};
    double noise_sigma = 0.0;
    int frame_count = 0;

    /// Throws Error when a trajectory point or person box leaves the frame,
    /// or when the per-frame vectors do not match frame_count.
    void validate() const;
};

struct SyntheticSequence {
    SequenceInfo info;
    std::vector<Frame> frames;
    std::vector<BoxPx> ground_truth;      // tight box of the rendered disc
    std::vector<PersonMask> person_masks;
};

/// Renders the scenario. Pure function of (scenario, seed).
SyntheticSequence synthesize_sequence(const SyntheticScenario& scenario, std::uint64_t seed);

/// Renders only the static, noiseless background.
Frame render_background(const SyntheticScenario& scenario);

/// Pixels covered by a disc of the given radius at the given center.
PixelBox disc_extent(PointD center, double radius, int width, int height);

/// x(t) linear from start to end, y(t) a parabola with the given apex height above the chord.
std::vector<PointD> parabola_trajectory(PointD start, PointD end, double apex_rise, int frames);

/// A w x h rectangle whose top-left corner moves linearly between two points.
std::vector<PixelBox> sliding_rectangle(PointD from, PointD to, int w, int h, int frames);

/// The scene used by the end-to-end checks: checkerboard court, a parabolic
/// 12 px shuttlecock and a walking opponent, noise sigma 2, 640x400.
SyntheticScenario reference_scenario(int frame_count = 300);

/// Keeps a synthetic sequence in memory as a FrameSource.
class MemoryFrameSource final : public FrameSource {
public:
    MemoryFrameSource(SequenceInfo info, const std::vector<Frame>& frames) : info_(std::move(info)), frames_(&frames) {}
    const SequenceInfo& info() const override { return info_; }
    std::optional<Frame> next() override {
        if (cursor_ >= frames_->size())
            return std::nullopt;
        return (*frames_)[cursor_++];
    }

private:
    SequenceInfo info_;
    const std::vector<Frame>* frames_;
    std::size_t cursor_ = 0;
};

/// Writes frames, person masks (person_masks/) and sequence.json into a directory.
void write_synthetic_sequence(const std::filesystem::path& directory, const SyntheticSequence& seq);

}  // namespace shuttle
