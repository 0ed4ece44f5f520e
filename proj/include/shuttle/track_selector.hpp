#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "shuttle/candidates.hpp"
#include "shuttle/geometry.hpp"

namespace shuttle {

struct SelectorConfig {
    double temporal_weight = 0.7;
    double area_weight = 0.3;
    double distance_scale = 50.0;    // pixels
    double reference_area = 250.0;   // pixels^2
    double min_score = 0.2;
    int reset_gap = 10;              // frames without detection before the track is dropped

    void validate() const;
};

struct TrackState {
    std::optional<PointD> last_position;
    std::optional<std::int64_t> last_frame_index;
    std::optional<PointD> velocity;  // pixels per frame
    int frames_since_detection = 0;

    bool has_history() const { return last_position.has_value(); }
    /// Constant-velocity extrapolation to frame_index; nullopt without history.
    std::optional<PointD> predict(std::int64_t frame_index) const;

    friend bool operator==(const TrackState&, const TrackState&) = default;
};

struct CandidateScore {
    Blob blob;
    double temporal_score = 0.0;
    double area_score = 0.0;
    double total = 0.0;
    double distance_to_prediction = 0.0;  // 0 when the track has no history
};

/// The accepted candidate of one frame, with its score breakdown for audit.
struct Detection {
    std::int64_t frame_index = 0;
    PixelBox bbox;
    PointD centroid;
    double temporal_score = 0.0;
    double area_score = 0.0;
    double total = 0.0;

    BoxPx box() const { return bbox.to_box(); }
};

/// Scores and ranks blobs of one frame: total descending, then distance to the
/// predicted position, then blob id.
std::vector<CandidateScore> score_candidates(const std::vector<Blob>& blobs, const TrackState& track,
                                             const SelectorConfig& cfg);

/// Top candidate when its total reaches cfg.min_score.
std::optional<Detection> select(const std::vector<CandidateScore>& scored, const SelectorConfig& cfg);

TrackState advance_track(const TrackState& track, const std::optional<Detection>& detection,
                         std::int64_t frame_index, const SelectorConfig& cfg);

}  // namespace shuttle
