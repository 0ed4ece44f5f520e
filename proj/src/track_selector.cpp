#include "shuttle/track_selector.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "shuttle/errors.hpp"

namespace shuttle {

void SelectorConfig::validate() const {
    if (std::abs(temporal_weight + area_weight - 1.0) > 1e-9)
        throw ConfigError("selector weights must sum to 1");
    if (temporal_weight < 0 || area_weight < 0)
        throw ConfigError("selector weights must be non-negative");
    if (!(distance_scale > 0))
        throw ConfigError("selector.distance_scale must be positive");
    if (!(reference_area > 0))
        throw ConfigError("selector.reference_area must be positive");
    if (min_score < 0 || min_score > 1)
        throw ConfigError("selector.min_score must be in [0, 1]");
    if (reset_gap < 1)
        throw ConfigError("selector.reset_gap must be at least 1");
}

std::optional<PointD> TrackState::predict(std::int64_t frame_index) const {
    if (!last_position)
        return std::nullopt;
    if (!velocity)
        return last_position;
    const double dt = double(frame_index - *last_frame_index);
    return PointD{last_position->x + velocity->x * dt, last_position->y + velocity->y * dt};
}

std::vector<CandidateScore> score_candidates(const std::vector<Blob>& blobs, const TrackState& track,
                                             const SelectorConfig& cfg) {
    std::vector<CandidateScore> scored;
    if (blobs.empty())
        return scored;

    const std::int64_t frame = blobs.front().frame_index;
    if (track.last_frame_index && frame <= *track.last_frame_index)
        throw Error("candidate frame " + std::to_string(frame) + " is not after the track's last frame");
    const auto predicted = track.predict(frame);

    scored.reserve(blobs.size());
    for (const auto& blob : blobs) {
        CandidateScore s;
        s.blob = blob;
        if (predicted) {
            s.distance_to_prediction = distance(blob.centroid, *predicted);
            s.temporal_score = std::exp(-s.distance_to_prediction / cfg.distance_scale);
        } else {
            s.temporal_score = 0.5;
        }
        const double area = double(blob.area);
        s.area_score = std::min(area, cfg.reference_area) / std::max(area, cfg.reference_area);
        s.total = cfg.temporal_weight * s.temporal_score + cfg.area_weight * s.area_score;
        scored.push_back(s);
    }
    std::sort(scored.begin(), scored.end(), [](const CandidateScore& a, const CandidateScore& b) {
        if (a.total != b.total)
            return a.total > b.total;
        if (a.distance_to_prediction != b.distance_to_prediction)
            return a.distance_to_prediction < b.distance_to_prediction;
        return a.blob.id < b.blob.id;
    });
    return scored;
}

std::optional<Detection> select(const std::vector<CandidateScore>& scored, const SelectorConfig& cfg) {
    if (scored.empty() || scored.front().total < cfg.min_score)
        return std::nullopt;
    const auto& best = scored.front();
    return Detection{best.blob.frame_index, best.blob.bbox,       best.blob.centroid,
                     best.temporal_score,   best.area_score,      best.total};
}

TrackState advance_track(const TrackState& track, const std::optional<Detection>& detection,
                         std::int64_t frame_index, const SelectorConfig& cfg) {
    if (track.last_frame_index && frame_index <= *track.last_frame_index)
        throw Error("frame " + std::to_string(frame_index) + " does not follow track frame " +
                    std::to_string(*track.last_frame_index));

    TrackState next = track;
    if (detection) {
        const PointD pos = detection->centroid;
        if (track.last_position) {
            const double dt = double(frame_index - *track.last_frame_index);
            next.velocity = PointD{(pos.x - track.last_position->x) / dt, (pos.y - track.last_position->y) / dt};
        }
        next.last_position = pos;
        next.last_frame_index = frame_index;
        next.frames_since_detection = 0;
        return next;
    }
    if (++next.frames_since_detection >= cfg.reset_gap)
        return TrackState{};
    return next;
}

}  // namespace shuttle
