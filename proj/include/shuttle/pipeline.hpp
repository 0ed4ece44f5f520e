#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "shuttle/background_model.hpp"
#include "shuttle/candidates.hpp"
#include "shuttle/eval.hpp"
#include "shuttle/frame_io.hpp"
#include "shuttle/label_store.hpp"
#include "shuttle/morphology.hpp"
#include "shuttle/track_selector.hpp"

namespace shuttle {

struct PipelineConfig {
    GmmParams gmm;
    MorphConfig morph;
    SpatialFilterConfig spatial;
    SelectorConfig selector;
    MatchConfig match;
    int burn_in_frames = 100;
    int workers = 0;  // 0 = hardware concurrency

    std::filesystem::path store;         // label store directory
    std::filesystem::path person_masks;  // empty = <sequence>/person_masks
    bool dump_masks = false;             // refined masks under <store>/debug/masks/

    void validate() const;
};

/// Reads a JSON config document; missing keys keep their defaults.
PipelineConfig load_pipeline_config(const std::filesystem::path& file);
PipelineConfig pipeline_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const PipelineConfig& cfg);

struct RunSummary {
    std::string sequence_id;
    std::int64_t frames_total = 0;
    std::int64_t burn_in = 0;
    std::int64_t labeled_auto = 0;
    std::int64_t queued_low_score = 0;
    std::int64_t queued_no_candidate = 0;
    std::int64_t queued_person_conflict = 0;
    std::int64_t missing_person_masks = 0;
    std::int64_t gaps = 0;
    std::vector<std::string> decode_errors;  // frame files skipped
    bool aborted = false;
    std::string error;

    std::int64_t labeled_frames() const { return frames_total - burn_in; }
    std::int64_t queued() const { return queued_low_score + queued_no_candidate + queued_person_conflict; }
};

nlohmann::json to_json(const RunSummary& s);

/// Runs background modeling, refinement, candidate extraction, filtering and
/// track-based selection over a sequence and populates the store: accepted
/// frames become auto labels, the rest get a no_object record plus a review
/// queue entry. Records of the sequence already in the store are replaced.
/// Undecodable frame files are skipped and listed; any other error stops the
/// run, keeping everything processed so far.
RunSummary run_pipeline(const PipelineConfig& config, FrameSource& frames, PersonMaskProvider* person_masks,
                        LabelStore& store);

/// Frames per second of background update + refinement on synthetic frames.
struct ThroughputResult {
    int width = 0;
    int height = 0;
    int workers = 0;
    int frames = 0;
    double seconds = 0.0;
    double fps = 0.0;
};

ThroughputResult benchmark_background(int width, int height, int frames, int workers, const PipelineConfig& config = {});

}  // namespace shuttle
