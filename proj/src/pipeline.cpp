#include "shuttle/pipeline.hpp"

#include <chrono>
#include <fstream>

#include "shuttle/errors.hpp"
#include "shuttle/parallel.hpp"
#include "shuttle/synthetic.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace shuttle {

json to_json(const RunSummary& s) {
    const double labeled = double(std::max<std::int64_t>(1, s.labeled_frames()));
    json j;
    j["sequence_id"] = s.sequence_id;
    j["frames_total"] = s.frames_total;
    j["burn_in"] = s.burn_in;
    j["labeled_auto"] = s.labeled_auto;
    j["queued"] = {{"low_score", s.queued_low_score},
                   {"no_candidate", s.queued_no_candidate},
                   {"person_conflict", s.queued_person_conflict}};
    j["fractions"] = {{"auto", s.labeled_frames() > 0 ? s.labeled_auto / labeled : 0.0},
                      {"needs_review", s.labeled_frames() > 0 ? s.queued() / labeled : 0.0}};
    j["missing_person_masks"] = s.missing_person_masks;
    j["gaps"] = s.gaps;
    j["decode_errors"] = s.decode_errors;
    j["aborted"] = s.aborted;
    if (s.aborted)
        j["error"] = s.error;
    return j;
}

RunSummary run_pipeline(const PipelineConfig& config, FrameSource& frames, PersonMaskProvider* person_masks,
                        LabelStore& store) {
    config.validate();
    const int workers = resolve_workers(config.workers);

    RunSummary summary;
    summary.sequence_id = frames.info().sequence_id;
    if (auto* reader = dynamic_cast<SequenceReader*>(&frames))
        summary.gaps = std::int64_t(reader->gaps().size());
    store.remove_sequence(summary.sequence_id);

    const fs::path mask_dir = store.directory() / "debug" / "masks" / summary.sequence_id;
    if (config.dump_masks)
        fs::create_directories(mask_dir);

    BackgroundModel<float> model;
    TrackState track;
    ForegroundMask raw;
    std::int64_t processed = 0;

    try {
        while (true) {
            std::optional<Frame> frame;
            try {
                frame = frames.next();
            } catch (const FrameDecodeError& e) {
                summary.decode_errors.push_back(e.path().string());
                continue;
            }
            if (!frame)
                break;
            const FrameMeta& meta = frame->meta();
            if (!model.initialized())
                model = BackgroundModel<float>(frame->width(), frame->height(), config.gmm);
            model.update(*frame, raw, workers);
            const ForegroundMask refined = refine(raw, config.morph, workers);
            if (config.dump_masks)
                write_mask(mask_dir / frame_filename(meta.frame_index), refined);

            const SequenceInfo& info = frames.info();
            LabelRecord rec;
            rec.frame_id = make_frame_id(info.sequence_id, meta.frame_index);
            if (const fs::path p = frames.last_path(); !p.empty())
                rec.image_path = fs::absolute(p).lexically_normal().string();
            rec.sequence_id = info.sequence_id;
            rec.frame_index = meta.frame_index;
            rec.width = frame->width();
            rec.height = frame->height();
            rec.location = info.location;
            rec.background_id = info.background_id;
            rec.updated_at = store.now();
            rec.editor = "system";
            ++summary.frames_total;

            if (processed++ < config.burn_in_frames) {
                rec.status = LabelStatus::burn_in_excluded;
                store.put(std::move(rec));
                ++summary.burn_in;
                continue;
            }

            const ComponentMap components = label_components(refined, meta.frame_index);
            std::vector<Blob> blobs = components.blobs;

            bool deferred = false;
            bool flagged = false;
            std::optional<PersonMask> person = person_masks ? person_masks->mask_for(meta) : std::nullopt;
            if (person) {
                blobs = remove_person_overlap(blobs, components, *person, config.spatial);
            } else {
                ++summary.missing_person_masks;
                if (config.spatial.missing_person_mask == MissingMaskPolicy::defer_frame)
                    deferred = true;
                else
                    flagged = true;
            }
            const bool person_removed_all = !components.blobs.empty() && blobs.empty();
            blobs = apply_vertical_filter(blobs, config.spatial, frame->height());

            std::optional<Detection> detection;
            if (!deferred)
                detection = select(score_candidates(blobs, track, config.selector), config.selector);
            track = advance_track(track, detection, meta.frame_index, config.selector);

            if (detection) {
                rec.status = LabelStatus::auto_label;
                rec.bbox = detection->box();
                rec.pipeline_score = detection->total;
                ++summary.labeled_auto;
                if (flagged)
                    store.enqueue({rec.frame_id, QueueReason::person_conflict, QueueState::pending});
            } else {
                rec.status = LabelStatus::no_object;
                QueueReason reason = QueueReason::no_candidate;
                if (deferred || person_removed_all) {
                    reason = QueueReason::person_conflict;
                    ++summary.queued_person_conflict;
                } else if (!blobs.empty()) {
                    reason = QueueReason::low_score;
                    ++summary.queued_low_score;
                } else {
                    ++summary.queued_no_candidate;
                }
                store.enqueue({rec.frame_id, reason, QueueState::pending});
            }
            store.put(std::move(rec));
        }
    } catch (const Error& e) {
        summary.aborted = true;
        summary.error = e.what();
    }

    store.flush();
    fs::create_directories(store.directory() / "runs");
    write_file_atomic(store.directory() / "runs" / (summary.sequence_id + ".json"), to_json(summary).dump(2) + "\n");
    return summary;
}

ThroughputResult benchmark_background(int width, int height, int frames, int workers, const PipelineConfig& config) {
    SyntheticScenario s;
    s.sequence_id = "bench";
    s.width = width;
    s.height = height;
    s.background.kind = BackgroundTexture::Kind::checkerboard;
    s.background.cell = std::max(8, width / 40);
    s.noise_sigma = 2.0;
    s.object_radius = std::max(3.0, width / 160.0);
    constexpr int kDistinct = 8;
    s.frame_count = kDistinct;
    s.object_trajectory =
        parabola_trajectory({width * 0.1, height * 0.6}, {width * 0.9, height * 0.5}, height * 0.4, kDistinct);
    s.person_regions = sliding_rectangle({width * 0.2, height * 0.55}, {width * 0.3, height * 0.55}, width / 10,
                                         height / 3, kDistinct);
    const SyntheticSequence seq = synthesize_sequence(s, 7);

    const int n_workers = resolve_workers(workers);
    BackgroundModel<float> model(width, height, config.gmm);
    ForegroundMask raw(width, height);
    for (int i = 0; i < kDistinct; ++i)
        model.update(seq.frames[i], raw, n_workers);

    const auto start = std::chrono::steady_clock::now();
    std::size_t sink = 0;
    for (int i = 0; i < frames; ++i) {
        model.update(seq.frames[i % kDistinct], raw, n_workers);
        sink += refine(raw, config.morph, n_workers).count() > 0;
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    (void)sink;
    return {width, height, n_workers, frames, seconds, seconds > 0 ? frames / seconds : 0.0};
}

}  // namespace shuttle
