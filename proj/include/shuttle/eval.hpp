#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "shuttle/geometry.hpp"
#include "shuttle/label_store.hpp"

namespace shuttle {

struct Prediction {
    std::string frame_id;
    BoxPx box;
    double confidence = 0.0;
};

struct MatchConfig {
    double tau = 25.0;              // pixels, inclusive
    double confidence_floor = 0.0;
    /// Count a prediction farther than tau from the ground truth as a false
    /// positive only, instead of a false positive plus a miss.
    bool single_count = false;

    void validate() const;
};

struct EvalCounts {
    std::int64_t tp = 0;
    std::int64_t fp = 0;
    std::int64_t fn = 0;
    std::vector<double> tp_center_offsets;

    EvalCounts& operator+=(const EvalCounts& o);
    friend bool operator==(const EvalCounts&, const EvalCounts&) = default;
};

struct Metrics {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

double f1_score(double precision, double recall);
Metrics derive_metrics(const EvalCounts& c);
double mean_offset(const EvalCounts& c);

struct StratumReport {
    EvalCounts counts;
    Metrics metrics;
};

struct EvalReport {
    EvalCounts counts;
    Metrics metrics;
    double mean_tp_offset = 0.0;
    std::map<std::string, StratumReport> strata;
    std::vector<std::string> warnings;
};

/// Ground truth of one evaluated frame; box absent when no shuttlecock is visible.
struct GroundTruth {
    std::string frame_id;
    std::optional<BoxPx> box;
    std::optional<Difficulty> difficulty;
    std::string background_id;
    std::string location;
};

/// Evaluable ground truth from store records: labeled and no_object frames;
/// burn-in frames are skipped.
std::vector<GroundTruth> ground_truth_from_records(const std::vector<LabelRecord>& records);

/// Highest confidence at or above the floor; the earliest wins ties.
std::optional<Prediction> select_top1(std::span<const Prediction> preds, const MatchConfig& cfg);

/// Center-distance matching of one frame.
EvalCounts match_frame(const std::optional<Prediction>& pred, const std::optional<BoxPx>& gt, const MatchConfig& cfg);

/// Pools counts, then derives metrics once from the pooled totals.
EvalReport accumulate(std::span<const EvalCounts> deltas);

struct FrameMatch {
    GroundTruth gt;
    std::optional<Prediction> pred;
    EvalCounts delta;
};

/// Matches every ground-truth frame against its top-1 prediction.
std::vector<FrameMatch> match_frames(const std::vector<GroundTruth>& gt,
                                     const std::map<std::string, Prediction>& top1, const MatchConfig& cfg);

/// Overall counts plus independent easy/medium/hard strata.
EvalReport stratified_report(const std::vector<FrameMatch>& matches);

struct SizeBinConfig {
    double bin_width = 2.0;
    std::int64_t min_count = 50;
};

struct SizeBin {
    std::int64_t key = 0;        // floor(side / bin_width)
    double lower = 0.0;          // side length range [lower, upper)
    double upper = 0.0;
    std::int64_t tp = 0;
    std::int64_t fn = 0;
    std::int64_t fp_with_gt = 0;
    std::int64_t samples = 0;    // ground-truth boxes in the bin
    std::int64_t correct = 0;    // samples detected within tau
    std::int64_t incorrect = 0;  // samples missed or mislocated
    std::optional<double> precision;
    std::optional<double> recall;
};

struct SizeBinReport {
    SizeBinConfig config;
    std::vector<SizeBin> bins;   // ascending key
    std::int64_t fp_without_gt = 0;
};

/// Bins ground-truth frames by the side length sqrt(w*h) of their box.
SizeBinReport size_binned_report(const std::vector<FrameMatch>& matches, const SizeBinConfig& cfg = {});

/// One held-out subset's result. Counts are required for pooling.
struct FoldReport {
    std::string name;
    std::optional<EvalCounts> counts;
    std::optional<Metrics> metrics;  // informational, ignored for pooling
};

FoldReport fold_report_from_json(const nlohmann::json& j);

struct CrossValReport {
    EvalCounts pooled_counts;
    Metrics pooled;          // subset-size weighted
    Metrics unweighted_mean; // plain mean over folds
    std::vector<std::pair<std::string, Metrics>> per_fold;
    std::vector<std::pair<std::string, EvalCounts>> per_fold_counts;
};

/// Throws ValidationError when a fold lacks raw counts.
CrossValReport crossval_aggregate(const std::vector<FoldReport>& folds);

/// Streams JSON-lines predictions {frame, x_c, y_c, w, h, confidence},
/// keeping only the top-1 prediction of each frame.
std::map<std::string, Prediction> read_top1_predictions(std::istream& in, const MatchConfig& cfg,
                                                        std::vector<std::string>* warnings = nullptr);

nlohmann::json to_json(const EvalCounts& c);
nlohmann::json to_json(const Metrics& m);
nlohmann::json to_json(const EvalReport& r);
nlohmann::json to_json(const SizeBinReport& r);
nlohmann::json to_json(const CrossValReport& r);

/// Rows F1/Precision/Recall, columns Overall/Easy/Medium/Hard.
std::string format_table(const EvalReport& report);
std::string format_crossval_table(const CrossValReport& report);
std::string size_bins_csv(const SizeBinReport& report);

}  // namespace shuttle
