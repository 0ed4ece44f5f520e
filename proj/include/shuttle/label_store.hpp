#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "shuttle/geometry.hpp"

namespace shuttle {

enum class Difficulty { easy, medium, hard };
enum class LabelStatus { auto_label, adjusted, manual, no_object, burn_in_excluded };

std::string to_string(Difficulty d);
std::string to_string(LabelStatus s);
Difficulty parse_difficulty(const std::string& s);
LabelStatus parse_status(const std::string& s);

/// Statuses whose records carry a box and take part in exports and evaluation.
inline bool is_labeled(LabelStatus s) {
    return s == LabelStatus::auto_label || s == LabelStatus::adjusted || s == LabelStatus::manual;
}

/// `<sequence_id>:<zero-padded index>`, unique within a store.
std::string make_frame_id(const std::string& sequence_id, std::int64_t frame_index);

/// One frame's annotation plus the frame facts needed to export and review it.
struct LabelRecord {
    std::string frame_id;
    std::string image_path;  // may be empty for in-memory sequences
    std::string sequence_id;
    std::int64_t frame_index = 0;
    int width = 0;
    int height = 0;
    std::string location;
    std::string background_id;

    std::optional<BoxPx> bbox;
    std::optional<Difficulty> difficulty;
    LabelStatus status = LabelStatus::no_object;
    std::optional<double> pipeline_score;
    std::int64_t updated_at = 0;  // milliseconds since the Unix epoch
    std::string editor = "system";
    std::int64_t revision = 0;

    /// Throws ValidationError when the box/status pairing or bounds are violated.
    void validate() const;

    friend bool operator==(const LabelRecord&, const LabelRecord&) = default;
};

nlohmann::json to_json(const LabelRecord& r);
LabelRecord record_from_json(const nlohmann::json& j);

enum class QueueReason { low_score, no_candidate, person_conflict, user_flag };
enum class QueueState { pending, done };
std::string to_string(QueueReason r);
QueueReason parse_queue_reason(const std::string& s);

struct ReviewQueueItem {
    std::string frame_id;
    QueueReason reason = QueueReason::no_candidate;
    QueueState state = QueueState::pending;

    friend bool operator==(const ReviewQueueItem&, const ReviewQueueItem&) = default;
};

/// A reviewer action on one record.
struct ReviewEdit {
    enum class Kind { new_box, confirm, mark_no_object, set_difficulty };

    Kind kind = Kind::confirm;
    std::optional<BoxPx> box;
    std::optional<Difficulty> difficulty;

    static ReviewEdit new_box(BoxPx b) { return {Kind::new_box, b, std::nullopt}; }
    static ReviewEdit confirm() { return {Kind::confirm, std::nullopt, std::nullopt}; }
    static ReviewEdit mark_no_object() { return {Kind::mark_no_object, std::nullopt, std::nullopt}; }
    static ReviewEdit set_difficulty(Difficulty d) { return {Kind::set_difficulty, std::nullopt, d}; }
};

std::string to_string(ReviewEdit::Kind k);

enum class ConflictPolicy { last_write_wins, reject };

struct ReviewOptions {
    /// Revision the editor saw; a mismatch is a concurrent-edit conflict.
    std::optional<std::int64_t> expected_revision;
    ConflictPolicy on_conflict = ConflictPolicy::last_write_wins;
    /// A new box on an auto label whose center moves at most this far is an
    /// adjustment; further is a manual correction.
    double minor_adjustment_px = 25.0;
};

/// Applies an edit to a record without persisting anything. Throws
/// TransitionError for an illegal status transition and ValidationError for a
/// malformed edit.
LabelRecord apply_edit(const LabelRecord& record, const ReviewEdit& edit, const std::string& editor,
                       std::int64_t now_ms, const ReviewOptions& options = {});

struct StoreStats {
    std::size_t total = 0;
    std::map<std::string, std::size_t> by_status;
    std::map<std::string, std::size_t> by_difficulty;  // includes "untagged"
    std::map<std::string, std::size_t> by_background;
    std::size_t queue_pending = 0;
};

struct SequenceSummary {
    std::string sequence_id;
    std::string location;
    std::string background_id;
    std::size_t frame_count = 0;
};

/// Directory-backed annotation store.
///
/// Layout:
///   manifest.jsonl          one LabelRecord per line, ordered by frame id
///   labels/<seq>/<idx>.txt  normalized box line for records that have a box
///   audit.jsonl             append-only log of review edits
///   queue.jsonl             review queue
///
/// Not thread-safe; callers serialize writers (the review server does).
class LabelStore {
public:
    using Clock = std::function<std::int64_t()>;

    /// Opens an existing store or initializes an empty one.
    explicit LabelStore(std::filesystem::path directory);

    const std::filesystem::path& directory() const noexcept { return directory_; }
    void set_clock(Clock clock) { clock_ = std::move(clock); }
    std::int64_t now() const { return clock_(); }

    const LabelRecord* find(const std::string& frame_id) const;
    const LabelRecord& get(const std::string& frame_id) const;  // throws NotFoundError
    std::vector<LabelRecord> records() const;
    std::size_t size() const { return records_.size(); }

    /// Inserts or replaces a record (pipeline population); no audit line.
    void put(LabelRecord record);
    /// Drops all records and queue items of one sequence.
    void remove_sequence(const std::string& sequence_id);

    /// Applies a reviewer edit, persists the record and appends an audit line.
    LabelRecord record_review(const std::string& frame_id, const ReviewEdit& edit, const std::string& editor,
                              const ReviewOptions& options = {});

    void enqueue(ReviewQueueItem item);
    void mark_done(const std::string& frame_id);
    std::vector<ReviewQueueItem> queue(bool pending_only = true) const;

    StoreStats stats(const std::optional<std::string>& background_filter = std::nullopt) const;
    std::vector<SequenceSummary> sequences() const;
    /// Records of one sequence with frame indices in [first, last].
    std::vector<LabelRecord> frame_range(const std::string& sequence_id, std::int64_t first, std::int64_t last) const;

    /// Rewrites manifest, queue and label files.
    void flush();

    std::filesystem::path audit_path() const { return directory_ / "audit.jsonl"; }
    std::filesystem::path manifest_path() const { return directory_ / "manifest.jsonl"; }
    std::filesystem::path label_path(const LabelRecord& r) const;

private:
    void write_label_file(const LabelRecord& r) const;
    void write_manifest() const;
    void write_queue() const;

    std::filesystem::path directory_;
    std::map<std::string, LabelRecord> records_;
    std::map<std::string, ReviewQueueItem> queue_;
    Clock clock_;
};

/// Re-applies audit lines (in file order) on top of a starting set of records.
std::map<std::string, LabelRecord> replay_audit(std::map<std::string, LabelRecord> initial,
                                                const std::filesystem::path& audit_file);

std::vector<LabelRecord> read_manifest(const std::filesystem::path& file);
void write_manifest(const std::filesystem::path& file, const std::vector<LabelRecord>& records);

/// Writes `content` to `file` through a temporary sibling and a rename.
void write_file_atomic(const std::filesystem::path& file, const std::string& content);

/// Exclusive `store.lock` in a store directory for the lifetime of the object.
class StoreLock {
public:
    explicit StoreLock(const std::filesystem::path& store_directory);
    ~StoreLock();
    StoreLock(const StoreLock&) = delete;
    StoreLock& operator=(const StoreLock&) = delete;

private:
    std::filesystem::path file_;
};

// --- cross-validation exports ---

enum class Split { train, val, test };
std::string to_string(Split s);

/// Assigns each background (directly or through its location) to a split.
struct SplitSpec {
    std::map<std::string, Split> by_background;
    std::map<std::string, Split> by_location;
    std::string split_by = "custom";  // "background" | "location" | "custom"
    std::vector<std::string> held_out;
};

SplitSpec hold_out_background(const std::vector<LabelRecord>& manifest, const std::string& background_id);
SplitSpec hold_out_location(const std::vector<LabelRecord>& manifest, const std::string& location);

struct ExportOptions {
    /// Only these difficulties are exported; untagged records are dropped when set.
    std::optional<std::set<Difficulty>> difficulties;
    /// Apply the difficulty filter to the train split only.
    bool filter_train_only = false;
    bool copy_images = true;
};

struct ExportResult {
    std::map<Split, std::size_t> counts;
    std::map<Split, std::set<std::string>> backgrounds;
    std::size_t missing_images = 0;
};

/// Writes `<split>/images`, `<split>/labels`, `<split>/manifest.jsonl` and
/// `fold.json` under output_dir. Only auto/adjusted/manual records are exported.
/// Throws ValidationError when a background is uncovered or lands in two splits.
ExportResult export_split(const std::vector<LabelRecord>& manifest, const SplitSpec& spec,
                          const std::filesystem::path& output_dir, const ExportOptions& options = {});

/// Reads an export back from the split manifests, checking each label file against its record.
std::map<Split, std::vector<LabelRecord>> import_export(const std::filesystem::path& output_dir);

}  // namespace shuttle
