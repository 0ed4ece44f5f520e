#include "shuttle/label_store.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "shuttle/errors.hpp"
#include "shuttle/label_format.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace shuttle {

std::string to_string(Difficulty d) {
    switch (d) {
        case Difficulty::easy: return "easy";
        case Difficulty::medium: return "medium";
        case Difficulty::hard: return "hard";
    }
    return "?";
}

std::string to_string(LabelStatus s) {
    switch (s) {
        case LabelStatus::auto_label: return "auto";
        case LabelStatus::adjusted: return "adjusted";
        case LabelStatus::manual: return "manual";
        case LabelStatus::no_object: return "no_object";
        case LabelStatus::burn_in_excluded: return "burn_in_excluded";
    }
    return "?";
}

Difficulty parse_difficulty(const std::string& s) {
    if (s == "easy") return Difficulty::easy;
    if (s == "medium") return Difficulty::medium;
    if (s == "hard") return Difficulty::hard;
    throw ValidationError("unknown difficulty '" + s + "'");
}

LabelStatus parse_status(const std::string& s) {
    if (s == "auto") return LabelStatus::auto_label;
    if (s == "adjusted") return LabelStatus::adjusted;
    if (s == "manual") return LabelStatus::manual;
    if (s == "no_object") return LabelStatus::no_object;
    if (s == "burn_in_excluded") return LabelStatus::burn_in_excluded;
    throw ValidationError("unknown status '" + s + "'");
}

std::string to_string(QueueReason r) {
    switch (r) {
        case QueueReason::low_score: return "low_score";
        case QueueReason::no_candidate: return "no_candidate";
        case QueueReason::person_conflict: return "person_conflict";
        case QueueReason::user_flag: return "user_flag";
    }
    return "?";
}

QueueReason parse_queue_reason(const std::string& s) {
    if (s == "low_score") return QueueReason::low_score;
    if (s == "no_candidate") return QueueReason::no_candidate;
    if (s == "person_conflict") return QueueReason::person_conflict;
    if (s == "user_flag") return QueueReason::user_flag;
    throw ValidationError("unknown queue reason '" + s + "'");
}

std::string to_string(ReviewEdit::Kind k) {
    switch (k) {
        case ReviewEdit::Kind::new_box: return "new_box";
        case ReviewEdit::Kind::confirm: return "confirm";
        case ReviewEdit::Kind::mark_no_object: return "mark_no_object";
        case ReviewEdit::Kind::set_difficulty: return "set_difficulty";
    }
    return "?";
}

std::string make_frame_id(const std::string& sequence_id, std::int64_t frame_index) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%06lld", static_cast<long long>(frame_index));
    return sequence_id + ":" + buf;
}

void LabelRecord::validate() const {
    if (frame_id.empty())
        throw ValidationError("record without frame id");
    const bool boxless = status == LabelStatus::no_object || status == LabelStatus::burn_in_excluded;
    if (bbox.has_value() == boxless)
        throw ValidationError(frame_id + ": status " + to_string(status) +
                              (boxless ? " must not carry a box" : " requires a box"));
    if (bbox && width > 0 && height > 0 && !bbox->inside(width, height))
        throw ValidationError(frame_id + ": box lies outside the frame");
    if (bbox && !(bbox->w > 0 && bbox->h > 0))
        throw ValidationError(frame_id + ": box must have positive size");
    if (pipeline_score && (*pipeline_score < 0 || *pipeline_score > 1))
        throw ValidationError(frame_id + ": pipeline score outside [0, 1]");
}

json to_json(const LabelRecord& r) {
    json j;
    j["frame_id"] = r.frame_id;
    j["frame"] = r.image_path;
    j["sequence_id"] = r.sequence_id;
    j["frame_index"] = r.frame_index;
    j["width"] = r.width;
    j["height"] = r.height;
    j["location"] = r.location;
    j["background_id"] = r.background_id;
    j["bbox_px"] = r.bbox ? json{{"x_c", r.bbox->x_c}, {"y_c", r.bbox->y_c}, {"w", r.bbox->w}, {"h", r.bbox->h}}
                          : json(nullptr);
    j["difficulty"] = r.difficulty ? json(to_string(*r.difficulty)) : json(nullptr);
    j["status"] = to_string(r.status);
    j["pipeline_score"] = r.pipeline_score ? json(*r.pipeline_score) : json(nullptr);
    j["updated_at"] = r.updated_at;
    j["editor"] = r.editor;
    j["revision"] = r.revision;
    return j;
}

LabelRecord record_from_json(const json& j) {
    try {
        LabelRecord r;
        r.frame_id = j.at("frame_id").get<std::string>();
        r.image_path = j.value("frame", "");
        r.sequence_id = j.value("sequence_id", "");
        r.frame_index = j.value("frame_index", std::int64_t{0});
        r.width = j.value("width", 0);
        r.height = j.value("height", 0);
        r.location = j.value("location", "");
        r.background_id = j.value("background_id", "");
        if (j.contains("bbox_px") && !j["bbox_px"].is_null()) {
            const auto& b = j["bbox_px"];
            r.bbox = BoxPx{b.at("x_c").get<double>(), b.at("y_c").get<double>(), b.at("w").get<double>(),
                           b.at("h").get<double>()};
        }
        if (j.contains("difficulty") && !j["difficulty"].is_null())
            r.difficulty = parse_difficulty(j["difficulty"].get<std::string>());
        r.status = parse_status(j.at("status").get<std::string>());
        if (j.contains("pipeline_score") && !j["pipeline_score"].is_null())
            r.pipeline_score = j["pipeline_score"].get<double>();
        r.updated_at = j.value("updated_at", std::int64_t{0});
        r.editor = j.value("editor", "system");
        r.revision = j.value("revision", std::int64_t{0});
        return r;
    } catch (const json::exception& e) {
        throw ValidationError(std::string("malformed record: ") + e.what());
    }
}

LabelRecord apply_edit(const LabelRecord& record, const ReviewEdit& edit, const std::string& editor,
                       std::int64_t now_ms, const ReviewOptions& options) {
    if (record.status == LabelStatus::burn_in_excluded)
        throw TransitionError(record.frame_id + ": burn-in frames are excluded from labeling");

    LabelRecord next = record;
    next.editor = editor;
    next.updated_at = now_ms;
    next.revision = record.revision + 1;

    switch (edit.kind) {
        case ReviewEdit::Kind::confirm:
            break;
        case ReviewEdit::Kind::set_difficulty:
            if (!edit.difficulty)
                throw ValidationError("set_difficulty needs a difficulty");
            next.difficulty = edit.difficulty;
            break;
        case ReviewEdit::Kind::mark_no_object:
            if (record.status != LabelStatus::auto_label && record.status != LabelStatus::no_object)
                throw TransitionError(record.frame_id + ": " + to_string(record.status) +
                                      " -> no_object is not allowed; only auto labels can be rejected");
            next.bbox.reset();
            next.status = LabelStatus::no_object;
            break;
        case ReviewEdit::Kind::new_box: {
            if (!edit.box)
                throw ValidationError("new_box needs a box");
            const BoxPx& b = *edit.box;
            if (!(b.w > 0 && b.h > 0) || (record.width > 0 && !b.inside(record.width, record.height)))
                throw ValidationError(record.frame_id + ": box lies outside the frame");
            switch (record.status) {
                case LabelStatus::auto_label:
                    next.status = distance(b.center(), record.bbox->center()) <= options.minor_adjustment_px
                                      ? LabelStatus::adjusted
                                      : LabelStatus::manual;
                    break;
                case LabelStatus::adjusted:
                case LabelStatus::manual:
                    next.status = LabelStatus::adjusted;
                    break;
                case LabelStatus::no_object:
                    next.status = LabelStatus::manual;
                    break;
                case LabelStatus::burn_in_excluded:
                    break;
            }
            next.bbox = b;
            break;
        }
    }
    next.validate();
    return next;
}

void write_file_atomic(const fs::path& file, const std::string& content) {
    const fs::path tmp = file.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        out << content;
        out.flush();
        if (!out)
            throw Error("cannot write " + tmp.string());
    }
    fs::rename(tmp, file);
}

std::vector<LabelRecord> read_manifest(const fs::path& file) {
    std::vector<LabelRecord> out;
    std::ifstream in(file);
    if (!in)
        throw Error("cannot open " + file.string());
    std::string line;
    std::size_t n = 0;
    while (std::getline(in, line)) {
        ++n;
        if (line.empty())
            continue;
        try {
            out.push_back(record_from_json(json::parse(line)));
        } catch (const json::exception& e) {
            throw ParseError(n, file.string() + ": " + e.what());
        }
    }
    return out;
}

void write_manifest(const fs::path& file, const std::vector<LabelRecord>& records) {
    std::string content;
    for (const auto& r : records)
        content += to_json(r).dump() + "\n";
    write_file_atomic(file, content);
}

LabelStore::LabelStore(fs::path directory) : directory_(std::move(directory)) {
    clock_ = [] {
        return std::chrono::duration_cast<std::chrono::milliseconds>(
                   std::chrono::system_clock::now().time_since_epoch())
            .count();
    };
    fs::create_directories(directory_ / "labels");
    if (fs::exists(manifest_path()))
        for (auto& r : read_manifest(manifest_path()))
            records_[r.frame_id] = std::move(r);
    if (fs::exists(directory_ / "queue.jsonl")) {
        std::ifstream in(directory_ / "queue.jsonl");
        std::string line;
        while (std::getline(in, line)) {
            if (line.empty())
                continue;
            const auto j = json::parse(line);
            ReviewQueueItem item{j.at("frame_id").get<std::string>(),
                                 parse_queue_reason(j.at("reason").get<std::string>()),
                                 j.value("state", "pending") == "done" ? QueueState::done : QueueState::pending};
            queue_[item.frame_id] = item;
        }
    }
}

const LabelRecord* LabelStore::find(const std::string& frame_id) const {
    auto it = records_.find(frame_id);
    return it == records_.end() ? nullptr : &it->second;
}

const LabelRecord& LabelStore::get(const std::string& frame_id) const {
    if (const auto* r = find(frame_id))
        return *r;
    throw NotFoundError("unknown frame " + frame_id);
}

std::vector<LabelRecord> LabelStore::records() const {
    std::vector<LabelRecord> out;
    out.reserve(records_.size());
    for (const auto& [_, r] : records_)
        out.push_back(r);
    return out;
}

fs::path LabelStore::label_path(const LabelRecord& r) const {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%06lld.txt", static_cast<long long>(r.frame_index));
    return directory_ / "labels" / r.sequence_id / buf;
}

void LabelStore::write_label_file(const LabelRecord& r) const {
    const fs::path file = label_path(r);
    if (!r.bbox) {
        fs::remove(file);
        return;
    }
    fs::create_directories(file.parent_path());
    write_file_atomic(file, to_normalized_record(*r.bbox, r.width, r.height));
}

void LabelStore::put(LabelRecord record) {
    record.validate();
    write_label_file(record);
    records_[record.frame_id] = std::move(record);
}

void LabelStore::remove_sequence(const std::string& sequence_id) {
    for (auto it = records_.begin(); it != records_.end();) {
        if (it->second.sequence_id == sequence_id) {
            queue_.erase(it->first);
            fs::remove(label_path(it->second));
            it = records_.erase(it);
        } else {
            ++it;
        }
    }
}

LabelRecord LabelStore::record_review(const std::string& frame_id, const ReviewEdit& edit, const std::string& editor,
                                      const ReviewOptions& options) {
    const LabelRecord& current = get(frame_id);
    const bool conflict = options.expected_revision && *options.expected_revision != current.revision;
    if (conflict && options.on_conflict == ConflictPolicy::reject)
        throw ConflictError(frame_id + ": edited at revision " + std::to_string(*options.expected_revision) +
                            " but the record is at revision " + std::to_string(current.revision));

    const std::int64_t now_ms = now();
    LabelRecord next = apply_edit(current, edit, editor, now_ms, options);

    json line;
    line["ts"] = now_ms;
    line["frame_id"] = frame_id;
    line["action"] = to_string(edit.kind);
    line["editor"] = editor;
    line["old"] = to_json(current);
    line["new"] = to_json(next);
    if (conflict) {
        // Last write wins; the overwritten version is kept in "old".
        line["conflict"] = true;
        line["base_revision"] = *options.expected_revision;
    }
    {
        std::ofstream audit(audit_path(), std::ios::app);
        audit << line.dump() << '\n';
        audit.flush();
        if (!audit)
            throw Error("cannot append to " + audit_path().string());
    }

    write_label_file(next);
    records_[frame_id] = next;
    if (auto it = queue_.find(frame_id); it != queue_.end())
        it->second.state = QueueState::done;
    write_manifest();
    write_queue();
    return next;
}

void LabelStore::enqueue(ReviewQueueItem item) { queue_[item.frame_id] = item; }

void LabelStore::mark_done(const std::string& frame_id) {
    if (auto it = queue_.find(frame_id); it != queue_.end())
        it->second.state = QueueState::done;
}

std::vector<ReviewQueueItem> LabelStore::queue(bool pending_only) const {
    std::vector<ReviewQueueItem> out;
    for (const auto& [_, item] : queue_)
        if (!pending_only || item.state == QueueState::pending)
            out.push_back(item);
    return out;
}

StoreStats LabelStore::stats(const std::optional<std::string>& background_filter) const {
    StoreStats s;
    for (const char* st : {"auto", "adjusted", "manual", "no_object", "burn_in_excluded"})
        s.by_status[st] = 0;
    for (const char* d : {"easy", "medium", "hard", "untagged"})
        s.by_difficulty[d] = 0;
    for (const auto& [id, r] : records_) {
        if (background_filter && r.background_id != *background_filter)
            continue;
        ++s.total;
        ++s.by_status[to_string(r.status)];
        ++s.by_difficulty[r.difficulty ? to_string(*r.difficulty) : "untagged"];
        ++s.by_background[r.background_id];
        if (auto it = queue_.find(id); it != queue_.end() && it->second.state == QueueState::pending)
            ++s.queue_pending;
    }
    return s;
}

std::vector<SequenceSummary> LabelStore::sequences() const {
    std::map<std::string, SequenceSummary> seqs;
    for (const auto& [_, r] : records_) {
        auto& s = seqs[r.sequence_id];
        s.sequence_id = r.sequence_id;
        s.location = r.location;
        s.background_id = r.background_id;
        ++s.frame_count;
    }
    std::vector<SequenceSummary> out;
    for (auto& [_, s] : seqs)
        out.push_back(std::move(s));
    return out;
}

std::vector<LabelRecord> LabelStore::frame_range(const std::string& sequence_id, std::int64_t first,
                                                 std::int64_t last) const {
    std::vector<LabelRecord> out;
    for (auto idx = first; idx <= last; ++idx)
        if (const auto* r = find(make_frame_id(sequence_id, idx)))
            out.push_back(*r);
    return out;
}

void LabelStore::write_manifest() const { shuttle::write_manifest(manifest_path(), records()); }

void LabelStore::write_queue() const {
    std::string content;
    for (const auto& [_, item] : queue_) {
        json j = {{"frame_id", item.frame_id},
                  {"reason", to_string(item.reason)},
                  {"state", item.state == QueueState::done ? "done" : "pending"}};
        content += j.dump() + "\n";
    }
    write_file_atomic(directory_ / "queue.jsonl", content);
}

void LabelStore::flush() {
    for (const auto& [_, r] : records_)
        write_label_file(r);
    write_manifest();
    write_queue();
}

std::map<std::string, LabelRecord> replay_audit(std::map<std::string, LabelRecord> initial, const fs::path& audit_file) {
    std::ifstream in(audit_file);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty())
            continue;
        const auto j = json::parse(line);
        LabelRecord next = record_from_json(j.at("new"));
        initial[next.frame_id] = std::move(next);
    }
    return initial;
}

StoreLock::StoreLock(const fs::path& store_directory) : file_(store_directory / "store.lock") {
    fs::create_directories(store_directory);
    const int fd = ::open(file_.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
    if (fd < 0)
        throw StoreLockedError("store is locked by another process (" + file_.string() + ")");
    const std::string pid = std::to_string(::getpid()) + "\n";
    [[maybe_unused]] auto n = ::write(fd, pid.data(), pid.size());
    ::close(fd);
}

StoreLock::~StoreLock() {
    std::error_code ec;
    fs::remove(file_, ec);
}

}  // namespace shuttle
