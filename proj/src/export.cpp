#include <cmath>
#include <fstream>

#include "shuttle/errors.hpp"
#include "shuttle/label_format.hpp"
#include "shuttle/label_store.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace shuttle {

namespace {

std::string export_basename(const LabelRecord& r) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%06lld", static_cast<long long>(r.frame_index));
    return r.sequence_id + "_" + buf;
}

Split resolve_split(const SplitSpec& spec, const LabelRecord& r) {
    std::optional<Split> by_bg, by_loc;
    if (auto it = spec.by_background.find(r.background_id); it != spec.by_background.end())
        by_bg = it->second;
    if (auto it = spec.by_location.find(r.location); it != spec.by_location.end())
        by_loc = it->second;
    if (by_bg && by_loc && *by_bg != *by_loc)
        throw ValidationError("background '" + r.background_id + "' is assigned to both " + to_string(*by_bg) +
                              " and " + to_string(*by_loc));
    if (by_bg)
        return *by_bg;
    if (by_loc)
        return *by_loc;
    throw ValidationError("split spec does not cover background '" + r.background_id + "'");
}

}  // namespace

std::string to_string(Split s) {
    switch (s) {
        case Split::train: return "train";
        case Split::val: return "val";
        case Split::test: return "test";
    }
    return "?";
}

SplitSpec hold_out_background(const std::vector<LabelRecord>& manifest, const std::string& background_id) {
    SplitSpec spec;
    spec.split_by = "background";
    spec.held_out = {background_id};
    bool found = false;
    for (const auto& r : manifest) {
        spec.by_background[r.background_id] = r.background_id == background_id ? Split::test : Split::train;
        found |= r.background_id == background_id;
    }
    if (!found)
        throw ValidationError("no frames with background '" + background_id + "'");
    return spec;
}

SplitSpec hold_out_location(const std::vector<LabelRecord>& manifest, const std::string& location) {
    SplitSpec spec;
    spec.split_by = "location";
    spec.held_out = {location};
    bool found = false;
    for (const auto& r : manifest) {
        spec.by_location[r.location] = r.location == location ? Split::test : Split::train;
        found |= r.location == location;
    }
    if (!found)
        throw ValidationError("no frames with location '" + location + "'");
    return spec;
}

ExportResult export_split(const std::vector<LabelRecord>& manifest, const SplitSpec& spec, const fs::path& output_dir,
                          const ExportOptions& options) {
    // Resolve every background first so a bad spec writes nothing.
    std::map<std::string, Split> background_split;
    for (const auto& r : manifest) {
        const Split s = resolve_split(spec, r);
        auto [it, inserted] = background_split.emplace(r.background_id, s);
        if (!inserted && it->second != s)
            throw ValidationError("background '" + r.background_id + "' falls into more than one split");
    }

    ExportResult result;
    std::map<Split, std::string> manifests;
    for (const auto& r : manifest) {
        if (!is_labeled(r.status))
            continue;
        const Split split = background_split.at(r.background_id);
        if (options.difficulties && (!options.filter_train_only || split == Split::train)) {
            if (!r.difficulty || !options.difficulties->contains(*r.difficulty))
                continue;
        }

        const fs::path root = output_dir / to_string(split);
        fs::create_directories(root / "images");
        fs::create_directories(root / "labels");
        const std::string base = export_basename(r);

        LabelRecord exported = r;
        if (options.copy_images && !r.image_path.empty() && fs::exists(r.image_path)) {
            const fs::path target = root / "images" / (base + fs::path(r.image_path).extension().string());
            fs::copy_file(r.image_path, target, fs::copy_options::overwrite_existing);
            exported.image_path = fs::relative(target, output_dir).string();
        } else {
            ++result.missing_images;
        }
        write_file_atomic(root / "labels" / (base + ".txt"), to_normalized_record(*r.bbox, r.width, r.height));
        manifests[split] += to_json(exported).dump() + "\n";
        ++result.counts[split];
        result.backgrounds[split].insert(r.background_id);
    }

    for (const auto& [split, content] : manifests)
        write_file_atomic(output_dir / to_string(split) / "manifest.jsonl", content);

    json fold;
    fold["split_by"] = spec.split_by;
    fold["held_out"] = spec.held_out;
    json splits = json::object();
    for (const auto& [bg, split] : background_split)
        splits[to_string(split)].push_back(bg);
    fold["backgrounds"] = splits;
    json counts = json::object();
    for (const auto& [split, n] : result.counts)
        counts[to_string(split)] = n;
    fold["counts"] = counts;
    if (options.difficulties) {
        json d = json::array();
        for (auto diff : *options.difficulties)
            d.push_back(to_string(diff));
        fold["difficulty_filter"] = d;
        fold["difficulty_filter_train_only"] = options.filter_train_only;
    }
    fs::create_directories(output_dir);
    write_file_atomic(output_dir / "fold.json", fold.dump(2) + "\n");
    return result;
}

std::map<Split, std::vector<LabelRecord>> import_export(const fs::path& output_dir) {
    std::map<Split, std::vector<LabelRecord>> out;
    for (Split split : {Split::train, Split::val, Split::test}) {
        const fs::path root = output_dir / to_string(split);
        if (!fs::exists(root / "manifest.jsonl"))
            continue;
        for (auto& r : read_manifest(root / "manifest.jsonl")) {
            std::ifstream in(root / "labels" / (export_basename(r) + ".txt"));
            std::string line;
            if (!std::getline(in, line))
                throw Error("missing label file for " + r.frame_id);
            const BoxPx from_file = parse_label_line(line, r.width, r.height, 1);
            // The manifest keeps the exact box; the label file must agree up to quantization.
            const double tol = 1e-6 * std::max(r.width, r.height) + 1e-9;
            if (!r.bbox || std::abs(from_file.x_c - r.bbox->x_c) > tol || std::abs(from_file.y_c - r.bbox->y_c) > tol ||
                std::abs(from_file.w - r.bbox->w) > tol || std::abs(from_file.h - r.bbox->h) > tol)
                throw Error("label file disagrees with the manifest for " + r.frame_id);
            out[split].push_back(std::move(r));
        }
    }
    return out;
}

}  // namespace shuttle
