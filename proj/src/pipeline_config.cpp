#include <fstream>

#include "shuttle/errors.hpp"
#include "shuttle/pipeline.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace shuttle {

namespace {

template <typename T>
void read_into(const json& obj, const char* key, T& field) {
    if (obj.contains(key) && !obj[key].is_null())
        field = obj[key].get<T>();
}

void reject_unknown(const json& obj, const char* section, std::initializer_list<const char*> known) {
    for (const auto& [key, _] : obj.items()) {
        bool ok = false;
        for (const char* k : known)
            ok |= key == k;
        if (!ok)
            throw ConfigError(std::string("unknown key '") + key + "' in " + section);
    }
}

}  // namespace

void PipelineConfig::validate() const {
    gmm.validate();
    morph.validate();
    spatial.validate();
    selector.validate();
    match.validate();
    if (burn_in_frames < 0)
        throw ConfigError("burn_in_frames must be non-negative");
    if (workers < 0)
        throw ConfigError("workers must be non-negative");
}

PipelineConfig pipeline_config_from_json(const json& j) {
    PipelineConfig cfg;
    try {
        reject_unknown(j, "config", {"gmm", "morph", "spatial", "selector", "match", "burn_in_frames", "workers", "paths"});
        if (j.contains("gmm")) {
            const auto& g = j["gmm"];
            reject_unknown(g, "gmm", {"max_modes", "learning_rate", "match_distance", "background_ratio",
                                      "initial_variance", "variance_min", "variance_max"});
            read_into(g, "max_modes", cfg.gmm.max_modes);
            read_into(g, "learning_rate", cfg.gmm.learning_rate);
            read_into(g, "match_distance", cfg.gmm.match_distance);
            read_into(g, "background_ratio", cfg.gmm.background_ratio);
            read_into(g, "initial_variance", cfg.gmm.initial_variance);
            read_into(g, "variance_min", cfg.gmm.variance_min);
            read_into(g, "variance_max", cfg.gmm.variance_max);
        }
        if (j.contains("morph")) {
            const auto& m = j["morph"];
            reject_unknown(m, "morph", {"element_width", "element_height", "open_iterations", "close_iterations"});
            read_into(m, "element_width", cfg.morph.element_width);
            read_into(m, "element_height", cfg.morph.element_height);
            read_into(m, "open_iterations", cfg.morph.open_iterations);
            read_into(m, "close_iterations", cfg.morph.close_iterations);
        }
        if (j.contains("spatial")) {
            const auto& s = j["spatial"];
            reject_unknown(s, "spatial",
                           {"y_threshold", "y_threshold_fraction", "person_mask_dilation", "missing_person_mask"});
            if (s.contains("y_threshold") && !s["y_threshold"].is_null())
                cfg.spatial.y_threshold = s["y_threshold"].get<double>();
            read_into(s, "y_threshold_fraction", cfg.spatial.y_threshold_fraction);
            read_into(s, "person_mask_dilation", cfg.spatial.person_mask_dilation);
            if (s.contains("missing_person_mask")) {
                const auto policy = s["missing_person_mask"].get<std::string>();
                if (policy == "skip-removal")
                    cfg.spatial.missing_person_mask = MissingMaskPolicy::skip_removal;
                else if (policy == "defer-frame")
                    cfg.spatial.missing_person_mask = MissingMaskPolicy::defer_frame;
                else
                    throw ConfigError("spatial.missing_person_mask must be skip-removal or defer-frame");
            }
        }
        if (j.contains("selector")) {
            const auto& s = j["selector"];
            reject_unknown(s, "selector", {"temporal_weight", "area_weight", "distance_scale", "reference_area",
                                           "min_score", "reset_gap"});
            read_into(s, "temporal_weight", cfg.selector.temporal_weight);
            read_into(s, "area_weight", cfg.selector.area_weight);
            read_into(s, "distance_scale", cfg.selector.distance_scale);
            read_into(s, "reference_area", cfg.selector.reference_area);
            read_into(s, "min_score", cfg.selector.min_score);
            read_into(s, "reset_gap", cfg.selector.reset_gap);
        }
        if (j.contains("match")) {
            const auto& m = j["match"];
            reject_unknown(m, "match", {"tau", "confidence_floor", "single_count"});
            read_into(m, "tau", cfg.match.tau);
            read_into(m, "confidence_floor", cfg.match.confidence_floor);
            read_into(m, "single_count", cfg.match.single_count);
        }
        read_into(j, "burn_in_frames", cfg.burn_in_frames);
        read_into(j, "workers", cfg.workers);
        if (j.contains("paths")) {
            const auto& p = j["paths"];
            reject_unknown(p, "paths", {"store", "person_masks", "dump_masks"});
            if (p.contains("store"))
                cfg.store = p["store"].get<std::string>();
            if (p.contains("person_masks"))
                cfg.person_masks = p["person_masks"].get<std::string>();
            read_into(p, "dump_masks", cfg.dump_masks);
        }
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    cfg.validate();
    return cfg;
}

PipelineConfig load_pipeline_config(const fs::path& file) {
    std::ifstream in(file);
    if (!in)
        throw ConfigError("cannot open config " + file.string());
    json j;
    try {
        j = json::parse(in, nullptr, true, /*ignore_comments=*/true);
    } catch (const json::exception& e) {
        throw ConfigError("malformed config " + file.string() + ": " + e.what());
    }
    PipelineConfig cfg = pipeline_config_from_json(j);
    // Relative paths are relative to the config file.
    const fs::path base = file.parent_path();
    if (!cfg.store.empty() && cfg.store.is_relative())
        cfg.store = base / cfg.store;
    if (!cfg.person_masks.empty() && cfg.person_masks.is_relative())
        cfg.person_masks = base / cfg.person_masks;
    return cfg;
}

json to_json(const PipelineConfig& c) {
    json j;
    j["gmm"] = {{"max_modes", c.gmm.max_modes},
                {"learning_rate", c.gmm.learning_rate},
                {"match_distance", c.gmm.match_distance},
                {"background_ratio", c.gmm.background_ratio},
                {"initial_variance", c.gmm.initial_variance},
                {"variance_min", c.gmm.variance_min},
                {"variance_max", c.gmm.variance_max}};
    j["morph"] = {{"element_width", c.morph.element_width},
                  {"element_height", c.morph.element_height},
                  {"open_iterations", c.morph.open_iterations},
                  {"close_iterations", c.morph.close_iterations}};
    j["spatial"] = {{"y_threshold", c.spatial.y_threshold ? json(*c.spatial.y_threshold) : json(nullptr)},
                    {"y_threshold_fraction", c.spatial.y_threshold_fraction},
                    {"person_mask_dilation", c.spatial.person_mask_dilation},
                    {"missing_person_mask", c.spatial.missing_person_mask == MissingMaskPolicy::skip_removal
                                                ? "skip-removal"
                                                : "defer-frame"}};
    j["selector"] = {{"temporal_weight", c.selector.temporal_weight},
                     {"area_weight", c.selector.area_weight},
                     {"distance_scale", c.selector.distance_scale},
                     {"reference_area", c.selector.reference_area},
                     {"min_score", c.selector.min_score},
                     {"reset_gap", c.selector.reset_gap}};
    j["match"] = {{"tau", c.match.tau}, {"confidence_floor", c.match.confidence_floor},
                  {"single_count", c.match.single_count}};
    j["burn_in_frames"] = c.burn_in_frames;
    j["workers"] = c.workers;
    j["paths"] = {{"store", c.store.string()}, {"person_masks", c.person_masks.string()}, {"dump_masks", c.dump_masks}};
    return j;
}

}  // namespace shuttle
