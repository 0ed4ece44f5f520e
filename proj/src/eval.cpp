#include "shuttle/eval.hpp"

#include <cmath>
#include <cstdio>
#include <istream>
#include <numeric>
#include <sstream>

#include "shuttle/errors.hpp"

using json = nlohmann::json;

namespace shuttle {

void MatchConfig::validate() const {
    if (!(tau > 0))
        throw ConfigError("match.tau must be positive");
    if (confidence_floor < 0 || confidence_floor > 1)
        throw ConfigError("match.confidence_floor must be in [0, 1]");
}

EvalCounts& EvalCounts::operator+=(const EvalCounts& o) {
    tp += o.tp;
    fp += o.fp;
    fn += o.fn;
    tp_center_offsets.insert(tp_center_offsets.end(), o.tp_center_offsets.begin(), o.tp_center_offsets.end());
    return *this;
}

double f1_score(double precision, double recall) {
    return precision + recall > 0 ? 2 * precision * recall / (precision + recall) : 0.0;
}

Metrics derive_metrics(const EvalCounts& c) {
    Metrics m;
    m.precision = c.tp + c.fp > 0 ? double(c.tp) / double(c.tp + c.fp) : 0.0;
    m.recall = c.tp + c.fn > 0 ? double(c.tp) / double(c.tp + c.fn) : 0.0;
    m.f1 = f1_score(m.precision, m.recall);
    return m;
}

double mean_offset(const EvalCounts& c) {
    if (c.tp_center_offsets.empty())
        return 0.0;
    return std::accumulate(c.tp_center_offsets.begin(), c.tp_center_offsets.end(), 0.0) /
           double(c.tp_center_offsets.size());
}

std::vector<GroundTruth> ground_truth_from_records(const std::vector<LabelRecord>& records) {
    std::vector<GroundTruth> out;
    out.reserve(records.size());
    for (const auto& r : records) {
        if (r.status == LabelStatus::burn_in_excluded)
            continue;
        out.push_back({r.frame_id, r.bbox, r.difficulty, r.background_id, r.location});
    }
    return out;
}

std::optional<Prediction> select_top1(std::span<const Prediction> preds, const MatchConfig& cfg) {
    const Prediction* best = nullptr;
    for (const auto& p : preds) {
        if (p.confidence < cfg.confidence_floor)
            continue;
        if (!best || p.confidence > best->confidence)
            best = &p;
    }
    if (!best)
        return std::nullopt;
    return *best;
}

EvalCounts match_frame(const std::optional<Prediction>& pred, const std::optional<BoxPx>& gt, const MatchConfig& cfg) {
    EvalCounts c;
    if (pred && gt) {
        const double d = distance(pred->box.center(), gt->center());
        if (d <= cfg.tau) {
            c.tp = 1;
            c.tp_center_offsets.push_back(d);
        } else {
            c.fp = 1;
            c.fn = cfg.single_count ? 0 : 1;
        }
    } else if (pred) {
        c.fp = 1;
    } else if (gt) {
        c.fn = 1;
    }
    return c;
}

EvalReport accumulate(std::span<const EvalCounts> deltas) {
    EvalReport report;
    for (const auto& d : deltas)
        report.counts += d;
    report.metrics = derive_metrics(report.counts);
    report.mean_tp_offset = mean_offset(report.counts);
    return report;
}

std::vector<FrameMatch> match_frames(const std::vector<GroundTruth>& gt, const std::map<std::string, Prediction>& top1,
                                     const MatchConfig& cfg) {
    std::vector<FrameMatch> out;
    out.reserve(gt.size());
    for (const auto& g : gt) {
        FrameMatch m;
        m.gt = g;
        if (auto it = top1.find(g.frame_id); it != top1.end())
            m.pred = it->second;
        m.delta = match_frame(m.pred, g.box, cfg);
        out.push_back(std::move(m));
    }
    return out;
}

EvalReport stratified_report(const std::vector<FrameMatch>& matches) {
    std::vector<EvalCounts> deltas;
    deltas.reserve(matches.size());
    std::map<std::string, EvalCounts> strata{{"easy", {}}, {"medium", {}}, {"hard", {}}};
    std::size_t untagged = 0;
    for (const auto& m : matches) {
        deltas.push_back(m.delta);
        if (m.gt.difficulty)
            strata[to_string(*m.gt.difficulty)] += m.delta;
        else if (m.gt.box)
            ++untagged;
    }
    EvalReport report = accumulate(deltas);
    for (auto& [name, counts] : strata)
        report.strata[name] = {counts, derive_metrics(counts)};
    if (untagged > 0)
        report.warnings.push_back(std::to_string(untagged) +
                                  " ground-truth frames have no difficulty tag; counted in overall only");
    return report;
}

SizeBinReport size_binned_report(const std::vector<FrameMatch>& matches, const SizeBinConfig& cfg) {
    if (!(cfg.bin_width > 0))
        throw ConfigError("bin width must be positive");
    SizeBinReport report;
    report.config = cfg;
    std::map<std::int64_t, SizeBin> bins;
    for (const auto& m : matches) {
        if (!m.gt.box) {
            report.fp_without_gt += m.delta.fp;
            continue;
        }
        const auto key = std::int64_t(std::floor(m.gt.box->side_length() / cfg.bin_width));
        auto& bin = bins[key];
        bin.key = key;
        bin.tp += m.delta.tp;
        bin.fn += m.delta.fn;
        bin.fp_with_gt += m.delta.fp;
        ++bin.samples;
        bin.correct += m.delta.tp;
    }
    for (auto& [key, bin] : bins) {
        bin.lower = double(key) * cfg.bin_width;
        bin.upper = double(key + 1) * cfg.bin_width;
        bin.incorrect = bin.samples - bin.correct;
        if (bin.samples >= cfg.min_count) {
            bin.recall = bin.tp + bin.fn > 0 ? double(bin.tp) / double(bin.tp + bin.fn) : 0.0;
            bin.precision = bin.tp + bin.fp_with_gt > 0 ? double(bin.tp) / double(bin.tp + bin.fp_with_gt) : 0.0;
        }
        report.bins.push_back(bin);
    }
    return report;
}

FoldReport fold_report_from_json(const json& j) {
    FoldReport f;
    f.name = j.value("name", "");
    if (j.contains("counts") && j["counts"].is_object()) {
        const auto& c = j["counts"];
        if (!c.contains("tp") || !c.contains("fp") || !c.contains("fn"))
            throw ValidationError("fold '" + f.name + "' counts need tp, fp and fn");
        EvalCounts counts;
        counts.tp = c["tp"].get<std::int64_t>();
        counts.fp = c["fp"].get<std::int64_t>();
        counts.fn = c["fn"].get<std::int64_t>();
        if (c.contains("tp_center_offsets"))
            counts.tp_center_offsets = c["tp_center_offsets"].get<std::vector<double>>();
        f.counts = counts;
    }
    if (j.contains("metrics") && j["metrics"].is_object()) {
        const auto& m = j["metrics"];
        f.metrics = Metrics{m.value("precision", 0.0), m.value("recall", 0.0), m.value("f1", 0.0)};
    }
    return f;
}

CrossValReport crossval_aggregate(const std::vector<FoldReport>& folds) {
    CrossValReport out;
    if (folds.empty())
        return out;
    Metrics sum;
    for (const auto& f : folds) {
        if (!f.counts)
            throw ValidationError("fold '" + f.name + "' has no raw counts; derived metrics cannot be pooled");
        out.pooled_counts += *f.counts;
        const Metrics m = derive_metrics(*f.counts);
        out.per_fold.emplace_back(f.name, m);
        out.per_fold_counts.emplace_back(f.name, *f.counts);
        sum.precision += m.precision;
        sum.recall += m.recall;
        sum.f1 += m.f1;
    }
    out.pooled = derive_metrics(out.pooled_counts);
    const double n = double(folds.size());
    out.unweighted_mean = {sum.precision / n, sum.recall / n, sum.f1 / n};
    return out;
}

std::map<std::string, Prediction> read_top1_predictions(std::istream& in, const MatchConfig& cfg,
                                                        std::vector<std::string>* warnings) {
    std::map<std::string, Prediction> best;
    std::string line;
    std::size_t n = 0;
    std::size_t below_floor = 0;
    while (std::getline(in, line)) {
        ++n;
        if (line.find_first_not_of(" \t\r") == std::string::npos)
            continue;
        Prediction p;
        try {
            const auto j = json::parse(line);
            const auto& frame = j.at("frame");
            p.frame_id = frame.is_string() ? frame.get<std::string>() : frame.dump();
            p.box = {j.at("x_c").get<double>(), j.at("y_c").get<double>(), j.at("w").get<double>(),
                     j.at("h").get<double>()};
            p.confidence = j.at("confidence").get<double>();
        } catch (const json::exception& e) {
            throw ParseError(n, std::string("malformed prediction: ") + e.what());
        }
        if (p.confidence < cfg.confidence_floor) {
            ++below_floor;
            continue;
        }
        auto it = best.find(p.frame_id);
        if (it == best.end())
            best.emplace(p.frame_id, std::move(p));
        else if (p.confidence > it->second.confidence)
            it->second = std::move(p);
    }
    if (warnings && below_floor > 0)
        warnings->push_back(std::to_string(below_floor) + " predictions below the confidence floor ignored");
    return best;
}

json to_json(const EvalCounts& c) {
    return {{"tp", c.tp}, {"fp", c.fp}, {"fn", c.fn}};
}

json to_json(const Metrics& m) {
    return {{"precision", m.precision}, {"recall", m.recall}, {"f1", m.f1}};
}

json to_json(const EvalReport& r) {
    json j;
    j["counts"] = to_json(r.counts);
    j["metrics"] = to_json(r.metrics);
    j["mean_tp_offset"] = r.mean_tp_offset;
    json strata = json::object();
    for (const auto& [name, s] : r.strata)
        strata[name] = {{"counts", to_json(s.counts)}, {"metrics", to_json(s.metrics)},
                        {"mean_tp_offset", mean_offset(s.counts)}};
    j["strata"] = strata;
    j["warnings"] = r.warnings;
    return j;
}

json to_json(const SizeBinReport& r) {
    json bins = json::array();
    for (const auto& b : r.bins) {
        bins.push_back({{"lower", b.lower},
                        {"upper", b.upper},
                        {"samples", b.samples},
                        {"correct", b.correct},
                        {"incorrect", b.incorrect},
                        {"tp", b.tp},
                        {"fn", b.fn},
                        {"fp_with_gt", b.fp_with_gt},
                        {"precision", b.precision ? json(*b.precision) : json(nullptr)},
                        {"recall", b.recall ? json(*b.recall) : json(nullptr)}});
    }
    return {{"bin_width", r.config.bin_width},
            {"min_count", r.config.min_count},
            {"fp_without_gt", r.fp_without_gt},
            {"bins", bins}};
}

json to_json(const CrossValReport& r) {
    json folds = json::array();
    for (std::size_t i = 0; i < r.per_fold.size(); ++i)
        folds.push_back({{"name", r.per_fold[i].first},
                         {"counts", to_json(r.per_fold_counts[i].second)},
                         {"metrics", to_json(r.per_fold[i].second)}});
    return {{"pooled", {{"counts", to_json(r.pooled_counts)}, {"metrics", to_json(r.pooled)}}},
            {"unweighted_mean", to_json(r.unweighted_mean)},
            {"folds", folds}};
}

namespace {

std::string cell(const EvalCounts& c, double value) {
    if (c.tp + c.fp + c.fn == 0)
        return "-";
    char buf[16];
    std::snprintf(buf, sizeof buf, "%.3f", value);
    return buf;
}

}  // namespace

std::string format_table(const EvalReport& report) {
    std::ostringstream out;
    char buf[128];
    std::snprintf(buf, sizeof buf, "%-10s %8s %8s %8s %8s\n", "Metric", "Overall", "Easy", "Medium", "Hard");
    out << buf;
    const auto stratum = [&](const char* name) {
        auto it = report.strata.find(name);
        return it == report.strata.end() ? StratumReport{} : it->second;
    };
    const StratumReport easy = stratum("easy"), medium = stratum("medium"), hard = stratum("hard");
    const auto row = [&](const char* label, auto field) {
        std::snprintf(buf, sizeof buf, "%-10s %8s %8s %8s %8s\n", label,
                      cell(report.counts, field(report.metrics)).c_str(), cell(easy.counts, field(easy.metrics)).c_str(),
                      cell(medium.counts, field(medium.metrics)).c_str(), cell(hard.counts, field(hard.metrics)).c_str());
        out << buf;
    };
    row("F1", [](const Metrics& m) { return m.f1; });
    row("Precision", [](const Metrics& m) { return m.precision; });
    row("Recall", [](const Metrics& m) { return m.recall; });
    return out.str();
}

std::string format_crossval_table(const CrossValReport& report) {
    std::ostringstream out;
    char buf[160];
    std::snprintf(buf, sizeof buf, "%-24s %8s %8s %8s %8s %8s %8s\n", "Fold", "TP", "FP", "FN", "P", "R", "F1");
    out << buf;
    for (std::size_t i = 0; i < report.per_fold.size(); ++i) {
        const auto& c = report.per_fold_counts[i].second;
        const auto& m = report.per_fold[i].second;
        std::snprintf(buf, sizeof buf, "%-24s %8lld %8lld %8lld %8.3f %8.3f %8.3f\n", report.per_fold[i].first.c_str(),
                      (long long)c.tp, (long long)c.fp, (long long)c.fn, m.precision, m.recall, m.f1);
        out << buf;
    }
    const auto& c = report.pooled_counts;
    std::snprintf(buf, sizeof buf, "%-24s %8lld %8lld %8lld %8.3f %8.3f %8.3f\n", "pooled", (long long)c.tp,
                  (long long)c.fp, (long long)c.fn, report.pooled.precision, report.pooled.recall, report.pooled.f1);
    out << buf;
    std::snprintf(buf, sizeof buf, "%-24s %8s %8s %8s %8.3f %8.3f %8.3f\n", "unweighted mean", "", "", "",
                  report.unweighted_mean.precision, report.unweighted_mean.recall, report.unweighted_mean.f1);
    out << buf;
    return out.str();
}

std::string size_bins_csv(const SizeBinReport& report) {
    std::ostringstream out;
    out << "lower,upper,samples,correct,incorrect,tp,fn,fp_with_gt,precision,recall\n";
    for (const auto& b : report.bins) {
        out << b.lower << ',' << b.upper << ',' << b.samples << ',' << b.correct << ',' << b.incorrect << ',' << b.tp
            << ',' << b.fn << ',' << b.fp_with_gt << ',';
        if (b.precision)
            out << *b.precision;
        out << ',';
        if (b.recall)
            out << *b.recall;
        out << '\n';
    }
    return out.str();
}

}  // namespace shuttle
