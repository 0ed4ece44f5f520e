#include <fstream>

#include <gtest/gtest.h>

#include "shuttle/errors.hpp"
#include "shuttle/label_store.hpp"
#include "test_support.hpp"

using namespace shuttle;
using test_support::TempDir;

namespace {

LabelRecord labeled(const std::string& bg, const std::string& location, std::int64_t idx,
                    std::optional<Difficulty> difficulty = std::nullopt, LabelStatus status = LabelStatus::auto_label) {
    LabelRecord r;
    r.sequence_id = "seq_" + bg;
    r.frame_index = idx;
    r.frame_id = make_frame_id(r.sequence_id, idx);
    r.width = 1920;
    r.height = 1200;
    r.background_id = bg;
    r.location = location;
    r.status = status;
    r.difficulty = difficulty;
    if (is_labeled(status))
        r.bbox = BoxPx{100.0 + idx * 7.123457, 200.0 + idx * 3.5, 14.25, 18.5};
    return r;
}

// 11 backgrounds over 3 locations, three frames each.
std::vector<LabelRecord> eleven_backgrounds() {
    std::vector<LabelRecord> out;
    for (int b = 1; b <= 11; ++b) {
        const std::string loc = b <= 4 ? "Lausanne" : b <= 8 ? "Ticino" : "Zurich";
        for (int i = 0; i < 3; ++i)
            out.push_back(labeled("GLC_" + std::to_string(b), loc, i));
    }
    return out;
}

}  // namespace

TEST(Export, HoldOutOneBackground) {
    TempDir dir;
    const auto manifest = eleven_backgrounds();
    const auto spec = hold_out_background(manifest, "GLC_2");
    ExportOptions opts;
    opts.copy_images = false;
    const auto result = export_split(manifest, spec, dir.path(), opts);
    EXPECT_EQ(result.backgrounds.at(Split::test), std::set<std::string>{"GLC_2"});
    EXPECT_EQ(result.backgrounds.at(Split::train).size(), 10u);
    EXPECT_FALSE(result.backgrounds.at(Split::train).contains("GLC_2"));
    EXPECT_EQ(result.counts.at(Split::test), 3u);
    EXPECT_EQ(result.counts.at(Split::train), 30u);

    std::ifstream in(dir / "fold.json");
    const auto fold = nlohmann::json::parse(in);
    EXPECT_EQ(fold.at("split_by"), "background");
    EXPECT_EQ(fold.at("held_out").at(0), "GLC_2");
    EXPECT_EQ(fold.at("counts").at("test"), 3);
}

TEST(Export, HoldOutLocation) {
    TempDir dir;
    const auto manifest = eleven_backgrounds();
    const auto result = export_split(manifest, hold_out_location(manifest, "Ticino"), dir.path(),
                                     ExportOptions{std::nullopt, false, false});
    EXPECT_EQ(result.backgrounds.at(Split::test), (std::set<std::string>{"GLC_5", "GLC_6", "GLC_7", "GLC_8"}));
    for (const auto& bg : result.backgrounds.at(Split::train))
        EXPECT_FALSE(result.backgrounds.at(Split::test).contains(bg));
}

TEST(Export, UnknownHoldOutIsRejected) {
    const auto manifest = eleven_backgrounds();
    EXPECT_THROW(hold_out_background(manifest, "GLC_99"), ValidationError);
    EXPECT_THROW(hold_out_location(manifest, "Bern"), ValidationError);
}

TEST(Export, DifficultyFilter) {
    TempDir dir;
    std::vector<LabelRecord> manifest;
    for (int i = 0; i < 10; ++i)
        manifest.push_back(labeled("GLC_1", "Lausanne", i, Difficulty::easy));
    for (int i = 10; i < 15; ++i)
        manifest.push_back(labeled("GLC_1", "Lausanne", i, Difficulty::hard));
    manifest.push_back(labeled("GLC_1", "Lausanne", 15));
    manifest.push_back(labeled("GLC_2", "Lausanne", 0, Difficulty::easy));

    SplitSpec spec = hold_out_background(manifest, "GLC_2");
    ExportOptions opts;
    opts.copy_images = false;
    opts.difficulties = std::set<Difficulty>{Difficulty::easy};
    const auto result = export_split(manifest, spec, dir.path(), opts);
    EXPECT_EQ(result.counts.at(Split::train), 10u);
}

TEST(Export, TrainOnlyFilterKeepsTestSplitWhole) {
    TempDir dir;
    std::vector<LabelRecord> manifest;
    for (int i = 0; i < 4; ++i)
        manifest.push_back(labeled("GLC_1", "Lausanne", i, i < 2 ? Difficulty::easy : Difficulty::hard));
    for (int i = 0; i < 4; ++i)
        manifest.push_back(labeled("GLC_2", "Lausanne", i, i < 2 ? Difficulty::easy : Difficulty::hard));
    ExportOptions opts;
    opts.copy_images = false;
    opts.difficulties = std::set<Difficulty>{Difficulty::easy};
    opts.filter_train_only = true;
    const auto result = export_split(manifest, hold_out_background(manifest, "GLC_2"), dir.path(), opts);
    EXPECT_EQ(result.counts.at(Split::train), 2u);
    EXPECT_EQ(result.counts.at(Split::test), 4u);
}

TEST(Export, OnlyLabeledStatusesAreExported) {
    TempDir dir;
    std::vector<LabelRecord> manifest = {
        labeled("GLC_1", "L", 0, std::nullopt, LabelStatus::auto_label),
        labeled("GLC_1", "L", 1, std::nullopt, LabelStatus::adjusted),
        labeled("GLC_1", "L", 2, std::nullopt, LabelStatus::manual),
        labeled("GLC_1", "L", 3, std::nullopt, LabelStatus::no_object),
        labeled("GLC_1", "L", 4, std::nullopt, LabelStatus::burn_in_excluded),
        labeled("GLC_2", "L", 0),
    };
    const auto result = export_split(manifest, hold_out_background(manifest, "GLC_2"), dir.path(),
                                     ExportOptions{std::nullopt, false, false});
    EXPECT_EQ(result.counts.at(Split::train), 3u);
    EXPECT_FALSE(std::filesystem::exists(dir / "train" / "labels" / "seq_GLC_1_000003.txt"));
}

TEST(Export, BackgroundInTwoSplitsIsRejected) {
    TempDir dir;
    // One background filmed from two locations that land in different splits.
    std::vector<LabelRecord> manifest = {labeled("GLC_1", "Lausanne", 0), labeled("GLC_1", "Ticino", 1),
                                         labeled("GLC_2", "Ticino", 0)};
    EXPECT_THROW(export_split(manifest, hold_out_location(manifest, "Ticino"), dir.path()), ValidationError);
    EXPECT_FALSE(std::filesystem::exists(dir / "fold.json"));

    SplitSpec conflicting;
    conflicting.by_background["GLC_1"] = Split::train;
    conflicting.by_location["Lausanne"] = Split::test;
    EXPECT_THROW(export_split({labeled("GLC_1", "Lausanne", 0)}, conflicting, dir.path()), ValidationError);
}

TEST(Export, UncoveredBackgroundIsRejected) {
    TempDir dir;
    SplitSpec spec;
    spec.by_background["GLC_1"] = Split::train;
    EXPECT_THROW(export_split({labeled("GLC_3", "L", 0)}, spec, dir.path()), ValidationError);
}

TEST(Export, RoundTripThroughImport) {
    TempDir dir;
    auto manifest = eleven_backgrounds();
    std::filesystem::create_directories(dir / "src");
    for (auto& r : manifest) {
        r.image_path = (dir / "src" / (r.frame_id.substr(0, r.frame_id.find(':')) + "_" +
                                       std::to_string(r.frame_index) + ".png"))
                           .string();
        std::ofstream(r.image_path) << "png";
    }
    const auto result = export_split(manifest, hold_out_background(manifest, "GLC_2"), dir / "out");
    EXPECT_EQ(result.missing_images, 0u);

    const auto back = import_export(dir / "out");
    std::map<std::string, LabelRecord> by_id;
    for (const auto& [split, records] : back)
        for (const auto& r : records)
            by_id[r.frame_id] = r;
    ASSERT_EQ(by_id.size(), manifest.size());
    for (const auto& r : manifest) {
        const auto& got = by_id.at(r.frame_id);
        EXPECT_EQ(got.bbox, r.bbox);
        EXPECT_EQ(got.background_id, r.background_id);
        EXPECT_TRUE(std::filesystem::exists(dir / "out" / got.image_path));
    }
    EXPECT_EQ(back.at(Split::test).size(), 3u);
}

TEST(Export, ImportDetectsTamperedLabel) {
    TempDir dir;
    const auto manifest = eleven_backgrounds();
    export_split(manifest, hold_out_background(manifest, "GLC_2"), dir.path(), ExportOptions{std::nullopt, false, false});
    std::ofstream(dir / "test" / "labels" / "seq_GLC_2_000001.txt") << "0 0.5 0.5 0.1 0.1\n";
    EXPECT_THROW(import_export(dir.path()), Error);
}

TEST(Export, MissingImagesAreCounted) {
    TempDir dir;
    auto manifest = eleven_backgrounds();
    manifest[0].image_path = "/nonexistent/frame.png";
    const auto result = export_split(manifest, hold_out_background(manifest, "GLC_2"), dir.path());
    EXPECT_EQ(result.missing_images, manifest.size());
}
