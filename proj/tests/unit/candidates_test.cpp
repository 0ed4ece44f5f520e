#include <random>

#include <gtest/gtest.h>

#include "oracles/flood_fill.hpp"
#include "oracles/morphology_reference.hpp"
#include "shuttle/candidates.hpp"
#include "shuttle/errors.hpp"
#include "shuttle/frame_io.hpp"
#include "test_support.hpp"

using namespace shuttle;

namespace {

Blob blob_at(double cx, double cy, int id = 1) {
    Blob b;
    b.id = id;
    b.area = 1;
    b.centroid = {cx, cy};
    b.bbox = {int(cx), int(cy), int(cx), int(cy)};
    return b;
}

PersonMask person_rect(int w, int h, int x0, int y0, int x1, int y1) {
    PersonMask p{BinaryMask(w, h), "test"};
    p.bits.fill_rect(x0, y0, x1, y1);
    return p;
}

}  // namespace

TEST(Components, DiagonalPixelsFormOneBlob) {
    BinaryMask m(4, 4);
    m.set(1, 1);
    m.set(2, 2);
    const auto blobs = connected_components(m);
    ASSERT_EQ(blobs.size(), 1u);
    EXPECT_EQ(blobs[0].area, 2);
    EXPECT_EQ(blobs[0].bbox, (PixelBox{1, 1, 2, 2}));
    EXPECT_DOUBLE_EQ(blobs[0].centroid.x, 1.5);
}

TEST(Components, EmptyMaskHasNoBlobs) {
    EXPECT_TRUE(connected_components(BinaryMask(5, 5)).empty());
}

TEST(Components, IdsFollowRasterOrder) {
    BinaryMask m(10, 6);
    m.fill_rect(6, 0, 7, 1);
    m.fill_rect(0, 3, 2, 5);
    const auto cm = label_components(m, 42);
    ASSERT_EQ(cm.blobs.size(), 2u);
    EXPECT_EQ(cm.blobs[0].id, 1);
    EXPECT_EQ(cm.blobs[0].bbox.x_min, 6);
    EXPECT_EQ(cm.blobs[1].area, 9);
    EXPECT_EQ(cm.blobs[1].frame_index, 42);
    EXPECT_EQ(cm.label_at(1, 4), 2);
    EXPECT_EQ(cm.label_at(9, 5), 0);
}

TEST(Components, UShapeIsOneComponent) {
    BinaryMask m(5, 4);
    m.fill_rect(0, 0, 0, 3);
    m.fill_rect(4, 0, 4, 3);
    m.fill_rect(0, 3, 4, 3);
    EXPECT_EQ(connected_components(m).size(), 1u);
}

TEST(Components, RandomMasksMatchFloodFill) {
    std::mt19937_64 rng(77);
    for (int trial = 0; trial < 100; ++trial) {
        const int w = 1 + int(rng() % 50), h = 1 + int(rng() % 50);
        const auto m = test_support::random_mask(w, h, 0.15 + 0.5 * double(rng() % 100) / 100, rng);
        const auto cm = label_components(m);
        const auto ref = oracle::flood_fill(std::vector<std::uint8_t>(m.data(), m.data() + m.size()), w, h);
        ASSERT_EQ(int(cm.blobs.size()), ref.count);
        ASSERT_TRUE(oracle::same_partition(std::vector<int>(cm.labels.begin(), cm.labels.end()), ref.label));
        for (const auto& b : cm.blobs) {
            std::int64_t area = 0;
            double sx = 0, sy = 0;
            PixelBox box;
            for (int y = 0; y < h; ++y)
                for (int x = 0; x < w; ++x)
                    if (cm.label_at(x, y) == b.id) {
                        ++area;
                        sx += x;
                        sy += y;
                        box.extend(x, y);
                    }
            ASSERT_EQ(b.area, area);
            ASSERT_EQ(b.bbox, box);
            ASSERT_NEAR(b.centroid.x, sx / double(area), 1e-9);
            ASSERT_NEAR(b.centroid.y, sy / double(area), 1e-9);
        }
    }
}

TEST(PersonFilter, BlobInsideMaskIsRemoved) {
    BinaryMask fg(50, 50);
    fg.fill_rect(20, 20, 22, 22);
    const auto person = person_rect(50, 50, 10, 10, 30, 30);
    const auto cm = label_components(fg);
    EXPECT_TRUE(remove_person_overlap(cm.blobs, cm, person, {}).empty());
}

TEST(PersonFilter, BlobTenPixelsAwayIsKept) {
    BinaryMask fg(60, 60);
    fg.fill_rect(40, 20, 42, 22);  // person ends at column 30
    const auto person = person_rect(60, 60, 10, 10, 30, 30);
    const auto cm = label_components(fg);
    EXPECT_EQ(remove_person_overlap(cm.blobs, cm, person, {}).size(), 1u);
}

TEST(PersonFilter, BlobThreePixelsAwayIsRemoved) {
    BinaryMask fg(60, 60);
    fg.fill_rect(33, 20, 35, 22);
    const auto person = person_rect(60, 60, 10, 10, 30, 30);
    const auto cm = label_components(fg);
    // Cross-check against a brute-force dilation of the person mask.
    oracle::Grid g{60, 60, std::vector<std::uint8_t>(person.bits.data(), person.bits.data() + person.bits.size())};
    const auto dilated = oracle::max_filter(g, 11, 11);
    ASSERT_EQ(dilated.at(33, 20), 1);
    EXPECT_TRUE(remove_person_overlap(cm.blobs, cm, person, {}).empty());
}

TEST(PersonFilter, DilationReachIsExact) {
    const auto person = person_rect(40, 10, 0, 0, 9, 9);
    for (int gap = 1; gap <= 8; ++gap) {
        BinaryMask fg(40, 10);
        fg.set(9 + gap, 5);
        const auto cm = label_components(fg);
        const auto kept = remove_person_overlap(cm.blobs, cm, person, {});
        EXPECT_EQ(kept.size(), gap > 5 ? 1u : 0u) << "gap " << gap;
    }
}

TEST(PersonFilter, MaskOverloadAgrees) {
    std::mt19937_64 rng(3);
    const auto fg = test_support::random_mask(40, 30, 0.05, rng);
    const auto person = person_rect(40, 30, 5, 5, 12, 25);
    const auto cm = label_components(fg);
    const auto a = remove_person_overlap(cm.blobs, cm, person, {});
    const auto b = remove_person_overlap(cm.blobs, fg, person, {});
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i)
        EXPECT_EQ(a[i].id, b[i].id);
}

TEST(PersonFilter, ShapeMismatchIsRejected) {
    BinaryMask fg(10, 10);
    fg.set(1, 1);
    const auto cm = label_components(fg);
    EXPECT_THROW(remove_person_overlap(cm.blobs, cm, person_rect(11, 10, 0, 0, 1, 1), {}), Error);
}

TEST(VerticalFilter, Examples) {
    SpatialFilterConfig cfg;
    cfg.y_threshold = 1000;
    EXPECT_TRUE(apply_vertical_filter({blob_at(500, 1100)}, cfg, 1200).empty());
    EXPECT_EQ(apply_vertical_filter({blob_at(500, 1000)}, cfg, 1200).size(), 1u);
    cfg.y_threshold = 1200;
    EXPECT_EQ(apply_vertical_filter({blob_at(5, 1199), blob_at(5, 0, 2)}, cfg, 1200).size(), 2u);
}

TEST(VerticalFilter, DefaultFractionOfHeight) {
    SpatialFilterConfig cfg;
    EXPECT_DOUBLE_EQ(cfg.threshold_row(1200), 996.0);
    EXPECT_EQ(apply_vertical_filter({blob_at(5, 996), blob_at(5, 997, 2)}, cfg, 1200).size(), 1u);
}

TEST(VerticalFilter, InvalidThreshold) {
    SpatialFilterConfig cfg;
    cfg.y_threshold = -1;
    EXPECT_THROW(cfg.validate(1200), ConfigError);
    cfg = {};
    cfg.y_threshold_fraction = 1.5;
    EXPECT_THROW(cfg.validate(), ConfigError);
    cfg = {};
    cfg.person_mask_dilation = -2;
    EXPECT_THROW(cfg.validate(), ConfigError);
}

TEST(PersonMasks, FileProviderReadsAndMisses) {
    test_support::TempDir dir;
    BinaryMask m(8, 8);
    m.fill_rect(2, 2, 4, 4);
    write_mask(dir / "000003.png", m);
    FilePersonMaskProvider provider(dir.path());
    FrameMeta meta;
    meta.frame_index = 3;
    auto got = provider.mask_for(meta);
    ASSERT_TRUE(got);
    EXPECT_EQ(got->bits, m);
    meta.frame_index = 4;
    EXPECT_FALSE(provider.mask_for(meta));
}
