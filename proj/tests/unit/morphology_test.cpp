#include <random>

#include <gtest/gtest.h>

#include "oracles/morphology_reference.hpp"
#include "shuttle/errors.hpp"
#include "shuttle/morphology.hpp"
#include "test_support.hpp"

using namespace shuttle;

namespace {

oracle::Grid to_grid(const BinaryMask& m) {
    return {m.width(), m.height(), std::vector<std::uint8_t>(m.data(), m.data() + m.size())};
}

bool equals(const BinaryMask& m, const oracle::Grid& g) {
    return std::equal(m.data(), m.data() + m.size(), g.v.begin(), g.v.end());
}

}  // namespace

TEST(Morphology, OpeningRemovesIsolatedSpeck) {
    BinaryMask m(9, 9);
    m.set(4, 4);
    EXPECT_EQ(refine(m, {}).count(), 0u);
}

TEST(Morphology, ClosingFillsOnePixelHole) {
    BinaryMask m(15, 15);
    m.fill_rect(3, 3, 11, 11);
    m.set(7, 7, false);
    BinaryMask expected(15, 15);
    expected.fill_rect(3, 3, 11, 11);
    EXPECT_EQ(refine(m, {}), expected);
}

TEST(Morphology, OutsideCountsAsBackground) {
    BinaryMask full(6, 5);
    full.fill_rect(0, 0, 5, 4);
    const auto e = erode(full, 3, 3);
    EXPECT_EQ(e.count(), 4u * 3u);
    EXPECT_FALSE(e.at(0, 2));
    EXPECT_TRUE(e.at(1, 1));
    // Dilation never invents pixels from outside.
    BinaryMask empty(6, 5);
    EXPECT_EQ(dilate(empty, 5, 5).count(), 0u);
}

TEST(Morphology, ElementLargerThanImage) {
    BinaryMask m(3, 3);
    m.fill_rect(0, 0, 2, 2);
    EXPECT_EQ(erode(m, 5, 5).count(), 0u);
    BinaryMask dot(3, 3);
    dot.set(0, 0);
    EXPECT_EQ(dilate(dot, 7, 7).count(), 9u);
}

TEST(Morphology, RandomMasksMatchBruteForce) {
    std::mt19937_64 rng(101);
    const int shapes[][2] = {{3, 3}, {1, 3}, {5, 3}, {1, 1}, {7, 5}};
    for (int trial = 0; trial < 60; ++trial) {
        const int w = 1 + int(rng() % 40), h = 1 + int(rng() % 40);
        const auto m = test_support::random_mask(w, h, 0.2 + 0.6 * double(rng() % 100) / 100, rng);
        const auto& shape = shapes[trial % 5];
        MorphConfig cfg{shape[0], shape[1], int(rng() % 3), int(rng() % 3)};
        SCOPED_TRACE(std::to_string(w) + "x" + std::to_string(h));
        EXPECT_TRUE(equals(erode(m, shape[0], shape[1]), oracle::min_filter(to_grid(m), shape[0], shape[1])));
        EXPECT_TRUE(equals(dilate(m, shape[0], shape[1]), oracle::max_filter(to_grid(m), shape[0], shape[1])));
        EXPECT_TRUE(equals(refine(m, cfg, 1 + trial % 4),
                           oracle::open_close(to_grid(m), shape[0], shape[1], cfg.open_iterations,
                                              cfg.close_iterations)));
    }
}

TEST(Morphology, RefineIsIdempotentOnLargeShapes) {
    BinaryMask m(60, 40);
    m.fill_rect(5, 5, 20, 18);
    m.fill_rect(30, 10, 50, 30);
    m.fill_rect(40, 31, 44, 36);
    const auto once = refine(m, {});
    EXPECT_EQ(refine(once, {}), once);
    EXPECT_EQ(once, m);
}

TEST(Morphology, WorkerCountDoesNotChangeResult) {
    std::mt19937_64 rng(4);
    const auto m = test_support::random_mask(97, 61, 0.5, rng);
    const auto a = refine(m, {}, 1);
    EXPECT_EQ(refine(m, {}, 4), a);
    EXPECT_EQ(refine(m, {}, 16), a);
}

TEST(Morphology, InvalidElementRejected) {
    BinaryMask m(4, 4);
    EXPECT_THROW(erode(m, 2, 3), ConfigError);
    EXPECT_THROW(dilate(m, 3, 0), ConfigError);
    MorphConfig cfg;
    cfg.open_iterations = -1;
    EXPECT_THROW(refine(m, cfg), ConfigError);
    cfg = {};
    cfg.element_width = 4;
    EXPECT_THROW(cfg.validate(), ConfigError);
}

TEST(Morphology, ZeroIterationsIsIdentity) {
    std::mt19937_64 rng(8);
    const auto m = test_support::random_mask(20, 20, 0.5, rng);
    EXPECT_EQ(refine(m, {3, 3, 0, 0}), m);
}
