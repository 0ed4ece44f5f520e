#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "oracles/gmm_reference.hpp"
#include "shuttle/background_model.hpp"
#include "test_support.hpp"

using namespace shuttle;
using test_support::solid_frame;

namespace {

oracle::RefParams to_ref(const GmmParams& p) {
    return {p.max_modes, p.learning_rate, p.match_distance, p.background_ratio,
            p.initial_variance, p.variance_min, p.variance_max};
}

// Feeds one pixel and compares every step against the scalar reference.
void expect_trace_matches(const GmmParams& params, const std::vector<std::array<std::uint8_t, 3>>& samples,
                          double tolerance) {
    BackgroundModel<double> model(1, 1, params);
    oracle::RefPixel ref;
    const auto rp = to_ref(params);
    for (std::size_t t = 0; t < samples.size(); ++t) {
        const auto& s = samples[t];
        const bool fg = model.update_pixel(0, 0, s);
        const bool ref_fg = ref.step({double(s[0]), double(s[1]), double(s[2])}, rp);
        ASSERT_EQ(fg, ref_fg) << "step " << t;
        const auto modes = model.modes(0, 0);
        ASSERT_EQ(modes.size(), ref.modes.size()) << "step " << t;
        for (std::size_t k = 0; k < modes.size(); ++k) {
            ASSERT_NEAR(modes[k].weight, ref.modes[k].weight, tolerance) << "step " << t << " mode " << k;
            ASSERT_NEAR(modes[k].variance, ref.modes[k].variance, tolerance) << "step " << t << " mode " << k;
            for (int c = 0; c < 3; ++c)
                ASSERT_NEAR(modes[k].mean[c], ref.modes[k].mean[c], tolerance) << "step " << t << " mode " << k;
        }
    }
}

std::vector<std::array<std::uint8_t, 3>> repeat(std::array<std::uint8_t, 3> v, int n) {
    return std::vector<std::array<std::uint8_t, 3>>(n, v);
}

template <typename Scalar>
void expect_invariants(const BackgroundModel<Scalar>& m) {
    const auto& p = m.params();
    for (int y = 0; y < m.height(); ++y)
        for (int x = 0; x < m.width(); ++x) {
            const auto modes = m.modes(x, y);
            ASSERT_LE(int(modes.size()), p.max_modes);
            double sum = 0;
            for (std::size_t k = 0; k < modes.size(); ++k) {
                sum += modes[k].weight;
                ASSERT_GE(modes[k].weight, 0);
                ASSERT_GE(modes[k].variance, Scalar(p.variance_min));
                ASSERT_LE(modes[k].variance, Scalar(p.variance_max));
                if (k > 0)
                    ASSERT_GE(modes[k - 1].weight, modes[k].weight);
            }
            if (!modes.empty())
                ASSERT_NEAR(sum, 1.0, 1e-6) << x << "," << y;
        }
}

Frame noisy_frame(int w, int h, std::mt19937_64& rng, double sigma, std::int64_t index) {
    Frame f = solid_frame(w, h, {90, 120, 60}, index);
    std::normal_distribution<double> noise(0, sigma);
    for (auto& v : f.pixels())
        v = std::uint8_t(std::clamp(std::lround(v + noise(rng)), 0L, 255L));
    return f;
}

}  // namespace

TEST(BackgroundModel, ConstantVideoIsAllBackground) {
    BackgroundModel<> m(32, 24, {});
    ForegroundMask mask;
    const Frame f = solid_frame(32, 24, {50, 50, 50});
    for (int i = 0; i < 200; ++i)
        m.update(f, mask);
    m.update(f, mask);
    EXPECT_EQ(mask.count(), 0u);
    EXPECT_EQ(m.frames_seen(), 201);
}

TEST(BackgroundModel, InjectedPatchIsExactlyForeground) {
    BackgroundModel<> m(32, 24, {});
    ForegroundMask mask;
    const Frame f = solid_frame(32, 24, {50, 50, 50});
    for (int i = 0; i < 200; ++i)
        m.update(f, mask);
    Frame patch = f;
    test_support::paint(patch, 10, 5, 19, 14, {200, 200, 200});
    m.update(patch, mask);
    EXPECT_EQ(mask.count(), 100u);
    for (int y = 5; y <= 14; ++y)
        for (int x = 10; x <= 19; ++x)
            EXPECT_TRUE(mask.at(x, y));
}

TEST(BackgroundModel, FirstFrameIsForeground) {
    BackgroundModel<> m(4, 4, {});
    const auto mask = m.update(solid_frame(4, 4, {10, 10, 10}));
    EXPECT_EQ(mask.count(), 16u);
    const auto modes = m.modes(0, 0);
    ASSERT_EQ(modes.size(), 1u);
    EXPECT_FLOAT_EQ(modes[0].weight, 1.0f);
    EXPECT_FLOAT_EQ(modes[0].variance, 225.0f);
}

TEST(BackgroundModel, ScriptedTraceMatchesReference) {
    GmmParams p;
    p.learning_rate = 0.01;
    auto samples = repeat({50, 50, 50}, 100);
    for (int i = 0; i < 3; ++i)
        samples.push_back({200, 200, 200});
    expect_trace_matches(p, samples, 1e-9);
}

TEST(BackgroundModel, ReplacementTraceMatchesReference) {
    GmmParams p;
    p.learning_rate = 0.05;
    p.max_modes = 2;
    std::vector<std::array<std::uint8_t, 3>> samples;
    for (int i = 0; i < 30; ++i)
        samples.push_back({std::uint8_t(40 + (i % 3)), 40, 40});
    for (auto v : {200, 120, 10, 200, 120, 10, 41, 41, 250, 0})
        samples.push_back({std::uint8_t(v), std::uint8_t(v), std::uint8_t(255 - v)});
    expect_trace_matches(p, samples, 1e-9);
}

TEST(BackgroundModel, RandomTracesMatchReference) {
    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 50; ++trial) {
        GmmParams p;
        p.max_modes = 1 + int(rng() % 5);
        p.learning_rate = std::uniform_real_distribution<double>(0.005, 0.3)(rng);
        p.background_ratio = std::uniform_real_distribution<double>(0.3, 0.95)(rng);
        std::vector<std::array<std::uint8_t, 3>> samples;
        std::array<std::uint8_t, 3> levels[3] = {{30, 30, 30}, {100, 140, 90}, {220, 10, 60}};
        for (int t = 0; t < 80; ++t) {
            auto base = levels[rng() % 3];
            for (auto& c : base)
                c = std::uint8_t(std::clamp<int>(c + int(rng() % 9) - 4, 0, 255));
            samples.push_back(base);
        }
        SCOPED_TRACE(trial);
        expect_trace_matches(p, samples, 1e-9);
    }
}

TEST(BackgroundModel, FloatStaysCloseToDoubleReference) {
    GmmParams p;
    p.learning_rate = 0.01;
    BackgroundModel<float> m(1, 1, p);
    oracle::RefPixel ref;
    const auto rp = to_ref(p);
    std::mt19937_64 rng(3);
    for (int t = 0; t < 500; ++t) {
        const std::uint8_t v = std::uint8_t(60 + rng() % 5);
        EXPECT_EQ(m.update_pixel(0, 0, {v, v, v}), ref.step({double(v), double(v), double(v)}, rp));
    }
    const auto modes = m.modes(0, 0);
    ASSERT_EQ(modes.size(), ref.modes.size());
    EXPECT_NEAR(modes[0].mean[0], ref.modes[0].mean[0], 1e-3);
    EXPECT_NEAR(modes[0].variance, ref.modes[0].variance, 1e-3);
}

TEST(BackgroundModel, InvariantsHoldOnNoisyInput) {
    GmmParams p;
    p.max_modes = 3;
    p.learning_rate = 0.05;
    BackgroundModel<> m(24, 16, p);
    std::mt19937_64 rng(9);
    ForegroundMask mask;
    for (int i = 0; i < 60; ++i) {
        Frame f = noisy_frame(24, 16, rng, i % 7 == 0 ? 60.0 : 3.0, i);
        m.update(f, mask);
        expect_invariants(m);
    }
}

TEST(BackgroundModel, WorkerCountDoesNotChangeResults) {
    std::mt19937_64 rng(21);
    std::vector<Frame> frames;
    for (int i = 0; i < 30; ++i)
        frames.push_back(noisy_frame(40, 37, rng, i % 5 == 0 ? 50.0 : 4.0, i));
    BackgroundModel<> a(40, 37, {}), b(40, 37, {}), c(40, 37, {});
    for (const auto& f : frames) {
        const auto ma = a.update(f, 1);
        const auto mb = b.update(f, 3);
        const auto mc = c.update(f, 8);
        ASSERT_EQ(ma, mb);
        ASSERT_EQ(ma, mc);
    }
    for (int y = 0; y < 37; ++y)
        for (int x = 0; x < 40; ++x) {
            const auto ma = a.modes(x, y), mc = c.modes(x, y);
            ASSERT_EQ(ma.size(), mc.size());
            for (std::size_t k = 0; k < ma.size(); ++k) {
                ASSERT_EQ(ma[k].weight, mc[k].weight);
                ASSERT_EQ(ma[k].mean, mc[k].mean);
                ASSERT_EQ(ma[k].variance, mc[k].variance);
            }
        }
}

TEST(BackgroundModel, RowPassAgreesWithPerPixelPath) {
    // update() takes a vectorized shortcut for single-mode pixels; update_pixel does not.
    std::mt19937_64 rng(5);
    BackgroundModel<> rows(16, 8, {}), pixels(16, 8, {});
    for (int i = 0; i < 40; ++i) {
        Frame f = noisy_frame(16, 8, rng, i % 9 == 0 ? 70.0 : 2.0, i);
        const auto mask = rows.update(f);
        for (int y = 0; y < 8; ++y)
            for (int x = 0; x < 16; ++x) {
                const Rgb c = f.at(x, y);
                ASSERT_EQ(pixels.update_pixel(x, y, {c.r, c.g, c.b}), mask.at(x, y));
            }
    }
    for (int y = 0; y < 8; ++y)
        for (int x = 0; x < 16; ++x) {
            const auto a = rows.modes(x, y), b = pixels.modes(x, y);
            ASSERT_EQ(a.size(), b.size());
            for (std::size_t k = 0; k < a.size(); ++k) {
                ASSERT_EQ(a[k].weight, b[k].weight);
                ASSERT_EQ(a[k].mean, b[k].mean);
                ASSERT_EQ(a[k].variance, b[k].variance);
            }
        }
}

TEST(BackgroundModel, ErrorsAreFatal) {
    BackgroundModel<> uninitialized;
    EXPECT_FALSE(uninitialized.initialized());
    EXPECT_THROW(uninitialized.update(solid_frame(4, 4, {})), Error);
    BackgroundModel<> m(4, 4, {});
    EXPECT_THROW(m.update(solid_frame(5, 4, {})), Error);
    EXPECT_THROW(BackgroundModel<>(0, 4, {}), Error);
}

TEST(BackgroundModel, ParamValidation) {
    GmmParams p;
    EXPECT_NO_THROW(p.validate());
    p.max_modes = 0;
    EXPECT_THROW(p.validate(), ConfigError);
    p = {};
    p.max_modes = 17;
    EXPECT_THROW(p.validate(), ConfigError);
    p = {};
    p.learning_rate = 0;
    EXPECT_THROW(p.validate(), ConfigError);
    p = {};
    p.background_ratio = 1.0;
    EXPECT_THROW(p.validate(), ConfigError);
    p = {};
    p.variance_min = 300;
    EXPECT_THROW(p.validate(), ConfigError);
}
