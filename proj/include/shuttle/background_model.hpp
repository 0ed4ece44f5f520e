#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "shuttle/binary_mask.hpp"
#include "shuttle/errors.hpp"
#include "shuttle/frame.hpp"
#include "shuttle/parallel.hpp"

namespace shuttle {

struct GmmParams {
    int max_modes = 5;
    double learning_rate = 0.002;
    double match_distance = 3.0;    // in standard deviations
    double background_ratio = 0.9;
    double initial_variance = 225.0;
    double variance_min = 16.0;
    double variance_max = 1125.0;

    void validate() const {
        if (max_modes < 1 || max_modes > 16)
            throw ConfigError("gmm.max_modes must be in [1, 16]");
        if (!(learning_rate > 0 && learning_rate < 1))
            throw ConfigError("gmm.learning_rate must be in (0, 1)");
        if (!(match_distance > 0))
            throw ConfigError("gmm.match_distance must be positive");
        if (!(background_ratio > 0 && background_ratio < 1))
            throw ConfigError("gmm.background_ratio must be in (0, 1)");
        if (!(variance_min > 0 && variance_min <= initial_variance && initial_variance <= variance_max))
            throw ConfigError("gmm variances must satisfy 0 < variance_min <= initial_variance <= variance_max");
    }
};

template <typename Scalar>
struct GaussianMode {
    Scalar weight{};
    std::array<Scalar, 3> mean{};
    Scalar variance{};
};

/// Per-pixel adaptive mixture of isotropic Gaussians over RGB samples.
///
/// Each pixel keeps up to `max_modes` modes sorted by weight, descending.
/// A sample matches the first (highest-weight) mode whose squared distance is
/// within match_distance^2 * variance * 3; the matched mode is pulled toward
/// the sample, all other weights decay by (1 - alpha). An unmatched sample
/// replaces the lowest-weight mode (first one on ties) or is appended, then
/// weights are renormalized. A pixel is background when its matched mode is
/// inside the shortest weight-sorted prefix whose cumulative weight exceeds
/// background_ratio.
///
/// Storage is mode-major (one plane per mode slot) so pixels that only use
/// their first mode never touch the other planes. Pixels are independent, so
/// update() partitions rows across workers and yields the same result for any
/// worker count.
template <typename Scalar = float>
class BackgroundModel {
public:
    using Mode = GaussianMode<Scalar>;

    BackgroundModel() = default;

    BackgroundModel(int width, int height, GmmParams params) : width_(width), height_(height), params_(params) {
        params_.validate();
        if (width <= 0 || height <= 0)
            throw Error("background model dimensions must be positive");
        const std::size_t n = std::size_t(width) * height;
        counts_.assign(n, 0);
        planes_.resize(params_.max_modes);
        for (auto& p : planes_)
            for (auto& field : p.fields)
                field.assign(n, Scalar(0));
        alpha_ = Scalar(params_.learning_rate);
        decay_ = Scalar(1.0 - params_.learning_rate);
        match_threshold_ = Scalar(params_.match_distance * params_.match_distance * 3.0);
        background_ratio_ = Scalar(params_.background_ratio);
        initial_variance_ = Scalar(params_.initial_variance);
        variance_min_ = Scalar(params_.variance_min);
        variance_max_ = Scalar(params_.variance_max);
    }

    bool initialized() const noexcept { return width_ > 0; }
    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    const GmmParams& params() const noexcept { return params_; }
    std::int64_t frames_seen() const noexcept { return frames_seen_; }

    /// Feeds one frame and writes its raw foreground mask into `mask`.
    void update(const Frame& frame, ForegroundMask& mask, int workers = 1) {
        if (!initialized())
            throw Error("background model is not initialized");
        if (frame.width() != width_ || frame.height() != height_)
            throw Error("frame size does not match the background model");
        if (mask.width() != width_ || mask.height() != height_)
            mask = ForegroundMask(width_, height_);

        parallel_rows(height_, workers, [&](int begin, int end) {
            Planes view = plane_pointers();
            for (int y = begin; y < end; ++y) {
                const std::uint8_t* src = frame.row(y);
                std::uint8_t* out = mask.row(y);
                const std::size_t base = std::size_t(y) * width_;
                single_mode_row(base, src, out);
                for (int x = 0; x < width_; ++x)
                    if (out[x] == kPending)
                        out[x] = update_pixel(view, base + x, src + 3 * x) ? 1 : 0;
            }
        });
        ++frames_seen_;
    }

    ForegroundMask update(const Frame& frame, int workers = 1) {
        ForegroundMask mask(frame.width(), frame.height());
        update(frame, mask, workers);
        return mask;
    }

    /// Updates a single pixel with an explicit sample; returns true when foreground.
    /// Exposed for trace-level tests of the recurrence.
    bool update_pixel(int x, int y, std::array<std::uint8_t, 3> sample) {
        if (!initialized())
            throw Error("background model is not initialized");
        Planes view = plane_pointers();
        return update_pixel(view, std::size_t(y) * width_ + x, sample.data());
    }

    /// Current modes of one pixel, highest weight first.
    std::vector<Mode> modes(int x, int y) const {
        const std::size_t p = std::size_t(y) * width_ + x;
        std::vector<Mode> out(counts_[p]);
        for (int k = 0; k < counts_[p]; ++k) {
            const auto& f = planes_[k].fields;
            out[k] = {f[0][p], {f[1][p], f[2][p], f[3][p]}, f[4][p]};
        }
        return out;
    }

private:
    struct Plane {
        // weight, mean r, mean g, mean b, variance
        std::array<std::vector<Scalar>, 5> fields;
    };

    static constexpr int kMaxSlots = 16;
    struct Planes {
        std::array<Scalar*, kMaxSlots> w{}, m0{}, m1{}, m2{}, var{};
    };

    Planes plane_pointers() {
        Planes v;
        for (std::size_t k = 0; k < planes_.size() && k < kMaxSlots; ++k) {
            v.w[k] = planes_[k].fields[0].data();
            v.m0[k] = planes_[k].fields[1].data();
            v.m1[k] = planes_[k].fields[2].data();
            v.m2[k] = planes_[k].fields[3].data();
            v.var[k] = planes_[k].fields[4].data();
        }
        return v;
    }

    static void swap_slots(Planes& v, std::size_t p, int a, int b) {
        std::swap(v.w[a][p], v.w[b][p]);
        std::swap(v.m0[a][p], v.m0[b][p]);
        std::swap(v.m1[a][p], v.m1[b][p]);
        std::swap(v.m2[a][p], v.m2[b][p]);
        std::swap(v.var[a][p], v.var[b][p]);
    }

    static constexpr std::uint8_t kPending = 2;

    // Branch-free pass over one row that finishes every single-mode pixel
    // whose sample matches; the rest are marked kPending for update_pixel.
    // Arithmetic matches update_pixel exactly.
    void single_mode_row(std::size_t base, const std::uint8_t* src, std::uint8_t* out) {
        auto& f = planes_[0].fields;
        single_mode_kernel(width_, src, out, counts_.data() + base, f[0].data() + base, f[1].data() + base,
                           f[2].data() + base, f[3].data() + base, f[4].data() + base, alpha_, match_threshold_,
                           variance_min_, variance_max_);
    }

    [[gnu::noinline]] static void single_mode_kernel(int width, const std::uint8_t* __restrict src, std::uint8_t* __restrict out,
                                   const std::uint8_t* __restrict cnt, Scalar* __restrict w, Scalar* __restrict m0,
                                   Scalar* __restrict m1, Scalar* __restrict m2, Scalar* __restrict var,
                                   const Scalar alpha, const Scalar threshold, const Scalar vmin, const Scalar vmax) {
        for (int x = 0; x < width; ++x) {
            const Scalar e0 = Scalar(src[3 * x]) - m0[x];
            const Scalar e1 = Scalar(src[3 * x + 1]) - m1[x];
            const Scalar e2 = Scalar(src[3 * x + 2]) - m2[x];
            const Scalar e2sum = e0 * e0 + e1 * e1 + e2 * e2;
            const bool hit = (cnt[x] == 1) & (e2sum <= threshold * var[x]);
            const Scalar wn = w[x] + alpha * (Scalar(1) - w[x]);
            const Scalar rho = alpha / wn;
            Scalar vn = var[x] + rho * (e2sum / Scalar(3) - var[x]);
            vn = vn < vmin ? vmin : vn;
            vn = vn > vmax ? vmax : vn;
            w[x] = hit ? wn : w[x];
            m0[x] = hit ? m0[x] + rho * e0 : m0[x];
            m1[x] = hit ? m1[x] + rho * e1 : m1[x];
            m2[x] = hit ? m2[x] + rho * e2 : m2[x];
            var[x] = hit ? vn : var[x];
            out[x] = hit ? 0 : kPending;
        }
    }

    bool update_pixel(Planes& v, std::size_t p, const std::uint8_t* sample) {
        const Scalar x0 = sample[0], x1 = sample[1], x2 = sample[2];
        const int n = counts_[p];

        if (n == 1) {
            // Same arithmetic as the general path below, minus the bookkeeping
            // that a single mode makes trivial.
            const Scalar e0 = x0 - v.m0[0][p], e1 = x1 - v.m1[0][p], e2 = x2 - v.m2[0][p];
            const Scalar e2sum = e0 * e0 + e1 * e1 + e2 * e2;
            Scalar& var = v.var[0][p];
            if (e2sum <= match_threshold_ * var) {
                Scalar& w = v.w[0][p];
                w = w + alpha_ * (Scalar(1) - w);
                const Scalar rho = alpha_ / w;
                v.m0[0][p] += rho * e0;
                v.m1[0][p] += rho * e1;
                v.m2[0][p] += rho * e2;
                var = std::clamp(var + rho * (e2sum / Scalar(3) - var), variance_min_, variance_max_);
                return false;
            }
        }

        int matched = -1;
        Scalar d0{}, d1{}, d2{}, dist2{};
        for (int k = 0; k < n; ++k) {
            d0 = x0 - v.m0[k][p];
            d1 = x1 - v.m1[k][p];
            d2 = x2 - v.m2[k][p];
            dist2 = d0 * d0 + d1 * d1 + d2 * d2;
            if (dist2 <= match_threshold_ * v.var[k][p]) {
                matched = k;
                break;
            }
        }

        if (matched < 0) {
            int slot = n;
            if (n < params_.max_modes) {
                counts_[p] = std::uint8_t(n + 1);
            } else {
                slot = 0;
                for (int k = 1; k < n; ++k)
                    if (v.w[k][p] < v.w[slot][p])
                        slot = k;
            }
            v.w[slot][p] = alpha_;
            v.m0[slot][p] = x0;
            v.m1[slot][p] = x1;
            v.m2[slot][p] = x2;
            v.var[slot][p] = initial_variance_;

            const int count = counts_[p];
            Scalar sum{};
            for (int k = 0; k < count; ++k)
                sum += v.w[k][p];
            for (int k = 0; k < count; ++k)
                v.w[k][p] /= sum;
            // Stable insertion sort, weight descending.
            for (int k = 1; k < count; ++k)
                for (int j = k; j > 0 && v.w[j][p] > v.w[j - 1][p]; --j)
                    swap_slots(v, p, j, j - 1);
            return true;
        }

        for (int k = 0; k < n; ++k)
            if (k != matched)
                v.w[k][p] *= decay_;
        Scalar& w = v.w[matched][p];
        w = w + alpha_ * (Scalar(1) - w);
        const Scalar rho = alpha_ / w;
        v.m0[matched][p] += rho * d0;
        v.m1[matched][p] += rho * d1;
        v.m2[matched][p] += rho * d2;
        Scalar& var = v.var[matched][p];
        var = std::clamp(var + rho * (dist2 / Scalar(3) - var), variance_min_, variance_max_);

        if (n > 1) {
            // Exact arithmetic keeps the sum at 1; this removes rounding drift.
            Scalar sum{};
            for (int k = 0; k < n; ++k)
                sum += v.w[k][p];
            for (int k = 0; k < n; ++k)
                v.w[k][p] /= sum;
        }

        // Only the matched weight grew; the rest kept their relative order.
        int idx = matched;
        while (idx > 0 && v.w[idx][p] > v.w[idx - 1][p]) {
            swap_slots(v, p, idx, idx - 1);
            --idx;
        }

        Scalar before{};
        for (int k = 0; k < idx; ++k)
            before += v.w[k][p];
        return before > background_ratio_;
    }

    int width_ = 0;
    int height_ = 0;
    GmmParams params_;
    std::int64_t frames_seen_ = 0;
    std::vector<std::uint8_t> counts_;
    std::vector<Plane> planes_;

    Scalar alpha_{}, decay_{}, match_threshold_{}, background_ratio_{};
    Scalar initial_variance_{}, variance_min_{}, variance_max_{};
};

}  // namespace shuttle
