#include "shuttle/synthetic.hpp"

#include <cmath>
#include <random>

namespace fs = std::filesystem;

namespace shuttle {

namespace {

std::uint8_t clamp_u8(double v) { return static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L)); }

void paint(Frame& frame, int x, int y, Rgb c) {
    auto* p = frame.row(y) + 3 * x;
    p[0] = c.r;
    p[1] = c.g;
    p[2] = c.b;
}

bool in_disc(int x, int y, PointD c, double r) {
    const double dx = x + 0.5 - c.x;
    const double dy = y + 0.5 - c.y;
    return dx * dx + dy * dy <= r * r;
}

}  // namespace

void SyntheticScenario::validate() const {
    if (width <= 0 || height <= 0 || fps <= 0)
        throw Error("scenario dimensions and fps must be positive");
    if (frame_count < 0 || object_trajectory.size() != std::size_t(frame_count))
        throw Error("object trajectory must have one point per frame");
    if (!person_regions.empty() && person_regions.size() != std::size_t(frame_count))
        throw Error("person regions must be empty or have one box per frame");
    if (object_radius <= 0)
        throw Error("object radius must be positive");
    if (noise_sigma < 0)
        throw Error("noise sigma must be non-negative");
    for (std::size_t i = 0; i < object_trajectory.size(); ++i) {
        const auto& p = object_trajectory[i];
        if (p.x - object_radius < 0 || p.y - object_radius < 0 || p.x + object_radius > width ||
            p.y + object_radius > height)
            throw Error("trajectory point " + std::to_string(i) + " leaves the frame");
    }
    for (std::size_t i = 0; i < person_regions.size(); ++i) {
        const auto& r = person_regions[i];
        if (r.empty())
            continue;
        if (r.x_min < 0 || r.y_min < 0 || r.x_max >= width || r.y_max >= height)
            throw Error("person region " + std::to_string(i) + " leaves the frame");
    }
}

PixelBox disc_extent(PointD center, double radius, int width, int height) {
    PixelBox box;
    const int x0 = std::max(0, int(std::floor(center.x - radius)) - 1);
    const int x1 = std::min(width - 1, int(std::ceil(center.x + radius)) + 1);
    const int y0 = std::max(0, int(std::floor(center.y - radius)) - 1);
    const int y1 = std::min(height - 1, int(std::ceil(center.y + radius)) + 1);
    for (int y = y0; y <= y1; ++y)
        for (int x = x0; x <= x1; ++x)
            if (in_disc(x, y, center, radius))
                box.extend(x, y);
    return box;
}

Frame render_background(const SyntheticScenario& s) {
    FrameMeta meta{s.sequence_id, 0, s.width, s.height, s.fps};
    Frame frame(meta, std::vector<std::uint8_t>(std::size_t(s.width) * s.height * 3));
    const auto& bg = s.background;
    // The static texture has its own fixed stream so it never depends on the sequence seed.
    std::mt19937_64 texture_rng(0x5eed7e47u);
    std::uniform_int_distribution<int> texture(-bg.noise_amplitude, bg.noise_amplitude);
    for (int y = 0; y < s.height; ++y) {
        for (int x = 0; x < s.width; ++x) {
            switch (bg.kind) {
                case BackgroundTexture::Kind::flat:
                    paint(frame, x, y, bg.color_a);
                    break;
                case BackgroundTexture::Kind::checkerboard:
                    paint(frame, x, y, ((x / bg.cell + y / bg.cell) % 2) ? bg.color_b : bg.color_a);
                    break;
                case BackgroundTexture::Kind::noise: {
                    const int d = texture(texture_rng);
                    paint(frame, x, y,
                          {clamp_u8(bg.color_a.r + d), clamp_u8(bg.color_a.g + d), clamp_u8(bg.color_a.b + d)});
                    break;
                }
            }
        }
    }
    return frame;
}

SyntheticSequence synthesize_sequence(const SyntheticScenario& s, std::uint64_t seed) {
    s.validate();
    SyntheticSequence out;
    out.info = {s.sequence_id, s.fps, s.width, s.height, "synthetic", s.sequence_id};
    out.frames.reserve(s.frame_count);

    const Frame background = render_background(s);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, s.noise_sigma > 0 ? s.noise_sigma : 1.0);

    for (int i = 0; i < s.frame_count; ++i) {
        Frame frame = background;
        frame.meta().frame_index = i;

        PersonMask person{BinaryMask(s.width, s.height), "synthetic"};
        if (!s.person_regions.empty() && !s.person_regions[i].empty()) {
            const auto& r = s.person_regions[i];
            person.bits.fill_rect(r.x_min, r.y_min, r.x_max, r.y_max);
            for (int y = r.y_min; y <= r.y_max; ++y)
                for (int x = r.x_min; x <= r.x_max; ++x)
                    paint(frame, x, y, s.person_color);
        }

        const PointD c = s.object_trajectory[i];
        const PixelBox extent = disc_extent(c, s.object_radius, s.width, s.height);
        for (int y = extent.y_min; y <= extent.y_max; ++y)
            for (int x = extent.x_min; x <= extent.x_max; ++x)
                if (in_disc(x, y, c, s.object_radius))
                    paint(frame, x, y, s.object_color);

        if (s.noise_sigma > 0) {
            for (auto& v : frame.pixels())
                v = clamp_u8(v + noise(rng));
        }

        out.frames.push_back(std::move(frame));
        out.ground_truth.push_back(extent.to_box());
        out.person_masks.push_back(std::move(person));
    }
    return out;
}

std::vector<PointD> parabola_trajectory(PointD start, PointD end, double apex_rise, int frames) {
    std::vector<PointD> path;
    path.reserve(frames);
    for (int i = 0; i < frames; ++i) {
        const double t = frames > 1 ? double(i) / (frames - 1) : 0.0;
        path.push_back({start.x + (end.x - start.x) * t,
                        start.y + (end.y - start.y) * t - 4.0 * apex_rise * t * (1.0 - t)});
    }
    return path;
}

std::vector<PixelBox> sliding_rectangle(PointD from, PointD to, int w, int h, int frames) {
    std::vector<PixelBox> boxes;
    boxes.reserve(frames);
    for (int i = 0; i < frames; ++i) {
        const double t = frames > 1 ? double(i) / (frames - 1) : 0.0;
        const int x = int(std::lround(from.x + (to.x - from.x) * t));
        const int y = int(std::lround(from.y + (to.y - from.y) * t));
        boxes.push_back({x, y, x + w - 1, y + h - 1});
    }
    return boxes;
}

SyntheticScenario reference_scenario(int frame_count) {
    SyntheticScenario s;
    s.sequence_id = "synthetic_rally";
    s.width = 640;
    s.height = 400;
    s.background.kind = BackgroundTexture::Kind::checkerboard;
    s.background.color_a = {70, 110, 70};
    s.background.color_b = {120, 150, 110};
    s.background.cell = 32;
    s.object_radius = 6.0;
    s.object_trajectory = parabola_trajectory({40, 300}, {600, 260}, 220, frame_count);
    s.person_regions = sliding_rectangle({80, 250}, {520, 250}, 60, 140, frame_count);
    s.noise_sigma = 2.0;
    s.frame_count = frame_count;
    return s;
}

void write_synthetic_sequence(const fs::path& directory, const SyntheticSequence& seq) {
    fs::create_directories(directory / "person_masks");
    write_sequence_info(directory / "sequence.json", seq.info);
    for (std::size_t i = 0; i < seq.frames.size(); ++i) {
        const auto name = frame_filename(seq.frames[i].meta().frame_index);
        write_frame(directory / name, seq.frames[i]);
        write_mask(directory / "person_masks" / name, seq.person_masks[i].bits);
    }
}

}  // namespace shuttle
