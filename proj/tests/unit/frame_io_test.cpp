#include <fstream>

#include <gtest/gtest.h>

#include "shuttle/errors.hpp"
#include "shuttle/frame_io.hpp"
#include "test_support.hpp"

using namespace shuttle;
using test_support::TempDir;

namespace {

void write_frames(const TempDir& dir, std::initializer_list<int> indices, int w = 8, int h = 6) {
    for (int i : indices) {
        Frame f = test_support::solid_frame(w, h, {std::uint8_t(i), 20, 30}, i);
        write_frame(dir.path() / frame_filename(i), f);
    }
}

}  // namespace

TEST(FrameIo, StreamsTenFramesInOrder) {
    TempDir dir;
    write_frames(dir, {0, 1, 2, 3, 4, 5, 6, 7, 8, 9});
    SequenceReader reader(dir.path());
    std::vector<std::int64_t> seen;
    while (auto f = reader.next()) {
        seen.push_back(f->meta().frame_index);
        EXPECT_EQ(f->at(0, 0).r, f->meta().frame_index);
    }
    EXPECT_EQ(seen, (std::vector<std::int64_t>{0, 1, 2, 3, 4, 5, 6, 7, 8, 9}));
    EXPECT_TRUE(reader.gaps().empty());
    EXPECT_TRUE(reader.warnings().empty());
}

TEST(FrameIo, EmptyDirectoryWarns) {
    TempDir dir;
    SequenceReader reader(dir.path());
    EXPECT_FALSE(reader.next().has_value());
    ASSERT_EQ(reader.warnings().size(), 1u);
    EXPECT_NE(reader.warnings()[0].find("no frames found"), std::string::npos);
}

TEST(FrameIo, ReportsGaps) {
    TempDir dir;
    write_frames(dir, {0, 2});
    SequenceReader reader(dir.path());
    EXPECT_EQ(reader.gaps(), std::vector<std::int64_t>{1});
    int n = 0;
    while (reader.next())
        ++n;
    EXPECT_EQ(n, 2);
}

TEST(FrameIo, IgnoresFilesWithOtherNames) {
    TempDir dir;
    write_frames(dir, {0});
    std::ofstream(dir / "notes.txt") << "x";
    std::ofstream(dir / "12.png") << "x";
    SequenceReader reader(dir.path());
    EXPECT_EQ(reader.size(), 1u);
}

TEST(FrameIo, DecodeErrorCarriesPathAndStreamContinues) {
    TempDir dir;
    write_frames(dir, {0, 2});
    std::ofstream(dir / "000001.png") << "not an image";
    SequenceReader reader(dir.path());
    ASSERT_TRUE(reader.next());
    try {
        reader.next();
        FAIL() << "expected FrameDecodeError";
    } catch (const FrameDecodeError& e) {
        EXPECT_EQ(e.path().filename(), "000001.png");
    }
    auto f = reader.next();
    ASSERT_TRUE(f);
    EXPECT_EQ(f->meta().frame_index, 2);
}

TEST(FrameIo, DimensionMismatchIsFatal) {
    TempDir dir;
    write_frames(dir, {0}, 8, 6);
    write_frames(dir, {1}, 9, 6);
    write_frames(dir, {2}, 8, 6);
    SequenceReader reader(dir.path());
    ASSERT_TRUE(reader.next());
    EXPECT_THROW(reader.next(), SequenceError);
    EXPECT_FALSE(reader.next().has_value());
}

TEST(FrameIo, MissingDirectoryThrows) {
    EXPECT_THROW(SequenceReader("/nonexistent/shuttle/dir"), SequenceError);
}

TEST(FrameIo, SidecarOverridesDefaults) {
    TempDir dir;
    write_frames(dir, {0});
    SequenceInfo info;
    info.sequence_id = "rally_7";
    info.fps = 30;
    info.location = "Ticino";
    info.background_id = "TI_1";
    write_sequence_info(dir / "sequence.json", info);
    SequenceReader reader(dir.path());
    EXPECT_EQ(reader.info().sequence_id, "rally_7");
    EXPECT_EQ(reader.info().location, "Ticino");
    auto f = reader.next();
    ASSERT_TRUE(f);
    EXPECT_EQ(f->meta().sequence_id, "rally_7");
    EXPECT_DOUBLE_EQ(f->meta().fps, 30.0);
}

TEST(FrameIo, SequenceIdDefaultsToDirectoryName) {
    TempDir dir;
    std::filesystem::create_directories(dir / "seq_a");
    SequenceReader reader(dir / "seq_a");
    EXPECT_EQ(reader.info().sequence_id, "seq_a");
}

TEST(FrameIo, FilenameParsing) {
    EXPECT_EQ(frame_index_from_filename("000123.png"), 123);
    EXPECT_EQ(frame_index_from_filename("000000.jpg"), 0);
    EXPECT_FALSE(frame_index_from_filename("123.png"));
    EXPECT_FALSE(frame_index_from_filename("000123.bmp"));
    EXPECT_FALSE(frame_index_from_filename("abcdef.png"));
    EXPECT_EQ(frame_filename(42), "000042.png");
}

TEST(FrameIo, TimestampFollowsFps) {
    FrameMeta m;
    m.frame_index = 90;
    EXPECT_DOUBLE_EQ(m.timestamp(), 1.5);
    EXPECT_EQ(m.width, 1920);
    EXPECT_EQ(m.height, 1200);
}

TEST(FrameIo, PngRoundTripIsLossless) {
    TempDir dir;
    Frame f = test_support::solid_frame(5, 4, {1, 2, 3});
    test_support::paint(f, 1, 1, 2, 2, {250, 128, 7});
    write_frame(dir / "000000.png", f);
    Frame g = read_frame(dir / "000000.png", {});
    EXPECT_TRUE(std::equal(f.pixels().begin(), f.pixels().end(), g.pixels().begin(), g.pixels().end()));
}

TEST(FrameIo, MaskRoundTrip) {
    TempDir dir;
    BinaryMask m(7, 5);
    m.set(3, 2);
    m.set(6, 4);
    write_mask(dir / "m.png", m);
    EXPECT_EQ(read_mask(dir / "m.png"), m);
}

TEST(FrameIo, FrameRejectsBadBuffer) {
    FrameMeta meta;
    meta.width = 4;
    meta.height = 4;
    EXPECT_THROW(Frame(meta, std::vector<std::uint8_t>(10)), Error);
    meta.width = 0;
    EXPECT_THROW(Frame(meta, {}), Error);
}
