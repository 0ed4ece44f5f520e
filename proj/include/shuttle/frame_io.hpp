#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "shuttle/binary_mask.hpp"
#include "shuttle/frame.hpp"

namespace shuttle {

/// Contents of the optional `sequence.json` sidecar next to the frames.
struct SequenceInfo {
    std::string sequence_id;
    double fps = 60.0;
    int width = 0;  // 0 = take from the first decoded frame
    int height = 0;
    std::string location;
    std::string background_id;
};

SequenceInfo read_sequence_info(const std::filesystem::path& file);
void write_sequence_info(const std::filesystem::path& file, const SequenceInfo& info);

/// Parses "000123.png" style names; nullopt for anything else.
std::optional<std::int64_t> frame_index_from_filename(const std::string& name);
std::string frame_filename(std::int64_t index, const std::string& extension = ".png");

/// Something that hands out frames of one sequence in increasing index order.
class FrameSource {
public:
    virtual ~FrameSource() = default;
    virtual const SequenceInfo& info() const = 0;
    /// Next frame, or nullopt at end of sequence.
    virtual std::optional<Frame> next() = 0;
    /// Path of the image file the last frame came from (empty for in-memory sources).
    virtual std::filesystem::path last_path() const { return {}; }
};

/// Streams the frame files of one directory.
///
/// Files must be named with a zero-padded 6-digit index plus .png/.jpg/.jpeg.
/// Missing indices are reported through gaps(); the stream carries on with
/// the true index so downstream timing stays correct. A file that fails to
/// decode throws FrameDecodeError from next() and is skipped on the following
/// call. A frame whose size differs from the sequence throws SequenceError and
/// ends the stream.
class SequenceReader final : public FrameSource {
public:
    explicit SequenceReader(std::filesystem::path directory, FrameMeta defaults = {});

    const SequenceInfo& info() const override { return info_; }
    std::optional<Frame> next() override;
    std::filesystem::path last_path() const override { return last_path_; }

    std::size_t size() const { return files_.size(); }
    const std::vector<std::int64_t>& gaps() const { return gaps_; }
    const std::vector<std::string>& warnings() const { return warnings_; }
    const std::vector<std::pair<std::int64_t, std::filesystem::path>>& files() const { return files_; }

private:
    std::filesystem::path directory_;
    FrameMeta defaults_;
    SequenceInfo info_;
    std::vector<std::pair<std::int64_t, std::filesystem::path>> files_;
    std::vector<std::int64_t> gaps_;
    std::vector<std::string> warnings_;
    std::size_t cursor_ = 0;
    bool failed_ = false;
    std::filesystem::path last_path_;
};

/// Decodes one image file to RGB; grayscale is expanded to three channels.
Frame read_frame(const std::filesystem::path& file, FrameMeta meta);
/// Writes an RGB frame; format follows the extension (PNG is lossless).
void write_frame(const std::filesystem::path& file, const Frame& frame);
/// Encodes a frame as PNG bytes.
std::vector<std::uint8_t> encode_png(const Frame& frame);
/// Re-encodes any readable image file as PNG bytes.
std::vector<std::uint8_t> image_file_as_png(const std::filesystem::path& file);

/// 8-bit mask files: nonzero = set on read, 255 on write.
BinaryMask read_mask(const std::filesystem::path& file);
void write_mask(const std::filesystem::path& file, const BinaryMask& mask);

}  // namespace shuttle
