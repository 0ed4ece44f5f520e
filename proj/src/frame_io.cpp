#include "shuttle/frame_io.hpp"

#include <algorithm>
#include <fstream>
#include <regex>

#include <json.hpp>
#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace shuttle {

namespace {

bool is_frame_extension(std::string ext) {
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    return ext == ".png" || ext == ".jpg" || ext == ".jpeg";
}

cv::Mat to_bgr_mat(const Frame& frame) {
    cv::Mat bgr(frame.height(), frame.width(), CV_8UC3);
    for (int y = 0; y < frame.height(); ++y) {
        const auto* src = frame.row(y);
        auto* dst = bgr.ptr<std::uint8_t>(y);
        for (int x = 0; x < frame.width(); ++x) {
            dst[3 * x + 0] = src[3 * x + 2];
            dst[3 * x + 1] = src[3 * x + 1];
            dst[3 * x + 2] = src[3 * x + 0];
        }
    }
    return bgr;
}

}  // namespace

SequenceInfo read_sequence_info(const fs::path& file) {
    std::ifstream in(file);
    if (!in)
        throw SequenceError("cannot open " + file.string());
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw SequenceError("malformed " + file.string() + ": " + e.what());
    }
    SequenceInfo info;
    info.sequence_id = j.value("sequence_id", "");
    info.fps = j.value("fps", 60.0);
    info.width = j.value("width", 0);
    info.height = j.value("height", 0);
    info.location = j.value("location", "");
    info.background_id = j.value("background_id", "");
    if (info.fps <= 0)
        throw SequenceError("fps must be positive in " + file.string());
    return info;
}

void write_sequence_info(const fs::path& file, const SequenceInfo& info) {
    json j = {{"sequence_id", info.sequence_id}, {"fps", info.fps},
              {"width", info.width},             {"height", info.height},
              {"location", info.location},       {"background_id", info.background_id}};
    std::ofstream out(file);
    out << j.dump(2) << '\n';
    if (!out)
        throw Error("cannot write " + file.string());
}

std::optional<std::int64_t> frame_index_from_filename(const std::string& name) {
    static const std::regex pattern(R"(^(\d{6})(\.[A-Za-z]+)$)");
    std::smatch m;
    if (!std::regex_match(name, m, pattern) || !is_frame_extension(m[2].str()))
        return std::nullopt;
    return std::stoll(m[1].str());
}

std::string frame_filename(std::int64_t index, const std::string& extension) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%06lld", static_cast<long long>(index));
    return buf + extension;
}

SequenceReader::SequenceReader(fs::path directory, FrameMeta defaults)
    : directory_(std::move(directory)), defaults_(std::move(defaults)) {
    if (!fs::is_directory(directory_))
        throw SequenceError("not a directory: " + directory_.string());

    info_.fps = defaults_.fps;
    info_.sequence_id = defaults_.sequence_id;
    if (fs::exists(directory_ / "sequence.json"))
        info_ = read_sequence_info(directory_ / "sequence.json");
    if (info_.sequence_id.empty())
        info_.sequence_id = directory_.filename().string();

    for (const auto& entry : fs::directory_iterator(directory_)) {
        if (!entry.is_regular_file())
            continue;
        if (auto idx = frame_index_from_filename(entry.path().filename().string()))
            files_.emplace_back(*idx, entry.path());
    }
    std::sort(files_.begin(), files_.end());
    for (std::size_t i = 1; i < files_.size(); ++i) {
        if (files_[i].first == files_[i - 1].first)
            throw SequenceError("duplicate frame index " + std::to_string(files_[i].first) + " in " +
                                directory_.string());
        for (auto missing = files_[i - 1].first + 1; missing < files_[i].first; ++missing)
            gaps_.push_back(missing);
    }
    if (files_.empty())
        warnings_.push_back("no frames found in " + directory_.string());
    if (!gaps_.empty())
        warnings_.push_back(std::to_string(gaps_.size()) + " missing frame indices in " + directory_.string());
}

std::optional<Frame> SequenceReader::next() {
    if (failed_ || cursor_ >= files_.size())
        return std::nullopt;
    const auto& [index, path] = files_[cursor_++];
    last_path_ = path;

    FrameMeta meta = defaults_;
    meta.sequence_id = info_.sequence_id;
    meta.frame_index = index;
    meta.fps = info_.fps;
    Frame frame = read_frame(path, meta);

    if (info_.width == 0 || info_.height == 0) {
        info_.width = frame.width();
        info_.height = frame.height();
    } else if (frame.width() != info_.width || frame.height() != info_.height) {
        failed_ = true;
        throw SequenceError("frame " + path.string() + " is " + std::to_string(frame.width()) + "x" +
                            std::to_string(frame.height()) + ", sequence is " + std::to_string(info_.width) +
                            "x" + std::to_string(info_.height));
    }
    return frame;
}

Frame read_frame(const fs::path& file, FrameMeta meta) {
    cv::Mat img = cv::imread(file.string(), cv::IMREAD_COLOR);
    if (img.empty())
        throw FrameDecodeError(file, "cannot decode image");
    meta.width = img.cols;
    meta.height = img.rows;
    std::vector<std::uint8_t> rgb(std::size_t(img.cols) * img.rows * 3);
    for (int y = 0; y < img.rows; ++y) {
        const auto* src = img.ptr<std::uint8_t>(y);
        auto* dst = rgb.data() + std::size_t(y) * img.cols * 3;
        for (int x = 0; x < img.cols; ++x) {
            dst[3 * x + 0] = src[3 * x + 2];
            dst[3 * x + 1] = src[3 * x + 1];
            dst[3 * x + 2] = src[3 * x + 0];
        }
    }
    return Frame(std::move(meta), std::move(rgb));
}

void write_frame(const fs::path& file, const Frame& frame) {
    if (!cv::imwrite(file.string(), to_bgr_mat(frame)))
        throw Error("cannot write " + file.string());
}

std::vector<std::uint8_t> encode_png(const Frame& frame) {
    std::vector<std::uint8_t> out;
    if (!cv::imencode(".png", to_bgr_mat(frame), out))
        throw Error("png encoding failed");
    return out;
}

std::vector<std::uint8_t> image_file_as_png(const fs::path& file) {
    std::string ext = file.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    if (ext == ".png") {
        std::ifstream in(file, std::ios::binary);
        if (!in)
            throw FrameDecodeError(file, "cannot open image");
        return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
    }
    cv::Mat img = cv::imread(file.string(), cv::IMREAD_COLOR);
    if (img.empty())
        throw FrameDecodeError(file, "cannot decode image");
    std::vector<std::uint8_t> out;
    cv::imencode(".png", img, out);
    return out;
}

BinaryMask read_mask(const fs::path& file) {
    cv::Mat img = cv::imread(file.string(), cv::IMREAD_GRAYSCALE);
    if (img.empty())
        throw FrameDecodeError(file, "cannot decode mask");
    BinaryMask mask(img.cols, img.rows);
    for (int y = 0; y < img.rows; ++y) {
        const auto* src = img.ptr<std::uint8_t>(y);
        auto* dst = mask.row(y);
        for (int x = 0; x < img.cols; ++x)
            dst[x] = src[x] != 0;
    }
    return mask;
}

void write_mask(const fs::path& file, const BinaryMask& mask) {
    cv::Mat img(mask.height(), mask.width(), CV_8UC1);
    for (int y = 0; y < mask.height(); ++y) {
        const auto* src = mask.row(y);
        auto* dst = img.ptr<std::uint8_t>(y);
        for (int x = 0; x < mask.width(); ++x)
            dst[x] = src[x] ? 255 : 0;
    }
    if (!cv::imwrite(file.string(), img))
        throw Error("cannot write " + file.string());
}

}  // namespace shuttle
