#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "corstitch/grid.hpp"
#include "corstitch/image.hpp"

namespace corstitch {

inline constexpr std::size_t kMinFrameSide = 16;
inline constexpr std::size_t kMinStripRows = 8;
inline constexpr double kDefaultStripFraction = 0.2;

/// One decoded video frame. Pixels are shared and immutable once constructed.
struct Frame {
    std::size_t index = 0;
    double timestamp = 0.0;  ///< seconds since stream start, index / fps
    std::shared_ptr<const Image> pixels;

    std::size_t rows() const { return pixels->rows; }
    std::size_t cols() const { return pixels->cols; }
};

/// Horizontal band of the green channel used for registration.
struct Strip {
    std::size_t source_index = 0;
    std::size_t top = 0;  ///< first source row
    RealGrid pixels;

    std::size_t rows() const { return pixels.rows(); }
    std::size_t cols() const { return pixels.cols(); }
};

struct StripGeometry {
    std::size_t top = 0;
    std::size_t rows = 0;
};

/// h = round(fraction * frame_rows), centred with top = floor((H - h) / 2).
StripGeometry strip_geometry(std::size_t frame_rows, double strip_fraction);

RealGrid green_channel(const Frame& frame);
RealGrid green_channel(const Image& image);
Strip central_strip(const RealGrid& channel, double strip_fraction, std::size_t source_index = 0);

/// Pull-based frame stream.
class FrameSource {
public:
    virtual ~FrameSource() = default;
    virtual std::optional<Frame> next() = 0;
    /// Total frames if known up front.
    virtual std::optional<std::size_t> size() const { return std::nullopt; }
};

/// Frames from a directory of frame_<index>.(png|ppm) files. The listing is validated on
/// construction (non-empty, contiguous from 0); decoding happens lazily with a small
/// read-ahead window decoded in parallel.
class DirectoryFrameSource final : public FrameSource {
public:
    DirectoryFrameSource(const std::filesystem::path& dir, double fps, std::size_t threads = 1);

    std::optional<Frame> next() override;
    std::optional<std::size_t> size() const override { return files_.size(); }

    const std::vector<std::filesystem::path>& files() const { return files_; }

private:
    void refill();

    std::vector<std::filesystem::path> files_;
    double fps_;
    std::size_t threads_;
    std::size_t next_ = 0;
    std::size_t rows_ = 0, cols_ = 0;
    std::vector<Frame> buffer_;
    std::size_t buffer_pos_ = 0;
};

class VectorFrameSource final : public FrameSource {
public:
    explicit VectorFrameSource(std::vector<Frame> frames) : frames_(std::move(frames)) {}
    std::optional<Frame> next() override {
        if (pos_ == frames_.size()) return std::nullopt;
        return frames_[pos_++];
    }
    std::optional<std::size_t> size() const override { return frames_.size(); }

private:
    std::vector<Frame> frames_;
    std::size_t pos_ = 0;
};

/// Frames produced on demand by a generator, e.g. a synthetic renderer.
class GeneratedFrameSource final : public FrameSource {
public:
    using Generator = std::function<Frame(std::size_t index)>;
    GeneratedFrameSource(std::size_t count, Generator generator)
        : count_(count), generator_(std::move(generator)) {}
    std::optional<Frame> next() override {
        if (pos_ == count_) return std::nullopt;
        return generator_(pos_++);
    }
    std::optional<std::size_t> size() const override { return count_; }

private:
    std::size_t count_;
    Generator generator_;
    std::size_t pos_ = 0;
};

/// Eagerly loads a whole directory.
std::vector<Frame> load_frame_sequence(const std::filesystem::path& dir, double fps, std::size_t threads = 1);

/// Frame from an in-memory image; validates minimum size.
Frame make_frame(std::size_t index, double fps, Image image);

// --- GPS track ---------------------------------------------------------------

struct GeoFix {
    double time = 0.0;  ///< UTC seconds since the Unix epoch
    double lat = 0.0;
    double lon = 0.0;
};

struct GeoTrack {
    std::vector<GeoFix> fixes;
    /// Seconds between the first fix and frame time zero: track time of a frame timestamp t
    /// is fixes.front().time + epoch_offset + t.
    double epoch_offset = 0.0;

    double track_time(double frame_time) const { return fixes.front().time + epoch_offset + frame_time; }
};

GeoTrack parse_gps_track(const std::filesystem::path& file);
GeoTrack parse_gps_track_text(const std::string& csv_text);

/// CSV with date,time,latitude,longitude columns readable by parse_gps_track.
std::string format_gps_track(const GeoTrack& track);
void write_gps_track(const std::filesystem::path& file, const GeoTrack& track);

}  // namespace corstitch
