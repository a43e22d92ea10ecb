#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <optional>
#include <vector>

#include "corstitch/image.hpp"
#include "corstitch/ingest.hpp"
#include "corstitch/registration.hpp"

namespace corstitch {

/// n = round(fps * mosaic_time), at least 1.
std::size_t frames_per_mosaic(double fps, double mosaic_time);

struct StitchConfig {
    double fps = 30.0;
    double mosaic_time = 5.0;
    double strip_fraction = kDefaultStripFraction;
    RegistrationOptions registration;
    std::size_t threads = 1;
    /// When set, CC and PC surfaces of every committed pair are written here as PNG.
    std::optional<std::filesystem::path> surface_dump_dir;
};

/// Registration strip of a frame together with the RGB rows it was cut from.
struct FrameStrip {
    std::size_t index = 0;
    double time = 0.0;
    Strip strip;
    Image rgb;
};

FrameStrip make_frame_strip(const Frame& frame, double strip_fraction);

struct PlacementRecord {
    std::size_t frame_index = 0;
    double frame_time = 0.0;
    std::size_t dy_new_rows = 0;  ///< rows appended; the seed contributes its whole strip
    long cum_dx = 0;              ///< accumulated horizontal scene shift since the seed
    std::size_t strip_h = 0;
};

/// A mosaic under construction or finished. Rows grow downward in time order: the seed strip
/// sits on top and each accepted frame contributes the bottom |dy| rows of its strip. A strip
/// whose accumulated scene shift is cum_dx is placed -cum_dx columns from the seed, so the
/// canvas widens by the horizontal drift; uncovered cells are transparent.
class MosaicCanvas {
public:
    MosaicCanvas() = default;
    MosaicCanvas(std::size_t index, const FrameStrip& seed);

    std::size_t index() const { return index_; }
    std::size_t height() const { return height_; }
    std::size_t width() const;
    std::size_t strip_cols() const { return strip_cols_; }
    double start_time() const { return placements_.front().frame_time; }
    double end_time() const { return placements_.back().frame_time; }
    const std::vector<PlacementRecord>& placements() const { return placements_; }
    long cum_dx() const { return cum_dx_; }

    /// Accepted frames (placements excluding the seed).
    std::size_t accepted() const { return placements_.empty() ? 0 : placements_.size() - 1; }
    std::size_t rejected = 0;
    std::size_t skipped = 0;
    std::size_t first_frame = 0;  ///< first candidate frame of this canvas's block
    std::size_t last_frame = 0;   ///< last candidate frame seen

    void append(const FrameStrip& strip, const Shift& shift);

    /// RGBA raster; covered cells opaque, drift margins transparent.
    Image render() const;

private:
    struct Band {
        long col = 0;  ///< column of the band's left edge relative to the seed
        Image rows;
    };

    std::size_t index_ = 0;
    std::size_t height_ = 0;
    std::size_t strip_cols_ = 0;
    long cum_dx_ = 0;
    long min_col_ = 0, max_col_ = 0;
    std::vector<Band> bands_;
    std::vector<PlacementRecord> placements_;
};

/// Appends the new content of `strip` (shift.dy < 0) and returns the grown canvas.
MosaicCanvas append_strip(MosaicCanvas canvas, const FrameStrip& strip, const Shift& shift);

struct StitchSummary {
    std::size_t frames_in = 0;
    std::size_t accepted = 0;
    std::size_t rejected = 0;
    std::size_t skipped = 0;
    std::size_t mosaics = 0;
    std::size_t dropped_mosaics = 0;  ///< blocks where no frame was accepted
};

using MosaicSink = std::function<void(MosaicCanvas&&)>;

/// Sequential accept/reject pass. The reference strip starts at frame 0; a candidate whose
/// peak moves up (dy < 0) is appended and becomes the reference, anything else is discarded.
/// Canvas k collects candidate frames [k*n, (k+1)*n) and is seeded with the reference strip
/// current when the block begins.
StitchSummary stitch_pass(FrameSource& frames, const StitchConfig& config, const MosaicSink& sink);
std::vector<MosaicCanvas> stitch_pass(FrameSource& frames, const StitchConfig& config);

}  // namespace corstitch
