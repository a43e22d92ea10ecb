#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "corstitch/georef.hpp"
#include "corstitch/ingest.hpp"
#include "corstitch/kmz.hpp"

namespace corstitch {

/// Defaults reproduce the published settings: 30 fps, 5 s mosaics, a 20% strip, 3 m overlay
/// width and 100 mosaics per KMZ.
struct PipelineConfig {
    std::filesystem::path frames_dir;
    std::filesystem::path gps_csv;
    std::filesystem::path out_dir = "corstitch_out";
    double fps = 30.0;
    double mosaic_time = 5.0;
    double strip_fraction = kDefaultStripFraction;
    double epoch_offset = 0.0;
    double mosaic_width_m = 3.0;
    std::size_t batch_size = kDefaultBatchSize;
    OffsetMode offset_mode = OffsetMode::heading_aligned;
    std::size_t threads = 1;
    bool cc_mean_subtract = true;
    std::string slug;  ///< empty: derived from frames_dir
    std::optional<std::filesystem::path> surface_dump_dir;
};

struct StageTiming {
    std::string stage;
    double seconds = 0.0;
};

struct PipelineSummary {
    std::size_t frames_in = 0;
    std::size_t accepted = 0;
    std::size_t rejected = 0;
    std::size_t skipped = 0;
    std::size_t mosaics = 0;
    std::size_t archives = 0;
    std::vector<std::filesystem::path> archive_paths;
    std::vector<StageTiming> timings;
};

// Output layout under out_dir:
//   mosaics/mosaic_%05d.png   RGBA, rotated so the start of the mosaic is the bottom edge
//   manifest.jsonl            one MosaicRecord per mosaic
//   quads.jsonl               one georeferenced quad per mosaic
//   kmz/transect_<slug>_batch_%03d.kmz

inline constexpr const char* kManifestFile = "manifest.jsonl";
inline constexpr const char* kQuadsFile = "quads.jsonl";

std::string transect_slug(const PipelineConfig& config);

/// Ingest and stitch; stops after writing mosaics and the manifest.
PipelineSummary run_stitch(const PipelineConfig& config);
/// Stitch stage over an arbitrary frame stream.
PipelineSummary run_stitch(const PipelineConfig& config, FrameSource& frames);

/// Resumes from out_dir/manifest.jsonl: georeferences each mosaic and writes KMZ batches.
PipelineSummary run_georef(const PipelineConfig& config);
PipelineSummary run_georef(const PipelineConfig& config, const GeoTrack& track);

/// Full pipeline: GPS ingest, stitch, georef, kmz.
PipelineSummary run_pipeline(const PipelineConfig& config);

/// Mosaic PNG orientation: 180-degree rotation of the canvas (canvas grows downward in time).
Image overlay_orientation(const Image& canvas);

}  // namespace corstitch
