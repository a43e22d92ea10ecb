#include "corstitch/pipeline.hpp"
#include "corstitch/error.hpp"
#include "corstitch/log.hpp"
#include "corstitch/manifest.hpp"
#include "corstitch/stitcher.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <map>
#include <optional>

namespace corstitch {
namespace {

class StageTimer {
public:
    StageTimer(PipelineSummary& summary, std::string stage)
        : summary_(summary), stage_(std::move(stage)), start_(std::chrono::steady_clock::now()) {}
    ~StageTimer() {
        const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start_;
        summary_.timings.push_back({stage_, elapsed.count()});
    }

private:
    PipelineSummary& summary_;
    std::string stage_;
    std::chrono::steady_clock::time_point start_;
};

std::vector<std::uint8_t> read_bytes(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(Stage::kmz, "missing mosaic image " + path.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void reset_dir(const std::filesystem::path& dir) {
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
}

StitchConfig stitch_config(const PipelineConfig& config) {
    StitchConfig sc;
    sc.fps = config.fps;
    sc.mosaic_time = config.mosaic_time;
    sc.strip_fraction = config.strip_fraction;
    sc.registration.cc_mean_subtract = config.cc_mean_subtract;
    sc.threads = config.threads;
    sc.surface_dump_dir = config.surface_dump_dir;
    return sc;
}

void merge(PipelineSummary& into, const PipelineSummary& from) {
    into.frames_in += from.frames_in;
    into.accepted += from.accepted;
    into.rejected += from.rejected;
    into.skipped += from.skipped;
    into.mosaics = std::max(into.mosaics, from.mosaics);
    into.archives += from.archives;
    into.archive_paths.insert(into.archive_paths.end(), from.archive_paths.begin(), from.archive_paths.end());
    into.timings.insert(into.timings.end(), from.timings.begin(), from.timings.end());
}

}  // namespace

Image overlay_orientation(const Image& canvas) {
    Image out(canvas.rows, canvas.cols, canvas.channels);
    for (std::size_t r = 0; r < canvas.rows; ++r)
        for (std::size_t c = 0; c < canvas.cols; ++c) {
            const auto* src = canvas.at(r, c);
            std::copy(src, src + canvas.channels, out.at(canvas.rows - 1 - r, canvas.cols - 1 - c));
        }
    return out;
}

std::string transect_slug(const PipelineConfig& config) {
    if (!config.slug.empty()) return make_slug(config.slug);
    auto dir = config.frames_dir.lexically_normal();
    if (dir.filename().empty()) dir = dir.parent_path();
    if (dir.filename() == "frames" && dir.has_parent_path()) dir = dir.parent_path();
    return make_slug(dir.filename().string());
}

PipelineSummary run_stitch(const PipelineConfig& config, FrameSource& frames) {
    PipelineSummary summary;
    StageTimer timer(summary, "stitch");
    const auto mosaic_dir = config.out_dir / "mosaics";
    reset_dir(mosaic_dir);
    const auto slug = transect_slug(config);

    std::vector<MosaicRecord> records;
    const auto result = stitch_pass(frames, stitch_config(config), [&](MosaicCanvas&& canvas) {
        char name[32];
        std::snprintf(name, sizeof name, "mosaic_%05zu.png", canvas.index());
        write_png(mosaic_dir / name, overlay_orientation(canvas.render()));
        MosaicRecord r;
        r.index = canvas.index();
        r.image = std::string("mosaics/") + name;
        r.transect = slug;
        r.start_time = canvas.start_time();
        r.end_time = canvas.end_time();
        r.first_frame = canvas.first_frame;
        r.last_frame = canvas.last_frame;
        r.height = canvas.height();
        r.width = canvas.width();
        r.strip_h = canvas.placements().front().strip_h;
        r.accepted = canvas.accepted();
        r.rejected = canvas.rejected;
        r.skipped = canvas.skipped;
        records.push_back(std::move(r));
    });
    write_manifest(config.out_dir / kManifestFile, records);

    summary.frames_in = result.frames_in;
    summary.accepted = result.accepted;
    summary.rejected = result.rejected;
    summary.skipped = result.skipped;
    summary.mosaics = result.mosaics;
    log::info("stitch_done", {{"frames_in", result.frames_in},
                              {"accepted", result.accepted},
                              {"rejected", result.rejected},
                              {"skipped", result.skipped},
                              {"mosaics", result.mosaics}});
    return summary;
}

PipelineSummary run_stitch(const PipelineConfig& config) {
    PipelineSummary summary;
    std::optional<DirectoryFrameSource> source;
    {
        StageTimer timer(summary, "ingest");
        source.emplace(config.frames_dir, config.fps, config.threads);
    }
    auto stitched = run_stitch(config, *source);
    merge(summary, stitched);
    return summary;
}

PipelineSummary run_georef(const PipelineConfig& config, const GeoTrack& track_in) {
    PipelineSummary summary;
    const auto records = read_manifest(config.out_dir / kManifestFile);
    summary.mosaics = records.size();

    GeoTrack track = track_in;
    track.epoch_offset = config.epoch_offset;
    GeoConfig geo;
    geo.mosaic_width_m = config.mosaic_width_m;
    geo.offset_mode = config.offset_mode;

    std::vector<OverlayEntry> entries;
    {
        StageTimer timer(summary, "georef");
        std::ofstream quads(config.out_dir / kQuadsFile);
        for (const auto& r : records) {
            OverlayEntry e;
            e.mosaic_index = r.index;
            e.image_name = overlay_image_name(r.index);
            e.draw_order = static_cast<int>(r.index);
            try {
                e.quad = mosaic_quad({r.start_time, r.end_time}, track, geo);
            } catch (const Error& err) {
                throw Error(Stage::georef, "mosaic " + std::to_string(r.index) + ": " + err.what());
            }
            quads << quad_json(r.index, r.image, e.quad).dump() << '\n';
            entries.push_back(std::move(e));
        }
        if (!quads) throw Error(Stage::georef, "cannot write quads");
    }
    {
        StageTimer timer(summary, "kmz");
        const auto kmz_dir = config.out_dir / "kmz";
        reset_dir(kmz_dir);
        const std::string slug = records.empty() ? transect_slug(config) : records.front().transect;
        std::map<std::size_t, std::filesystem::path> images;
        for (const auto& r : records) images[r.index] = config.out_dir / r.image;
        summary.archive_paths = write_kmz_batches(
            entries, [&](const OverlayEntry& e) { return read_bytes(images.at(e.mosaic_index)); }, kmz_dir, slug,
            config.batch_size);
        summary.archives = summary.archive_paths.size();
    }
    return summary;
}

PipelineSummary run_georef(const PipelineConfig& config) {
    PipelineSummary summary;
    std::optional<GeoTrack> track;
    {
        StageTimer timer(summary, "ingest");
        track = parse_gps_track(config.gps_csv);
    }
    merge(summary, run_georef(config, *track));
    return summary;
}

PipelineSummary run_pipeline(const PipelineConfig& config) {
    PipelineSummary summary;
    std::optional<GeoTrack> track;
    std::optional<DirectoryFrameSource> source;
    {
        StageTimer timer(summary, "ingest");
        track = parse_gps_track(config.gps_csv);
        source.emplace(config.frames_dir, config.fps, config.threads);
    }
    merge(summary, run_stitch(config, *source));
    merge(summary, run_georef(config, *track));
    return summary;
}

}  // namespace corstitch
