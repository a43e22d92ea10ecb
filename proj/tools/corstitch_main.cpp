// corstitch: video-transect stitching, georeferencing and KMZ export.
//
//   corstitch run|stitch|georef|synth|verify [--config FILE] [options]

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <string>

#include "corstitch/error.hpp"
#include "corstitch/log.hpp"
#include "corstitch/pipeline.hpp"
#include "corstitch/registration.hpp"
#include "corstitch/stitcher.hpp"
#include "corstitch/synth.hpp"

namespace cs = corstitch;

namespace {

int exit_code(cs::Stage stage) {
    switch (stage) {
        case cs::Stage::config: return 1;
        case cs::Stage::ingest: return 2;
        case cs::Stage::registration: return 3;
        case cs::Stage::stitch: return 4;
        case cs::Stage::georef: return 5;
        case cs::Stage::kmz: return 6;
        case cs::Stage::synth: return 7;
        case cs::Stage::verify: return 8;
    }
    return 1;
}

void print_summary(const cs::PipelineSummary& s) {
    std::printf("frames in:  %zu\naccepted:   %zu\nrejected:   %zu\nskipped:    %zu\nmosaics:    %zu\narchives:   %zu\n",
                s.frames_in, s.accepted, s.rejected, s.skipped, s.mosaics, s.archives);
    for (const auto& t : s.timings) std::printf("time %-7s %.3f s\n", t.stage.c_str(), t.seconds);
    for (const auto& p : s.archive_paths) std::printf("wrote %s\n", p.string().c_str());
}

cs::log::Level parse_level(const std::string& name) {
    if (name == "debug") return cs::log::Level::debug;
    if (name == "info") return cs::log::Level::info;
    if (name == "error") return cs::log::Level::error;
    return cs::log::Level::warn;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"corstitch: stitch towed-camera video frames into georeferenced KMZ mosaics"};
    app.set_config("--config", "", "Configuration file (key = value, TOML/INI style)");
    app.require_subcommand(1);

    cs::PipelineConfig cfg;
    std::string offset_mode = "heading";
    std::string log_level = "warn";
    std::string dump_dir;

    app.add_option("--frames", cfg.frames_dir, "Directory of frame_%06d.png|ppm files");
    app.add_option("--gps", cfg.gps_csv, "GPS CSV with date,time,latitude,longitude");
    app.add_option("--out", cfg.out_dir, "Output directory")->capture_default_str();
    app.add_option("--fps", cfg.fps, "Frames per second")->capture_default_str()->check(CLI::PositiveNumber);
    app.add_option("--mosaic-time", cfg.mosaic_time, "Seconds of video per mosaic")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    app.add_option("--strip-fraction", cfg.strip_fraction, "Central strip height as a fraction of the frame")
        ->capture_default_str()
        ->check(CLI::Range(0.0, 1.0));
    app.add_option("--width-m", cfg.mosaic_width_m, "Overlay width in metres")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    app.add_option("--batch", cfg.batch_size, "Mosaics per KMZ archive")->capture_default_str()->check(CLI::PositiveNumber);
    app.add_option("--offset-mode", offset_mode, "Corner offset formula")
        ->capture_default_str()
        ->check(CLI::IsMember({"paper", "heading", "heading_aligned"}));
    app.add_option("--epoch-offset", cfg.epoch_offset, "Seconds from the first GPS fix to frame 0")->capture_default_str();
    app.add_option("--threads", cfg.threads, "Worker thread cap")->capture_default_str()->check(CLI::PositiveNumber);
    app.add_option("--slug", cfg.slug, "Transect name used in KMZ file names");
    app.add_flag("--no-mean-subtract{false}", cfg.cc_mean_subtract, "Raw cross-correlation without mean removal");
    app.add_option("--dump-surfaces", dump_dir, "Write CC/PC surfaces of every frame pair as PNG here");
    app.add_option("--log-level", log_level, "stderr log threshold")
        ->capture_default_str()
        ->check(CLI::IsMember({"debug", "info", "warn", "error"}));

    // synth / verify
    std::uint64_t seed = 1;
    cs::SurveyParams sp;
    std::string image_format = "png";
    double random_shift = 0.0;
    bool forward_only = false;
    std::string truth_path;
    double min_rate = 0.0;
    app.add_option("--seed", seed, "Synthetic survey seed")->capture_default_str();
    app.add_option("--frame-count", sp.frame_count, "Synthetic frame count")->capture_default_str();
    app.add_option("--frame-width", sp.frame_cols, "Synthetic frame width")->capture_default_str();
    app.add_option("--frame-height", sp.frame_rows, "Synthetic frame height")->capture_default_str();
    app.add_option("--texture-size", sp.texture_rows, "Synthetic texture side (square)")->capture_default_str();
    app.add_option("--shift-dx", sp.shift_profile.dx, "Constant per-frame scene shift, x")->capture_default_str();
    app.add_option("--shift-dy", sp.shift_profile.dy, "Constant per-frame scene shift, y")->capture_default_str();
    app.add_option("--random-shift", random_shift, "Draw random shifts up to this magnitude instead");
    app.add_flag("--forward-only", forward_only, "Random shifts always move along the tow (dy < 0)");
    app.add_option("--noise", sp.noise_sigma, "Additive Gaussian noise sigma, 8-bit levels")->capture_default_str();
    app.add_option("--sand", sp.sand_fraction, "Share of the texture covered by sand")->capture_default_str();
    app.add_option("--blur", sp.blur_sigma, "Mean along-track motion blur, px")->capture_default_str();
    app.add_option("--vignette", sp.vignette, "Brightness falloff at frame corners, 0..1")->capture_default_str();
    app.add_option("--mpp", sp.meters_per_pixel, "Metres per pixel (0: 3 m across the frame)")->capture_default_str();
    app.add_option("--format", image_format, "Frame file format")->check(CLI::IsMember({"png", "ppm"}));
    app.add_option("--truth", truth_path, "ground_truth.json for verify (default: <frames>/../ground_truth.json)");
    app.add_option("--min-rate", min_rate, "verify fails below this exact-recovery rate")->capture_default_str();

    auto* run = app.add_subcommand("run", "Ingest, stitch, georeference and export KMZ");
    auto* stitch = app.add_subcommand("stitch", "Stitch only; stops after the manifest");
    auto* georef = app.add_subcommand("georef", "Georeference an existing manifest and export KMZ");
    auto* synth = app.add_subcommand("synth", "Generate a synthetic survey with ground truth");
    auto* verify = app.add_subcommand("verify", "Score shift recovery against a synthetic ground truth");
    for (auto* sub : {run, stitch, georef, synth, verify}) sub->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : exit_code(cs::Stage::config);
    }

    cs::log::set_sink(cs::log::stderr_sink(parse_level(log_level)));
    if (!dump_dir.empty()) cfg.surface_dump_dir = dump_dir;

    try {
        cfg.offset_mode = cs::parse_offset_mode(offset_mode);
        if (*run) {
            print_summary(cs::run_pipeline(cfg));
        } else if (*stitch) {
            print_summary(cs::run_stitch(cfg));
        } else if (*georef) {
            print_summary(cs::run_georef(cfg));
        } else if (*synth) {
            sp.texture_cols = sp.texture_rows;
            sp.fps = cfg.fps;
            sp.strip_fraction = cfg.strip_fraction;
            if (random_shift > 0.0) {
                sp.shift_profile.kind = cs::ShiftProfile::Kind::random;
                sp.shift_profile.max_magnitude = random_shift;
                sp.shift_profile.forward_only = forward_only;
            }
            const auto survey = cs::generate_survey(seed, sp);
            cs::write_survey(survey, cfg.out_dir, image_format, cfg.threads);
            std::printf("wrote %zu frames, gps.csv and ground_truth.json to %s\n", sp.frame_count,
                        cfg.out_dir.string().c_str());
        } else if (*verify) {
            if (cfg.frames_dir.empty()) cfg.frames_dir = cfg.out_dir / "frames";
            const std::filesystem::path truth_file =
                truth_path.empty() ? cfg.frames_dir.parent_path() / "ground_truth.json" : std::filesystem::path(truth_path);
            const auto truth = cs::read_ground_truth(truth_file);
            cs::DirectoryFrameSource source(cfg.frames_dir, truth.fps, cfg.threads);
            cs::RegistrationOptions options;
            options.cc_mean_subtract = cfg.cc_mean_subtract;
            std::vector<cs::Shift> estimates;
            std::optional<cs::FrameStrip> prev;
            while (auto frame = source.next()) {
                auto strip = cs::make_frame_strip(*frame, truth.strip_fraction);
                if (prev) estimates.push_back(cs::estimate_shift(prev->strip, strip.strip, options));
                prev = std::move(strip);
            }
            const auto report = cs::score_recovery(truth.shifts, estimates);
            std::cout << cs::to_json(report).dump(2) << '\n';
            if (report.exact_rate < min_rate) return exit_code(cs::Stage::verify);
        }
    } catch (const cs::Error& e) {
        cs::log::emit(cs::log::Level::error, "stage_failed", {{"stage", cs::stage_name(e.stage())}, {"message", e.what()}});
        std::fprintf(stderr, "corstitch: [%s] %s\n", cs::stage_name(e.stage()), e.what());
        return exit_code(e.stage());
    } catch (const std::exception& e) {
        std::fprintf(stderr, "corstitch: %s\n", e.what());
        return 1;
    }
    return 0;
}
