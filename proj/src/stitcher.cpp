#include "corstitch/stitcher.hpp"
#include "corstitch/error.hpp"
#include "corstitch/log.hpp"
#include "corstitch/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>

namespace corstitch {

std::size_t frames_per_mosaic(double fps, double mosaic_time) {
    if (!(fps > 0.0) || !(mosaic_time > 0.0)) throw Error(Stage::stitch, "fps and mosaic_time must be positive");
    return std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(fps * mosaic_time)));
}

FrameStrip make_frame_strip(const Frame& frame, double strip_fraction) {
    FrameStrip out;
    out.index = frame.index;
    out.time = frame.timestamp;
    out.strip = central_strip(green_channel(frame), strip_fraction, frame.index);
    const auto& src = *frame.pixels;
    out.rgb = Image(out.strip.rows(), src.cols, 3);
    for (std::size_t r = 0; r < out.strip.rows(); ++r) {
        const auto row = src.row(out.strip.top + r);
        std::copy(row.begin(), row.end(), out.rgb.at(r, 0));
    }
    return out;
}

// --- canvas ------------------------------------------------------------------

MosaicCanvas::MosaicCanvas(std::size_t index, const FrameStrip& seed)
    : index_(index), height_(seed.rgb.rows), strip_cols_(seed.rgb.cols) {
    bands_.push_back({0, seed.rgb});
    placements_.push_back({seed.index, seed.time, seed.rgb.rows, 0, seed.rgb.rows});
}

std::size_t MosaicCanvas::width() const {
    return strip_cols_ + static_cast<std::size_t>(max_col_ - min_col_);
}

void MosaicCanvas::append(const FrameStrip& strip, const Shift& shift) {
    if (shift.dy >= 0) throw Error(Stage::stitch, "append_strip requires dy < 0, got " + std::to_string(shift.dy));
    if (placements_.empty()) throw Error(Stage::stitch, "append_strip on an unseeded canvas");
    const auto strip_h = strip.rgb.rows;
    const auto new_rows = static_cast<std::size_t>(-shift.dy);
    if (new_rows > strip_h) throw Error(Stage::stitch, "shift exceeds strip height");
    if (strip.rgb.cols != strip_cols_) throw Error(Stage::stitch, "strip width differs from canvas");

    cum_dx_ += shift.dx;
    const long col = -cum_dx_;
    min_col_ = std::min(min_col_, col);
    max_col_ = std::max(max_col_, col);

    Image rows(new_rows, strip_cols_, 3);
    for (std::size_t r = 0; r < new_rows; ++r) {
        const auto src = strip.rgb.row(strip_h - new_rows + r);
        std::copy(src.begin(), src.end(), rows.at(r, 0));
    }
    bands_.push_back({col, std::move(rows)});
    height_ += new_rows;
    placements_.push_back({strip.index, strip.time, new_rows, cum_dx_, strip_h});
}

Image MosaicCanvas::render() const {
    Image out(height_, width(), 4, 0);
    std::size_t row0 = 0;
    for (const auto& band : bands_) {
        const auto col0 = static_cast<std::size_t>(band.col - min_col_);
        for (std::size_t r = 0; r < band.rows.rows; ++r) {
            for (std::size_t c = 0; c < band.rows.cols; ++c) {
                const auto* src = band.rows.at(r, c);
                auto* dst = out.at(row0 + r, col0 + c);
                dst[0] = src[0];
                dst[1] = src[1];
                dst[2] = src[2];
                dst[3] = 255;
            }
        }
        row0 += band.rows.rows;
    }
    return out;
}

MosaicCanvas append_strip(MosaicCanvas canvas, const FrameStrip& strip, const Shift& shift) {
    canvas.append(strip, shift);
    return canvas;
}

// --- pass --------------------------------------------------------------------

namespace {

void dump_surfaces(const std::filesystem::path& dir, const FrameStrip& ref, const FrameStrip& cand,
                   const RegistrationOptions& options) {
    std::filesystem::create_directories(dir);
    char name[64];
    std::snprintf(name, sizeof name, "pair_%06zu_%06zu_cc.png", ref.index, cand.index);
    write_png(dir / name, surface_to_image(cross_correlation_surface(ref.strip, cand.strip, options)));
    try {
        std::snprintf(name, sizeof name, "pair_%06zu_%06zu_pc.png", ref.index, cand.index);
        write_png(dir / name, surface_to_image(phase_correlation_surface(ref.strip, cand.strip)));
    } catch (const DegeneratePairError&) {
    }
}

/// Result of registering a candidate against its predecessor, computed ahead of commit.
struct Speculation {
    std::optional<Shift> shift;  ///< empty for a degenerate pair
};

}  // namespace

StitchSummary stitch_pass(FrameSource& frames, const StitchConfig& config, const MosaicSink& sink) {
    const std::size_t n = frames_per_mosaic(config.fps, config.mosaic_time);
    const std::size_t threads = std::max<std::size_t>(config.threads, 1);
    const std::size_t window = threads > 1 ? threads * 4 : 1;

    StitchSummary summary;
    std::optional<FrameStrip> reference;
    std::optional<FrameStrip> previous;  // last candidate of the previous window
    std::optional<MosaicCanvas> canvas;
    std::size_t canvas_block = 0;

    auto close_canvas = [&] {
        if (!canvas) return;
        if (canvas->accepted() == 0) {
            log::warn("mosaic_dropped", {{"block", canvas_block}, {"reason", "no accepted frames"}});
            ++summary.dropped_mosaics;
        } else {
            log::info("mosaic_closed", {{"index", canvas->index()},
                                        {"height", canvas->height()},
                                        {"accepted", canvas->accepted()},
                                        {"rejected", canvas->rejected}});
            ++summary.mosaics;
            sink(std::move(*canvas));
        }
        canvas.reset();
    };

    auto commit = [&](const FrameStrip& cand, const Speculation* guess) {
        const std::size_t block = cand.index / n;
        if (!canvas || block != canvas_block) {
            close_canvas();
            canvas.emplace(summary.mosaics, *reference);
            canvas->first_frame = cand.index;
            canvas_block = block;
        }
        canvas->last_frame = cand.index;

        std::optional<Shift> shift;
        if (guess && reference->index + 1 == cand.index) {
            shift = guess->shift;
        } else {
            try {
                shift = estimate_shift(reference->strip, cand.strip, config.registration);
            } catch (const DegeneratePairError&) {
                shift.reset();
            }
        }
        if (config.surface_dump_dir) dump_surfaces(*config.surface_dump_dir, *reference, cand, config.registration);

        if (!shift) {
            log::warn("pair_degenerate", {{"reference", reference->index}, {"frame", cand.index}});
            ++canvas->skipped;
            ++summary.skipped;
        } else if (shift->dy < 0) {
            canvas->append(cand, *shift);
            ++summary.accepted;
            reference = cand;
        } else {
            log::emit(log::Level::debug, "frame_rejected",
                      {{"frame", cand.index}, {"dx", shift->dx}, {"dy", shift->dy}});
            ++canvas->rejected;
            ++summary.rejected;
        }
    };

    std::vector<Frame> batch;
    while (true) {
        batch.clear();
        while (batch.size() < window) {
            auto frame = frames.next();
            if (!frame) break;
            batch.push_back(std::move(*frame));
        }
        if (batch.empty()) break;
        summary.frames_in += batch.size();

        std::vector<FrameStrip> strips(batch.size());
        parallel_for(batch.size(), threads,
                     [&](std::size_t i) { strips[i] = make_frame_strip(batch[i], config.strip_fraction); });

        std::size_t start = 0;
        if (!reference) {
            reference = strips.front();
            previous = strips.front();
            start = 1;
        }

        // Register each candidate against its immediate predecessor in parallel; the commit
        // loop reuses the result whenever that predecessor is still the reference.
        std::vector<Speculation> specs(strips.size());
        if (threads > 1) {
            parallel_for(strips.size() - start, threads, [&](std::size_t k) {
                const std::size_t i = start + k;
                const FrameStrip& pred = i == 0 ? *previous : strips[i - 1];
                try {
                    specs[i].shift = estimate_shift(pred.strip, strips[i].strip, config.registration);
                } catch (const DegeneratePairError&) {
                    specs[i].shift.reset();
                }
            });
        }
        for (std::size_t i = start; i < strips.size(); ++i) commit(strips[i], threads > 1 ? &specs[i] : nullptr);
        previous = strips.back();
    }

    if (summary.frames_in < 2) throw Error(Stage::stitch, "fewer than 2 usable frames");
    close_canvas();
    return summary;
}

std::vector<MosaicCanvas> stitch_pass(FrameSource& frames, const StitchConfig& config) {
    std::vector<MosaicCanvas> out;
    stitch_pass(frames, config, [&out](MosaicCanvas&& canvas) { out.push_back(std::move(canvas)); });
    return out;
}

}  // namespace corstitch
