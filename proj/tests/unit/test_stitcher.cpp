#include <doctest.h>

#include "corstitch/error.hpp"
#include "corstitch/log.hpp"
#include "corstitch/stitcher.hpp"
#include "corstitch/synth.hpp"
#include "util.hpp"

using namespace corstitch;

namespace {

SurveyParams small_survey(std::size_t frames, int dx, int dy) {
    SurveyParams p;
    p.frame_count = frames;
    p.frame_rows = 64;
    p.frame_cols = 96;
    p.texture_rows = 256;
    p.texture_cols = 256;
    p.strip_fraction = 0.5;
    p.shift_profile.dx = dx;
    p.shift_profile.dy = dy;
    return p;
}

FrameStrip strip_of(const Image& img, std::size_t index) {
    return make_frame_strip(make_frame(index, 30.0, img), 0.25);
}

}  // namespace

TEST_CASE("frames_per_mosaic") {
    CHECK(frames_per_mosaic(30.0, 5.0) == 150);
    CHECK(frames_per_mosaic(30.0, 1.0 / 30.0) == 1);
    CHECK(frames_per_mosaic(24.0, 2.5) == 60);
    CHECK_THROWS_AS(frames_per_mosaic(0.0, 5.0), Error);
}

TEST_CASE("append_strip row arithmetic") {
    Image img(380, 40, 3);
    for (std::size_t i = 0; i < img.pixels.size(); ++i) img.pixels[i] = static_cast<std::uint8_t>(i % 251);
    const auto a = make_frame_strip(make_frame(0, 30.0, img), 95.0 / 380.0);
    const auto b = make_frame_strip(make_frame(1, 30.0, img), 95.0 / 380.0);
    REQUIRE(a.rgb.rows == 95);
    MosaicCanvas canvas(0, a);
    CHECK(canvas.height() == 95);
    canvas = append_strip(canvas, b, {0, -4});
    CHECK(canvas.height() == 99);
    // the appended rows are the bottom rows of the new strip
    const auto out = canvas.render();
    for (std::size_t r = 0; r < 4; ++r)
        for (std::size_t c = 0; c < 40; ++c)
            for (int ch = 0; ch < 3; ++ch) CHECK(out.at(95 + r, c)[ch] == b.rgb.at(91 + r, c)[ch]);

    MosaicCanvas whole(0, a);
    whole.append(b, {0, -95});
    CHECK(whole.height() == 190);
    CHECK_THROWS_AS(whole.append(b, {0, 0}), Error);
    CHECK_THROWS_AS(whole.append(b, {0, 3}), Error);
}

TEST_CASE("uncovered canvas cells are transparent") {
    const auto a = strip_of(testutil::solid_image(64, 20, 9, 9, 9), 0);
    MosaicCanvas canvas(0, a);
    canvas.append(strip_of(testutil::solid_image(64, 20, 9, 9, 9), 1), {3, -2});
    CHECK(canvas.width() == 23);
    const auto out = canvas.render();
    CHECK(out.channels == 4);
    // scene moved right, so the new band sits 3 columns left of the seed
    CHECK(out.at(0, 0)[3] == 0);
    CHECK(out.at(0, 3)[3] == 255);  // seed band covers cols 3..22
    CHECK(out.at(0, 22)[3] == 255);
    CHECK(out.at(16, 0)[3] == 255);  // new band covers cols 0..19
    CHECK(out.at(16, 22)[3] == 0);
}

TEST_CASE("constant (0,-4) stream grows 4 rows per accepted frame") {
    const auto survey = generate_survey(1, small_survey(100, 0, -4));
    auto src = survey.frame_source();
    StitchConfig cfg;
    cfg.mosaic_time = 1.0;  // 30 frames per block
    cfg.strip_fraction = 0.5;
    const auto canvases = stitch_pass(src, cfg);
    REQUIRE(canvases.size() == 4);  // blocks 0..29, 30..59, 60..89, 90..99
    CHECK(canvases[0].accepted() == 29);
    CHECK(canvases[0].height() == 32 + 4 * 29);
    CHECK(canvases[1].accepted() == 30);
    CHECK(canvases[1].height() == 32 + 4 * 30);
    CHECK(canvases[3].accepted() == 10);
    for (const auto& c : canvases) CHECK(c.rejected == 0);
}

TEST_CASE("repeated frame contributes nothing") {
    auto p = small_survey(6, 0, -4);
    p.shift_profile.kind = ShiftProfile::Kind::list;
    p.shift_profile.shifts = {{0, -4}, {0, 0}, {0, -4}, {0, -4}, {0, -4}};
    const auto survey = generate_survey(2, p);
    auto src = survey.frame_source();
    StitchConfig cfg;
    cfg.strip_fraction = 0.5;
    const auto canvases = stitch_pass(src, cfg);
    REQUIRE(canvases.size() == 1);
    const auto& c = canvases.front();
    CHECK(c.rejected == 1);
    CHECK(c.accepted() == 4);
    CHECK(c.height() == 32 + 16);
    for (const auto& pl : c.placements()) CHECK(pl.frame_index != 2);
}

TEST_CASE("horizontal drift widens the canvas") {
    const auto survey = generate_survey(3, small_survey(20, 2, -3));
    auto src = survey.frame_source();
    StitchConfig cfg;
    cfg.strip_fraction = 0.5;
    const auto canvases = stitch_pass(src, cfg);
    REQUIRE(canvases.size() == 1);
    const auto& c = canvases.front();
    REQUIRE(c.accepted() == 19);
    long expect = 0;
    for (std::size_t i = 1; i < c.placements().size(); ++i) {
        expect += 2;
        CHECK(c.placements()[i].cum_dx == expect);
    }
    CHECK(c.width() == 96 + 2 * (c.placements().size() - 1));
}

TEST_CASE("threaded pass equals the serial pass") {
    auto p = small_survey(70, 1, -3);
    p.noise_sigma = 3.0;
    p.shift_profile.kind = ShiftProfile::Kind::random;
    p.shift_profile.max_magnitude = 5.0;
    const auto survey = generate_survey(4, p);
    StitchConfig cfg;
    cfg.mosaic_time = 0.5;
    cfg.strip_fraction = 0.5;
    auto s1 = survey.frame_source();
    const auto serial = stitch_pass(s1, cfg);
    cfg.threads = 4;
    auto s4 = survey.frame_source();
    const auto threaded = stitch_pass(s4, cfg);
    REQUIRE(serial.size() == threaded.size());
    for (std::size_t i = 0; i < serial.size(); ++i) {
        CHECK(serial[i].render() == threaded[i].render());
        CHECK(serial[i].rejected == threaded[i].rejected);
    }
}

TEST_CASE("empty blocks are dropped with a warning") {
    // Frames 1..29 repeat frame 0, so block 0 accepts nothing.
    auto p = small_survey(45, 0, -4);
    p.shift_profile.kind = ShiftProfile::Kind::list;
    p.shift_profile.shifts.assign(44, Shift{0, -4});
    for (std::size_t i = 0; i < 29; ++i) p.shift_profile.shifts[i] = {0, 0};
    const auto survey = generate_survey(5, p);
    std::vector<std::string> events;
    log::ScopedSink sink([&](const nlohmann::json& e) { events.push_back(e.at("event").get<std::string>()); });
    auto src = survey.frame_source();
    StitchConfig cfg;
    cfg.mosaic_time = 1.0;
    cfg.strip_fraction = 0.5;
    StitchSummary summary = stitch_pass(src, cfg, [](MosaicCanvas&&) {});
    CHECK(summary.mosaics == 1);
    CHECK(summary.dropped_mosaics == 1);
    CHECK(std::count(events.begin(), events.end(), "mosaic_dropped") == 1);
}

TEST_CASE("a single frame is not a stream") {
    const auto survey = generate_survey(6, small_survey(2, 0, -4));
    std::vector<Frame> one{survey.render_frame(0)};
    VectorFrameSource src(one);
    CHECK_THROWS_WITH_AS(stitch_pass(src, StitchConfig{}), "fewer than 2 usable frames", Error);
}
