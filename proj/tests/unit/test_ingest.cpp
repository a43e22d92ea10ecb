#include <doctest.h>

#include <cmath>

#include "corstitch/error.hpp"
#include "corstitch/ingest.hpp"
#include "util.hpp"

using namespace corstitch;

namespace {

void write_frame(const std::filesystem::path& dir, std::size_t index, const Image& img) {
    char name[32];
    std::snprintf(name, sizeof name, "frame_%06zu.png", index);
    write_png(dir / name, img);
}

}  // namespace

TEST_CASE("frame directory timestamps are index / fps") {
    testutil::TempDir tmp("frames");
    for (std::size_t i = 0; i < 3; ++i) write_frame(tmp.path(), i, testutil::solid_image(20, 24, 1, 2, 3));
    const auto frames = load_frame_sequence(tmp.path(), 30.0);
    REQUIRE(frames.size() == 3);
    CHECK(frames[0].timestamp == 0.0);
    CHECK(frames[1].timestamp == doctest::Approx(1.0 / 30.0));
    CHECK(frames[2].timestamp == doctest::Approx(2.0 / 30.0));
    CHECK(frames[2].rows() == 20);
    CHECK(frames[2].cols() == 24);
}

TEST_CASE("150 frames at 30 fps end at 149/30 s") {
    std::vector<Frame> frames;
    for (std::size_t i = 0; i < 150; ++i) frames.push_back(make_frame(i, 30.0, testutil::solid_image(16, 16, 0, 0, 0)));
    CHECK(frames.back().timestamp == doctest::Approx(4.966666666).epsilon(1e-9));
}

TEST_CASE("gap in frame numbering is reported") {
    testutil::TempDir tmp("gap");
    write_frame(tmp.path(), 0, testutil::solid_image(16, 16, 0, 0, 0));
    write_frame(tmp.path(), 2, testutil::solid_image(16, 16, 0, 0, 0));
    CHECK_THROWS_WITH_AS(load_frame_sequence(tmp.path(), 30.0), "missing frame 1", Error);
}

TEST_CASE("empty directory and dimension mismatch") {
    testutil::TempDir tmp("bad");
    CHECK_THROWS_AS(load_frame_sequence(tmp.path(), 30.0), Error);
    write_frame(tmp.path(), 0, testutil::solid_image(16, 16, 0, 0, 0));
    write_frame(tmp.path(), 1, testutil::solid_image(16, 20, 0, 0, 0));
    try {
        load_frame_sequence(tmp.path(), 30.0);
        FAIL("expected dimension mismatch");
    } catch (const Error& e) {
        CHECK(std::string(e.what()).find("dimension mismatch") != std::string::npos);
        CHECK(e.stage() == Stage::ingest);
    }
}

TEST_CASE("ppm and png frames read back identically") {
    testutil::TempDir tmp("ppm");
    Image img(17, 19, 3);
    for (std::size_t i = 0; i < img.pixels.size(); ++i) img.pixels[i] = static_cast<std::uint8_t>(i * 7);
    write_ppm(tmp.path() / "a.ppm", img);
    write_png(tmp.path() / "a.png", img);
    CHECK(read_image(tmp.path() / "a.ppm").pixels == img.pixels);
    CHECK(read_image(tmp.path() / "a.png").pixels == img.pixels);
}

TEST_CASE("rgba png keeps alpha in memory, frames read as rgb") {
    testutil::TempDir tmp("rgba");
    Image img(5, 7, 4, 200);
    img.at(2, 3)[3] = 0;
    CHECK(decode_png(encode_png(img)) == img);
    write_png(tmp.path() / "a.png", img);
    CHECK(read_image(tmp.path() / "a.png").channels == 3);
}

TEST_CASE("directory source with read-ahead matches sequential load") {
    testutil::TempDir tmp("ahead");
    for (std::size_t i = 0; i < 11; ++i)
        write_frame(tmp.path(), i, testutil::solid_image(16, 16, static_cast<std::uint8_t>(i), 0, 0));
    DirectoryFrameSource src(tmp.path(), 30.0, 4);
    std::size_t n = 0;
    while (auto f = src.next()) {
        CHECK(f->index == n);
        CHECK(f->pixels->at(0, 0)[0] == n);
        ++n;
    }
    CHECK(n == 11);
}

TEST_CASE("gps csv parsing") {
    SUBCASE("two rows one second apart") {
        const auto track = parse_gps_track_text(
            "date,time,latitude,longitude\n2024-01-01,00:00:00,13.8,120.6\n2024-01-01,00:00:01,13.8001,120.6001\n");
        REQUIRE(track.fixes.size() == 2);
        CHECK(track.fixes[1].time - track.fixes[0].time == doctest::Approx(1.0));
        CHECK(track.fixes[1].lat == doctest::Approx(13.8001));
        CHECK(track.fixes[0].time == doctest::Approx(1704067200.0));
    }
    SUBCASE("latitude out of range names the line") {
        CHECK_THROWS_WITH_AS(parse_gps_track_text("date,time,latitude,longitude\n"
                                                  "2024-01-01,00:00:00,13.8,120.6\n"
                                                  "2024-01-01,00:00:01,95.0,120.6\n"),
                             "latitude out of range, line 3", Error);
    }
    SUBCASE("duplicate timestamps are averaged") {
        const auto track = parse_gps_track_text("date,time,lat,lon\n"
                                                "2024-01-01,00:00:00,13.8,120.6\n"
                                                "2024-01-01,00:00:00,13.9,120.6\n"
                                                "2024-01-01,00:00:05,14.0,120.6\n");
        REQUIRE(track.fixes.size() == 2);
        CHECK(track.fixes[0].lat == doctest::Approx(13.85));
    }
    SUBCASE("missing column") {
        CHECK_THROWS_WITH_AS(parse_gps_track_text("date,time,latitude\n2024-01-01,00:00:00,13.8\n"),
                             "missing column longitude", Error);
    }
    SUBCASE("bad time") {
        CHECK_THROWS_WITH_AS(parse_gps_track_text("date,time,latitude,longitude\n2024-01-01,noon,13.8,120.6\n"),
                             "unparsable time, line 2", Error);
    }
    SUBCASE("single fix") {
        CHECK_THROWS_AS(parse_gps_track_text("date,time,latitude,longitude\n2024-01-01,00:00:00,13.8,120.6\n"),
                        Error);
    }
    SUBCASE("format and parse round trip") {
        GeoTrack t;
        t.fixes = {{1704067200.25, 13.8000000001, 120.6}, {1704067201.5, -12.5, -70.25}};
        const auto back = parse_gps_track_text(format_gps_track(t));
        REQUIRE(back.fixes.size() == 2);
        for (std::size_t i = 0; i < 2; ++i) {
            CHECK(back.fixes[i].time == doctest::Approx(t.fixes[i].time).epsilon(1e-12));
            CHECK(std::abs(back.fixes[i].lat - t.fixes[i].lat) < 1e-10);
            CHECK(std::abs(back.fixes[i].lon - t.fixes[i].lon) < 1e-10);
        }
    }
}

TEST_CASE("green channel projection") {
    CHECK(green_channel(testutil::solid_image(16, 16, 10, 200, 30))(3, 4) == 200.0);
    const auto black = green_channel(testutil::solid_image(16, 16, 0, 0, 0));
    for (double v : black.values()) CHECK(v == 0.0);
    Image img(16, 16, 3);
    for (std::size_t i = 0; i < 256; ++i) img.pixels[3 * i] = img.pixels[3 * i + 1] = static_cast<std::uint8_t>(i);
    const auto g = green_channel(img);
    for (std::size_t i = 0; i < 256; ++i) CHECK(g.values()[i] == static_cast<double>(img.pixels[3 * i]));
}

TEST_CASE("central strip geometry") {
    RealGrid channel(480, 10);
    for (std::size_t r = 0; r < 480; ++r)
        for (std::size_t c = 0; c < 10; ++c) channel(r, c) = static_cast<double>(r);
    const auto strip = central_strip(channel, 95.0 / 480.0);
    CHECK(strip.top == 192);
    CHECK(strip.rows() == 95);
    CHECK(strip.pixels(0, 0) == 192.0);
    CHECK(strip.pixels(94, 9) == 286.0);

    CHECK(central_strip(channel, 1.0).pixels == channel);
    CHECK_THROWS_AS(strip_geometry(10, 0.5), Error);
}
