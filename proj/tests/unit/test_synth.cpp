#include <doctest.h>

#include <fstream>
#include <iterator>

#include "corstitch/error.hpp"
#include "corstitch/ingest.hpp"
#include "corstitch/synth.hpp"
#include "util.hpp"

using namespace corstitch;

namespace {

SurveyParams tiny(std::size_t frames) {
    SurveyParams p;
    p.frame_count = frames;
    p.frame_rows = 48;
    p.frame_cols = 64;
    p.texture_rows = 256;
    p.texture_cols = 256;
    p.strip_fraction = 0.25;
    return p;
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

double mean_green(const Frame& f) {
    double s = 0.0;
    for (double v : green_channel(f).values()) s += v;
    return s / static_cast<double>(f.rows() * f.cols());
}

}  // namespace

TEST_CASE("constant profile ground truth") {
    testutil::TempDir tmp("gt");
    auto p = tiny(150);
    const auto survey = generate_survey(1, p);
    REQUIRE(survey.true_shifts.size() == 149);
    for (const auto& s : survey.true_shifts) CHECK(s.same_offset({0, -4}));
    write_survey(survey, tmp.path(), "ppm");
    const auto gt = read_ground_truth(tmp.path() / "ground_truth.json");
    REQUIRE(gt.shifts.size() == 149);
    CHECK(gt.shifts.back().same_offset({0, -4}));
    CHECK(gt.fps == 30.0);
    CHECK(std::filesystem::exists(tmp.path() / "frames" / "frame_000149.ppm"));
    const auto track = parse_gps_track(tmp.path() / "gps.csv");
    CHECK(track.fixes.size() >= 5);
}

TEST_CASE("noise-free frames are texture crops") {
    auto p = tiny(5);
    p.shift_profile.dx = 3;
    p.shift_profile.dy = -5;
    const auto survey = generate_survey(9, p);
    for (std::size_t k = 0; k < 5; ++k) {
        const auto f = survey.render_frame(k);
        const auto& o = survey.path[k];
        for (std::size_t r = 0; r < p.frame_rows; r += 7)
            for (std::size_t c = 0; c < p.frame_cols; c += 5) {
                const auto* t = survey.texel(o.y + static_cast<long>(r), o.x + static_cast<long>(c));
                for (int ch = 0; ch < 3; ++ch) CHECK(f.pixels->at(r, c)[ch] == t[ch]);
            }
        if (k > 0) {
            CHECK(survey.path[k].x == survey.path[k - 1].x - 3);
            CHECK(survey.path[k].y == survey.path[k - 1].y + 5);
        }
    }
}

TEST_CASE("sand brightens frames") {
    auto p = tiny(20);
    const auto plain = generate_survey(3, p);
    p.sand_fraction = 0.6;
    const auto sandy = generate_survey(3, p);
    double plain_mean = 0.0, sandy_mean = 0.0;
    for (std::size_t k = 0; k < 20; ++k) {
        plain_mean += mean_green(plain.render_frame(k));
        sandy_mean += mean_green(sandy.render_frame(k));
    }
    CHECK(sandy_mean > plain_mean);
}

TEST_CASE("same seed, same bytes") {
    testutil::TempDir a("det_a"), b("det_b");
    auto p = tiny(6);
    p.noise_sigma = 4.0;
    p.blur_sigma = 2.0;
    p.vignette = 0.3;
    p.shift_profile.kind = ShiftProfile::Kind::random;
    p.shift_profile.max_magnitude = 4.0;
    write_survey(generate_survey(42, p), a.path(), "png", 1);
    write_survey(generate_survey(42, p), b.path(), "png", 3);
    for (const auto* name : {"gps.csv", "ground_truth.json", "frames/frame_000000.png", "frames/frame_000005.png"})
        CHECK(slurp(a.path() / name) == slurp(b.path() / name));
    CHECK(generate_survey(43, p).true_shifts.size() == 5);
}

TEST_CASE("shift profile bounds") {
    auto p = tiny(4);
    p.shift_profile.dy = -7;  // strip_h = 12, registrable |dy| <= 6
    CHECK_THROWS_AS(generate_survey(1, p), Error);
    p.shift_profile.dy = -6;
    CHECK_NOTHROW(generate_survey(1, p));
    p.shift_profile.kind = ShiftProfile::Kind::random;
    p.shift_profile.max_magnitude = 4.0;
    p.shift_profile.forward_only = true;
    for (const auto& s : generate_survey(2, p).true_shifts) {
        CHECK(s.dy < 0);
        CHECK(s.squared_magnitude() <= 16);
    }
}

TEST_CASE("brute-force oracle") {
    RealGrid f(2, 2, 0.0), g(2, 2, 0.0);
    f(0, 0) = 1.0;
    g(0, 1) = 1.0;
    // +1 and -1 columns alias on a 2-wide grid; the centred window reads it as dx = -1.
    const auto s = brute_force_correlation(f, g, CorrelationKind::cc, false);
    CHECK(s.at(-1, 0) == 1.0);
    CHECK(s.at(0, 0) == 0.0);
    CHECK(s.at(-1, -1) == 0.0);

    std::mt19937_64 rng(5);
    const auto h = testutil::random_grid(9, 7, rng);
    for (auto kind : {CorrelationKind::cc, CorrelationKind::pc}) {
        const auto auto_surface = brute_force_correlation(h, h, kind);
        double best = -1e300;
        int bx = 99, by = 99;
        for (int dy = auto_surface.min_dy(); dy <= auto_surface.max_dy(); ++dy)
            for (int dx = auto_surface.min_dx(); dx <= auto_surface.max_dx(); ++dx)
                if (auto_surface.at(dx, dy) > best) best = auto_surface.at(dx, dy), bx = dx, by = dy;
        CHECK(bx == 0);
        CHECK(by == 0);
    }
    CHECK_THROWS_AS(brute_force_correlation(RealGrid(33, 4, 1.0), RealGrid(33, 4, 1.0), CorrelationKind::cc), Error);
}

TEST_CASE("recovery scoring") {
    std::vector<Shift> truth(149, Shift{0, -4});
    CHECK(score_recovery(truth, truth).exact_rate == 1.0);
    auto est = truth;
    est[10] = {3, 0};
    const auto r = score_recovery(truth, est);
    CHECK(r.exact_rate == doctest::Approx(148.0 / 149.0));
    CHECK(r.mean_abs_error_px == doctest::Approx(5.0 / 149.0));
    REQUIRE(r.failures.size() == 1);
    CHECK(r.failures[0].pair == 10);
    CHECK_THROWS_AS(score_recovery(truth, {}), Error);
}
