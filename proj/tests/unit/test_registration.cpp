#include <doctest.h>

#include <cmath>
#include <random>

#include "corstitch/error.hpp"
#include "corstitch/registration.hpp"
#include "corstitch/synth.hpp"
#include "util.hpp"

using namespace corstitch;

namespace {

double rel_max_diff(const RealGrid& a, const RealGrid& b) {
    double diff = 0.0, scale = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        diff = std::max(diff, std::abs(a.values()[i] - b.values()[i]));
        scale = std::max(scale, std::abs(b.values()[i]));
    }
    return diff / std::max(scale, 1e-300);
}

CorrelationSurface delta_surface(std::size_t rows, std::size_t cols, std::vector<std::pair<int, int>> peaks) {
    CorrelationSurface s{RealGrid(rows, cols, 0.0), CorrelationKind::cc};
    for (auto [dx, dy] : peaks)
        s.values(static_cast<std::size_t>(dy - s.min_dy()), static_cast<std::size_t>(dx - s.min_dx())) = 1.0;
    return s;
}

}  // namespace

TEST_CASE("autocorrelation peaks at zero") {
    std::mt19937_64 rng(11);
    const auto f = testutil::random_grid(24, 40, rng);
    CHECK(locate_peak(cross_correlation_surface(f, f)).same_offset({0, 0}));
    CHECK(locate_peak(phase_correlation_surface(f, f)).same_offset({0, 0}));
}

TEST_CASE("shift theorem for both surfaces") {
    std::mt19937_64 rng(12);
    const auto f = testutil::random_grid(20, 32, rng);
    const auto g = circular_shift(f, 3, -2);
    CHECK(locate_peak(cross_correlation_surface(f, g)).same_offset({3, -2}));
    const auto h = circular_shift(f, 5, 1);
    const auto pc = phase_correlation_surface(f, h);
    CHECK(locate_peak(pc).same_offset({5, 1}));
    // near-delta; the mean-subtracted DC bin is missing from the sum
    CHECK(pc.at(5, 1) == doctest::Approx(639.0 / 640.0).epsilon(1e-9));
}

TEST_CASE("circular_shift convention") {
    RealGrid f(4, 5, 0.0);
    f(1, 2) = 7.0;
    const auto g = circular_shift(f, 2, -3);
    CHECK(g(2, 4) == 7.0);  // row (1-3) mod 4, col 2+2
}

TEST_CASE("FFT surfaces agree with the spatial sums") {
    std::mt19937_64 rng(13);
    for (auto [rows, cols] : {std::pair<std::size_t, std::size_t>{16, 16}, {13, 17}, {8, 9}}) {
        const auto f = testutil::random_grid(rows, cols, rng);
        const auto g = testutil::random_grid(rows, cols, rng);
        CHECK(rel_max_diff(cross_correlation_surface(f, g).values,
                           brute_force_correlation(f, g, CorrelationKind::cc).values) < 1e-6);
        CHECK(rel_max_diff(phase_correlation_surface(f, g).values,
                           brute_force_correlation(f, g, CorrelationKind::pc).values) < 1e-6);
        RegistrationOptions raw;
        raw.cc_mean_subtract = false;
        CHECK(rel_max_diff(cross_correlation_surface(f, g, raw).values,
                           brute_force_correlation(f, g, CorrelationKind::cc, false).values) < 1e-6);
    }
}

TEST_CASE("phase correlation ignores global dimming") {
    std::mt19937_64 rng(14);
    auto f = testutil::random_grid(16, 24, rng);
    auto g = f;
    for (auto& v : g.values()) v *= 0.5;
    CHECK(locate_peak(phase_correlation_surface(f, g)).same_offset({0, 0}));
}

TEST_CASE("constant strips are degenerate for phase correlation") {
    RealGrid a(8, 8, 3.0), b(8, 8, 9.0);
    CHECK_THROWS_AS(phase_correlation_surface(a, b), DegeneratePairError);
    CHECK_THROWS_WITH(phase_correlation_surface(a, b), "degenerate pair");
    CHECK_THROWS_AS(estimate_shift(a, b), Error);
}

TEST_CASE("dimension mismatch") {
    CHECK_THROWS_AS(cross_correlation_surface(RealGrid(8, 8, 1.0), RealGrid(8, 9, 1.0)), Error);
    CHECK_THROWS_AS(phase_correlation_surface(RealGrid(8, 8, 1.0), RealGrid(9, 8, 1.0)), Error);
}

TEST_CASE("locate_peak reads centred coordinates and breaks ties") {
    CHECK(locate_peak(delta_surface(9, 12, {{0, 0}})).same_offset({0, 0}));
    CHECK(locate_peak(delta_surface(16, 12, {{-4, 7}})).same_offset({-4, 7}));
    CHECK(locate_peak(delta_surface(9, 12, {{2, 0}, {-5, 0}})).same_offset({2, 0}));
    // equal magnitude: smaller dy, then smaller dx
    CHECK(locate_peak(delta_surface(9, 12, {{0, 2}, {2, 0}, {-2, 0}})).same_offset({-2, 0}));
    CHECK(locate_peak(delta_surface(9, 12, {{1, -1}, {-1, 1}})).same_offset({1, -1}));
}

TEST_CASE("estimate_shift selection") {
    std::mt19937_64 rng(15);
    const auto f = testutil::random_grid(32, 48, rng);

    SUBCASE("agreeing sources") {
        const auto est = estimate_shift_detailed(f, circular_shift(f, 0, -6));
        CHECK(est.cc.same_offset({0, -6}));
        REQUIRE(est.pc);
        CHECK(est.pc->same_offset({0, -6}));
        CHECK(est.chosen.same_offset({0, -6}));
        CHECK(est.chosen.source == CorrelationKind::pc);  // tie goes to PC
    }
    SUBCASE("constant g falls back to CC") {
        const auto s = estimate_shift(f, RealGrid(32, 48, 100.0));
        CHECK(s.source == CorrelationKind::cc);
    }
    SUBCASE("bright sand pulls CC away and PC wins") {
        // Scene moves (0,-3). Smooth bright blobs that do not follow the texture carry most of the
        // energy, so CC locks onto their offset; they occupy few frequency bins, so the whitened
        // spectrum still follows the texture.
        auto g = circular_shift(f, 0, -3);
        RealGrid fs = f, gs = g;
        auto blob = [](double r, double c, double r0, double c0) {
            return 900.0 * std::exp(-((r - r0) * (r - r0) + (c - c0) * (c - c0)) / (2.0 * 4.0 * 4.0));
        };
        for (std::size_t r = 0; r < 32; ++r)
            for (std::size_t c = 0; c < 48; ++c) {
                const double rr = static_cast<double>(r), cc = static_cast<double>(c);
                fs(r, c) += blob(rr, cc, 8.0, 10.0);
                gs(r, c) += blob(rr, cc, 22.0, 34.0);
            }
        const auto est = estimate_shift_detailed(fs, gs);
        REQUIRE(est.pc);
        CHECK(est.cc.squared_magnitude() > est.pc->squared_magnitude());
        CHECK(est.chosen.source == CorrelationKind::pc);
        CHECK(est.chosen.same_offset({0, -3}));
    }
}

TEST_CASE("mean subtraction switch changes only the raw surface") {
    std::mt19937_64 rng(16);
    const auto f = testutil::random_grid(16, 16, rng, 100.0, 110.0);
    RegistrationOptions raw;
    raw.cc_mean_subtract = false;
    const auto a = cross_correlation_surface(f, f);
    const auto b = cross_correlation_surface(f, f, raw);
    CHECK(b.at(3, 3) > a.at(3, 3));  // DC term dominates without the mean removed
}
