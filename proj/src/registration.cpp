#include "corstitch/registration.hpp"
#include "corstitch/error.hpp"
#include "corstitch/fft.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace corstitch {

const char* kind_name(CorrelationKind kind) noexcept { return kind == CorrelationKind::cc ? "CC" : "PC"; }

namespace {

void require_same_shape(const RealGrid& f, const RealGrid& g) {
    if (f.rows() != g.rows() || f.cols() != g.cols())
        throw Error(Stage::registration, "dimension mismatch: " + std::to_string(f.cols()) + "x" +
                                             std::to_string(f.rows()) + " vs " + std::to_string(g.cols()) +
                                             "x" + std::to_string(g.rows()));
    if (f.empty()) throw Error(Stage::registration, "empty strip");
}

bool is_constant(const RealGrid& grid) {
    const auto [lo, hi] = std::minmax_element(grid.values().begin(), grid.values().end());
    return *lo == *hi;
}

RealGrid mean_subtracted(const RealGrid& grid) {
    const auto vals = grid.values();
    const double mean = std::accumulate(vals.begin(), vals.end(), 0.0) / static_cast<double>(vals.size());
    RealGrid out = grid;
    for (auto& v : out.values()) v -= mean;
    return out;
}

/// conj(F) o G, entry-wise.
ComplexGrid cross_power(const RealGrid& f, const RealGrid& g) {
    auto spec_f = fft2(f);
    const auto spec_g = fft2(g);
    auto a = spec_f.values();
    const auto b = spec_g.values();
    for (std::size_t i = 0; i < a.size(); ++i) a[i] = std::conj(a[i]) * b[i];
    return spec_f;
}

/// Real part of a raw-indexed correlation, reordered so zero shift sits at (rows/2, cols/2).
RealGrid centre(const ComplexGrid& raw) {
    const std::size_t rows = raw.rows(), cols = raw.cols();
    RealGrid out(rows, cols);
    for (std::size_t r = 0; r < rows; ++r) {
        const std::size_t rr = (r + rows / 2) % rows;
        for (std::size_t c = 0; c < cols; ++c) out(rr, (c + cols / 2) % cols) = raw(r, c).real();
    }
    return out;
}

}  // namespace

CorrelationSurface cross_correlation_surface(const RealGrid& f, const RealGrid& g,
                                             const RegistrationOptions& options) {
    require_same_shape(f, g);
    const auto spectrum = options.cc_mean_subtract ? cross_power(mean_subtracted(f), mean_subtracted(g))
                                                   : cross_power(f, g);
    return {centre(ifft2(spectrum)), CorrelationKind::cc};
}

CorrelationSurface cross_correlation_surface(const Strip& f, const Strip& g, const RegistrationOptions& options) {
    return cross_correlation_surface(f.pixels, g.pixels, options);
}

CorrelationSurface phase_correlation_surface(const RealGrid& f, const RealGrid& g) {
    require_same_shape(f, g);
    if (is_constant(f) || is_constant(g)) throw DegeneratePairError();

    auto spectrum = cross_power(mean_subtracted(f), mean_subtracted(g));
    double peak = 0.0;
    for (const auto& v : spectrum.values()) peak = std::max(peak, std::abs(v));
    if (!(peak > 0.0)) throw DegeneratePairError();

    const double eps = 1e-12 * peak;
    for (auto& v : spectrum.values()) v /= std::abs(v) + eps;
    return {centre(ifft2(spectrum)), CorrelationKind::pc};
}

CorrelationSurface phase_correlation_surface(const Strip& f, const Strip& g) {
    return phase_correlation_surface(f.pixels, g.pixels);
}

Shift locate_peak(const CorrelationSurface& surface) {
    const auto& v = surface.values;
    Shift best{0, 0, surface.kind};
    double best_value = -std::numeric_limits<double>::infinity();
    bool found = false;
    for (std::size_t r = 0; r < v.rows(); ++r) {
        for (std::size_t c = 0; c < v.cols(); ++c) {
            const double value = v(r, c);
            if (!std::isfinite(value)) continue;
            const Shift cand{static_cast<int>(c) + surface.min_dx(), static_cast<int>(r) + surface.min_dy(),
                             surface.kind};
            bool better = !found || value > best_value;
            if (found && value == best_value) {
                const auto cm = cand.squared_magnitude(), bm = best.squared_magnitude();
                better = cm < bm || (cm == bm && (cand.dy < best.dy || (cand.dy == best.dy && cand.dx < best.dx)));
            }
            if (better) {
                best = cand;
                best_value = value;
                found = true;
            }
        }
    }
    return best;
}

ShiftEstimate estimate_shift_detailed(const RealGrid& f, const RealGrid& g, const RegistrationOptions& options) {
    require_same_shape(f, g);
    if (is_constant(f) && is_constant(g)) throw DegeneratePairError();

    ShiftEstimate est;
    est.cc = locate_peak(cross_correlation_surface(f, g, options));
    try {
        est.pc = locate_peak(phase_correlation_surface(f, g));
    } catch (const DegeneratePairError&) {
        est.pc.reset();
    }
    est.chosen = est.pc && est.pc->squared_magnitude() <= est.cc.squared_magnitude() ? *est.pc : est.cc;
    return est;
}

Shift estimate_shift(const RealGrid& f, const RealGrid& g, const RegistrationOptions& options) {
    return estimate_shift_detailed(f, g, options).chosen;
}

Shift estimate_shift(const Strip& f, const Strip& g, const RegistrationOptions& options) {
    return estimate_shift(f.pixels, g.pixels, options);
}

RealGrid circular_shift(const RealGrid& in, int dx, int dy) {
    const auto rows = static_cast<long>(in.rows()), cols = static_cast<long>(in.cols());
    RealGrid out(in.rows(), in.cols());
    for (long r = 0; r < rows; ++r) {
        const auto rr = static_cast<std::size_t>(((r + dy) % rows + rows) % rows);
        for (long c = 0; c < cols; ++c) {
            const auto cc = static_cast<std::size_t>(((c + dx) % cols + cols) % cols);
            out(rr, cc) = in(static_cast<std::size_t>(r), static_cast<std::size_t>(c));
        }
    }
    return out;
}

Image surface_to_image(const CorrelationSurface& surface) {
    const auto& v = surface.values;
    const auto [lo, hi] = std::minmax_element(v.values().begin(), v.values().end());
    const double span = *hi - *lo;
    Image img(v.rows(), v.cols(), 3);
    for (std::size_t r = 0; r < v.rows(); ++r) {
        for (std::size_t c = 0; c < v.cols(); ++c) {
            const double t = span > 0.0 ? (v(r, c) - *lo) / span : 0.0;
            const auto level = static_cast<std::uint8_t>(std::lround(255.0 * t));
            auto* px = img.at(r, c);
            px[0] = px[1] = px[2] = level;
        }
    }
    return img;
}

}  // namespace corstitch
