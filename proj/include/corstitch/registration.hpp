#pragma once

#include <cmath>
#include <optional>

#include "corstitch/grid.hpp"
#include "corstitch/image.hpp"
#include "corstitch/ingest.hpp"

namespace corstitch {

enum class CorrelationKind { cc, pc };

const char* kind_name(CorrelationKind kind) noexcept;

/// Correlation scores over all circular shifts, stored with centred indexing: cell (r, c)
/// holds the score for dy = r - rows/2, dx = c - cols/2 (integer division). The covered
/// ranges are dx in [-floor(W/2), ceil(W/2) - 1] and likewise for dy over the strip height.
struct CorrelationSurface {
    RealGrid values;
    CorrelationKind kind = CorrelationKind::cc;

    int min_dx() const { return -static_cast<int>(values.cols() / 2); }
    int max_dx() const { return static_cast<int>((values.cols() + 1) / 2) - 1; }
    int min_dy() const { return -static_cast<int>(values.rows() / 2); }
    int max_dy() const { return static_cast<int>((values.rows() + 1) / 2) - 1; }

    double at(int dx, int dy) const {
        return values(static_cast<std::size_t>(dy - min_dy()), static_cast<std::size_t>(dx - min_dx()));
    }
};

/// Integer displacement of g relative to f. Positive dx: scene moved right in g;
/// positive dy: scene moved down.
struct Shift {
    int dx = 0;
    int dy = 0;
    CorrelationKind source = CorrelationKind::cc;

    long long squared_magnitude() const { return 1LL * dx * dx + 1LL * dy * dy; }
    double magnitude() const { return std::sqrt(static_cast<double>(squared_magnitude())); }
    Shift operator-() const { return {-dx, -dy, source}; }
    bool same_offset(const Shift& other) const { return dx == other.dx && dy == other.dy; }
};

struct RegistrationOptions {
    /// Subtract each strip's mean before the cross-correlation. Off reproduces the raw
    /// product of spectra; on keeps flat bright scenes from pinning the peak at zero.
    bool cc_mean_subtract = true;
};

CorrelationSurface cross_correlation_surface(const RealGrid& f, const RealGrid& g,
                                             const RegistrationOptions& options = {});
CorrelationSurface cross_correlation_surface(const Strip& f, const Strip& g,
                                             const RegistrationOptions& options = {});

/// Throws DegeneratePairError when either strip is constant (zero cross-power spectrum
/// after mean removal).
CorrelationSurface phase_correlation_surface(const RealGrid& f, const RealGrid& g);
CorrelationSurface phase_correlation_surface(const Strip& f, const Strip& g);

/// Global maximum in centred coordinates; ties go to the smallest magnitude, then the
/// smallest dy, then the smallest dx.
Shift locate_peak(const CorrelationSurface& surface);

struct ShiftEstimate {
    Shift chosen;
    Shift cc;
    std::optional<Shift> pc;  ///< empty when the phase correlation was degenerate
};

/// Peaks of both surfaces; the one with the smaller displacement wins, phase correlation on
/// ties. Throws DegeneratePairError when both strips are constant.
ShiftEstimate estimate_shift_detailed(const RealGrid& f, const RealGrid& g,
                                      const RegistrationOptions& options = {});
Shift estimate_shift(const RealGrid& f, const RealGrid& g, const RegistrationOptions& options = {});
Shift estimate_shift(const Strip& f, const Strip& g, const RegistrationOptions& options = {});

/// Circularly shifts a grid so that out(r + dy, c + dx) = in(r, c) (indices wrap).
RealGrid circular_shift(const RealGrid& in, int dx, int dy);

/// Grayscale rendering of a surface (min..max stretched to 0..255) for inspection.
Image surface_to_image(const CorrelationSurface& surface);

}  // namespace corstitch
