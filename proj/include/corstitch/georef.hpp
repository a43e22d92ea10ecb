#pragma once

#include <array>

#include "corstitch/ingest.hpp"

namespace corstitch {

inline constexpr double kEarthRadiusM = 6'371'000.0;

enum class OffsetMode {
    /// Literal formulas: dl_h shifts latitude, dl_v shifts longitude, no heading term.
    paper,
    /// (dl_h, dl_v) read as (east, north) metres.
    heading_aligned,
};

const char* offset_mode_name(OffsetMode mode) noexcept;
OffsetMode parse_offset_mode(const std::string& text);

struct GeoConfig {
    double earth_radius_m = kEarthRadiusM;
    double mosaic_width_m = 3.0;
    OffsetMode offset_mode = OffsetMode::heading_aligned;
};

struct LatLon {
    double lat = 0.0;
    double lon = 0.0;
};

/// Four corners ordered lower-left, lower-right, upper-right, upper-left when facing along
/// the tow ("lower" is the start end), i.e. counter-clockwise seen from above.
struct GeoQuad {
    std::array<LatLon, 4> corners;
    GeoFix center_start;
    GeoFix center_end;
    double heading_deg = 0.0;
};

/// Linear interpolation of the track at track time t (absolute UTC seconds).
GeoFix interpolate_fix(const GeoTrack& track, double t);

/// Metric displacement to a new position on a spherical earth.
GeoFix geodesic_offset(const GeoFix& fix, double dl_h, double dl_v, const GeoConfig& config);

/// Exact algebraic inverse of geodesic_offset: recovers the fix that offset by (dl_h, dl_v)
/// lands on `moved`.
GeoFix inverse_geodesic_offset(const GeoFix& moved, double dl_h, double dl_v, const GeoConfig& config);

/// Equirectangular bearing from a to b, degrees clockwise from north in [0, 360).
double bearing_deg(const LatLon& a, const LatLon& b);

/// Bearing of the track segment bracketing track time t.
double track_heading(const GeoTrack& track, double t);

/// Mosaic time span in frame seconds; mapped onto the track through track.epoch_offset.
struct MosaicSpan {
    double start_time = 0.0;
    double end_time = 0.0;
};

GeoQuad mosaic_quad(const MosaicSpan& span, const GeoTrack& track, const GeoConfig& config);

}  // namespace corstitch
