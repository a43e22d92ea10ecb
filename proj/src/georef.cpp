#include "corstitch/georef.hpp"
#include "corstitch/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace corstitch {
namespace {

constexpr double kDegPerRad = 180.0 / std::numbers::pi;
constexpr double kMinCosLat = 1e-6;
// Slack for frame-time arithmetic landing a hair outside the last fix.
constexpr double kTimeSlack = 1e-6;

double cos_lat(double lat_deg) {
    const double c = std::cos(lat_deg / kDegPerRad);
    if (!(c >= kMinCosLat)) throw Error(Stage::georef, "polar degeneracy: cos(lat) below 1e-6");
    return c;
}

void check_config(const GeoConfig& config) {
    if (!(config.earth_radius_m > 0.0)) throw Error(Stage::georef, "earth_radius_m must be positive");
    if (!(config.mosaic_width_m > 0.0)) throw Error(Stage::georef, "mosaic_width_m must be positive");
}

std::size_t segment_index(const GeoTrack& track, double t) {
    const auto& fixes = track.fixes;
    if (fixes.size() < 2) throw Error(Stage::georef, "GPS track needs at least 2 fixes");
    if (!(t >= fixes.front().time - kTimeSlack && t <= fixes.back().time + kTimeSlack))
        throw Error(Stage::georef, "time outside GPS coverage");
    auto it = std::upper_bound(fixes.begin(), fixes.end(), t,
                               [](double value, const GeoFix& fix) { return value < fix.time; });
    const auto upper = static_cast<std::size_t>(it - fixes.begin());
    return std::clamp<std::size_t>(upper, 1, fixes.size() - 1) - 1;
}

}  // namespace

const char* offset_mode_name(OffsetMode mode) noexcept {
    return mode == OffsetMode::paper ? "paper" : "heading_aligned";
}

OffsetMode parse_offset_mode(const std::string& text) {
    if (text == "paper") return OffsetMode::paper;
    if (text == "heading" || text == "heading_aligned") return OffsetMode::heading_aligned;
    throw Error(Stage::config, "unknown offset mode '" + text + "' (expected paper|heading)");
}

GeoFix interpolate_fix(const GeoTrack& track, double t) {
    const auto i = segment_index(track, t);
    const auto& a = track.fixes[i];
    const auto& b = track.fixes[i + 1];
    if (t <= a.time) return {t, a.lat, a.lon};
    if (t >= b.time) return {t, b.lat, b.lon};
    const double w = (t - a.time) / (b.time - a.time);
    return {t, a.lat + w * (b.lat - a.lat), a.lon + w * (b.lon - a.lon)};
}

GeoFix geodesic_offset(const GeoFix& fix, double dl_h, double dl_v, const GeoConfig& config) {
    check_config(config);
    const double r = config.earth_radius_m;
    const double c = cos_lat(fix.lat);
    GeoFix out = fix;
    if (config.offset_mode == OffsetMode::paper) {
        out.lat = fix.lat + dl_h / r * kDegPerRad;
        out.lon = fix.lon + dl_v / r * kDegPerRad / c;
    } else {
        out.lat = fix.lat + dl_v / r * kDegPerRad;
        out.lon = fix.lon + dl_h / r * kDegPerRad / c;
    }
    if (!(std::abs(out.lat) < 90.0)) throw Error(Stage::georef, "offset crosses a pole");
    return out;
}

GeoFix inverse_geodesic_offset(const GeoFix& moved, double dl_h, double dl_v, const GeoConfig& config) {
    check_config(config);
    const double r = config.earth_radius_m;
    GeoFix out = moved;
    const double dlat = (config.offset_mode == OffsetMode::paper ? dl_h : dl_v) / r * kDegPerRad;
    const double dlon_m = config.offset_mode == OffsetMode::paper ? dl_v : dl_h;
    out.lat = moved.lat - dlat;
    out.lon = moved.lon - dlon_m / r * kDegPerRad / cos_lat(out.lat);
    return out;
}

double bearing_deg(const LatLon& a, const LatLon& b) {
    const double dlat = b.lat - a.lat;
    const double dlon = b.lon - a.lon;
    if (dlat == 0.0 && dlon == 0.0) throw Error(Stage::georef, "stationary segment");
    const double mid_lat = 0.5 * (a.lat + b.lat) / kDegPerRad;
    double deg = std::atan2(dlon * std::cos(mid_lat), dlat) * kDegPerRad;
    if (deg < 0.0) deg += 360.0;
    return deg >= 360.0 ? deg - 360.0 : deg;
}

double track_heading(const GeoTrack& track, double t) {
    const auto i = segment_index(track, t);
    const auto& a = track.fixes[i];
    const auto& b = track.fixes[i + 1];
    return bearing_deg({a.lat, a.lon}, {b.lat, b.lon});
}

GeoQuad mosaic_quad(const MosaicSpan& span, const GeoTrack& track, const GeoConfig& config) {
    check_config(config);
    GeoQuad quad;
    quad.center_start = interpolate_fix(track, track.track_time(span.start_time));
    quad.center_end = interpolate_fix(track, track.track_time(span.end_time));
    quad.heading_deg = bearing_deg({quad.center_start.lat, quad.center_start.lon},
                                   {quad.center_end.lat, quad.center_end.lon});

    const double half = 0.5 * config.mosaic_width_m;
    // Across-track offsets (left, right) in the units geodesic_offset expects.
    double left_h = 0.0, left_v = 0.0;
    if (config.offset_mode == OffsetMode::paper) {
        left_h = half;  // horizontal shift applied to latitude as printed
    } else {
        const double theta = quad.heading_deg / kDegPerRad;
        left_h = -std::cos(theta) * half;  // east
        left_v = std::sin(theta) * half;   // north
    }
    auto at = [&](const GeoFix& centre, double sign) {
        const auto fix = geodesic_offset(centre, sign * left_h, sign * left_v, config);
        return LatLon{fix.lat, fix.lon};
    };
    quad.corners = {at(quad.center_start, 1.0), at(quad.center_start, -1.0), at(quad.center_end, -1.0),
                    at(quad.center_end, 1.0)};
    return quad;
}

}  // namespace corstitch
