#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "corstitch/image.hpp"
#include "corstitch/ingest.hpp"
#include "corstitch/registration.hpp"

namespace corstitch {

// --- synthetic surveys ---------------------------------------------------------

struct ShiftProfile {
    enum class Kind { constant, random, list };
    Kind kind = Kind::constant;
    int dx = 0;  ///< constant: per-frame scene shift
    int dy = -4;
    /// random: integer shifts with magnitude <= max_magnitude, drawn per frame from the seed.
    double max_magnitude = 0.0;
    /// random: restrict to dy < 0 (scene always moving along the tow).
    bool forward_only = false;
    /// list: explicit per-pair shifts, length frame_count - 1.
    std::vector<Shift> shifts;
};

struct SurveyParams {
    std::size_t frame_count = 150;
    std::size_t frame_rows = 240;
    std::size_t frame_cols = 320;
    std::size_t texture_rows = 1024;
    std::size_t texture_cols = 1024;
    std::size_t texture_cells = 16;    ///< lattice cells across the texture at the coarsest octave
    double texture_persistence = 1.0;  ///< amplitude ratio between successive octaves
    ShiftProfile shift_profile;
    double noise_sigma = 0.0;     ///< additive Gaussian noise, 8-bit levels
    double sand_fraction = 0.0;   ///< share of the texture covered by bright sand patches
    double blur_sigma = 0.0;      ///< mean along-track motion-blur spread, pixels
    double vignette = 0.0;        ///< camera-fixed brightness falloff at the frame corners, 0..1
    double meters_per_pixel = 0.0;  ///< 0 picks 3 m across the frame width
    double fps = 30.0;
    double strip_fraction = kDefaultStripFraction;
    double origin_lat = 13.8;
    double origin_lon = 120.6;
    double start_utc = 1'704'067'200.0;  ///< 2024-01-01T00:00:00Z
    double gps_interval = 1.0;           ///< seconds between fixes
};

struct PathPoint {
    long x = 0;  ///< texture column of the frame's left edge (unwrapped)
    long y = 0;  ///< texture row of the frame's top edge (unwrapped)
};

/// Survey over a toroidal texture. Frame k is the crop at path[k] (indices wrap), degraded in
/// fixed order: motion blur, brightness field, additive noise, 8-bit quantisation. Texture
/// +x is east and +y is south; the GPS track follows the frame centre.
class SyntheticSurvey {
public:
    std::uint64_t seed = 0;
    SurveyParams params;
    Image texture;
    std::vector<PathPoint> path;
    std::vector<Shift> true_shifts;  ///< shift of frame k+1 relative to frame k
    GeoTrack track;

    double meters_per_pixel() const;
    Frame render_frame(std::size_t index) const;
    std::vector<Frame> render_frames(std::size_t threads = 1) const;
    GeneratedFrameSource frame_source() const;

    /// Position of frame k's centre in degrees, from the path and scale alone.
    GeoFix true_position(std::size_t index) const;

    /// Texture pixel at an unwrapped texture coordinate.
    const std::uint8_t* texel(long y, long x) const;
};

SyntheticSurvey generate_survey(std::uint64_t seed, const SurveyParams& params);

/// Writes frames/frame_%06d.<ext>, gps.csv and ground_truth.json under out_dir.
void write_survey(const SyntheticSurvey& survey, const std::filesystem::path& out_dir,
                  const std::string& image_ext = "png", std::size_t threads = 1);

nlohmann::json ground_truth_json(const SyntheticSurvey& survey);

struct GroundTruth {
    std::vector<Shift> shifts;
    double fps = 30.0;
    double strip_fraction = kDefaultStripFraction;
};

GroundTruth read_ground_truth(const std::filesystem::path& path);

// --- oracles -------------------------------------------------------------------

inline constexpr std::size_t kBruteForceMaxSide = 32;

/// Direct evaluation without FFTs: circular spatial correlation sum for CC, naive DFTs for
/// PC. Same mean removal, regularisation and centred layout as the FFT path. Sides over 32
/// are refused.
CorrelationSurface brute_force_correlation(const RealGrid& f, const RealGrid& g, CorrelationKind kind,
                                           bool mean_subtract = true);

struct RecoveryFailure {
    std::size_t pair = 0;
    Shift truth;
    Shift estimate;
};

struct RecoveryReport {
    double exact_rate = 0.0;
    double mean_abs_error_px = 0.0;  ///< mean Euclidean distance between estimate and truth
    std::vector<RecoveryFailure> failures;
};

RecoveryReport score_recovery(const std::vector<Shift>& truth, const std::vector<Shift>& estimates);
RecoveryReport score_recovery(const SyntheticSurvey& survey, const std::vector<Shift>& estimates);

nlohmann::json to_json(const RecoveryReport& report);

}  // namespace corstitch
