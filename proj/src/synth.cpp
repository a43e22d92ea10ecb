#include "corstitch/synth.hpp"
#include "corstitch/error.hpp"
#include "corstitch/georef.hpp"
#include "corstitch/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <random>

namespace corstitch {
namespace {

constexpr double kDegPerRad = 180.0 / std::numbers::pi;

// Palette constants (8-bit RGB). Reef texture interpolates between the two ends with the
// noise value; sand adds a faint grain on top of a bright base.
constexpr double kReefLow[3] = {15.0, 50.0, 45.0};
constexpr double kReefHigh[3] = {85.0, 220.0, 165.0};
constexpr double kSandBase[3] = {190.0, 200.0, 160.0};
constexpr double kSandGrain[3] = {25.0, 35.0, 25.0};

// Texture noise parameters.
constexpr std::size_t kOctaves = 8;

std::mt19937_64 make_rng(std::uint64_t seed, std::uint64_t stream, std::uint64_t item = 0) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(item),
                      static_cast<std::uint32_t>(item >> 32)};
    return std::mt19937_64(seq);
}

double smoothstep(double t) { return t * t * (3.0 - 2.0 * t); }

/// Periodic value noise with `cells_y` x `cells_x` lattice cells spanning the grid.
void add_value_noise(RealGrid& out, std::size_t cells_y, std::size_t cells_x, double amplitude,
                     std::mt19937_64& rng) {
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    RealGrid lattice(cells_y, cells_x);
    for (auto& v : lattice.values()) v = uni(rng);
    const double rows = static_cast<double>(out.rows()), cols = static_cast<double>(out.cols());
    for (std::size_t r = 0; r < out.rows(); ++r) {
        const double v = static_cast<double>(r) * static_cast<double>(cells_y) / rows;
        const auto y0 = static_cast<std::size_t>(v);
        const double ty = smoothstep(v - static_cast<double>(y0));
        const std::size_t ya = y0 % cells_y, yb = (y0 + 1) % cells_y;
        for (std::size_t c = 0; c < out.cols(); ++c) {
            const double u = static_cast<double>(c) * static_cast<double>(cells_x) / cols;
            const auto x0 = static_cast<std::size_t>(u);
            const double tx = smoothstep(u - static_cast<double>(x0));
            const std::size_t xa = x0 % cells_x, xb = (x0 + 1) % cells_x;
            const double top = lattice(ya, xa) + tx * (lattice(ya, xb) - lattice(ya, xa));
            const double bottom = lattice(yb, xa) + tx * (lattice(yb, xb) - lattice(yb, xa));
            out(r, c) += amplitude * (top + ty * (bottom - top));
        }
    }
}

/// Multi-octave periodic noise normalised to [0, 1].
RealGrid fractal_noise(std::size_t rows, std::size_t cols, std::size_t base_cells, std::size_t octaves,
                       double persistence, std::mt19937_64& rng) {
    RealGrid field(rows, cols, 0.0);
    double amplitude = 1.0;
    for (std::size_t o = 0; o < octaves; ++o) {
        const std::size_t cells = base_cells << o;
        if (cells * 2 > std::min(rows, cols)) break;
        add_value_noise(field, cells, cells, amplitude, rng);
        amplitude *= persistence;
    }
    const auto [lo, hi] = std::minmax_element(field.values().begin(), field.values().end());
    const double low = *lo, span = *hi - *lo;
    for (auto& v : field.values()) v = span > 0.0 ? (v - low) / span : 0.0;
    return field;
}

std::uint8_t quantize(double v) { return static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L)); }

Image make_texture(std::uint64_t seed, const SurveyParams& p) {
    auto rng = make_rng(seed, 1);
    const auto reef = fractal_noise(p.texture_rows, p.texture_cols, p.texture_cells, kOctaves, p.texture_persistence, rng);
    Image texture(p.texture_rows, p.texture_cols, 3);

    RealGrid sand_mask(p.texture_rows, p.texture_cols, 0.0);
    if (p.sand_fraction > 0.0) {
        const auto blobs = fractal_noise(p.texture_rows, p.texture_cols, 4, 3, 0.5, rng);
        const auto grain = fractal_noise(p.texture_rows, p.texture_cols, 128, 3, 0.5, rng);
        // Threshold at the (1 - fraction) quantile so the requested share of texels is sand.
        std::vector<double> sorted(blobs.values().begin(), blobs.values().end());
        const auto k = static_cast<std::size_t>(
            std::clamp((1.0 - p.sand_fraction) * static_cast<double>(sorted.size()), 0.0,
                       static_cast<double>(sorted.size() - 1)));
        std::nth_element(sorted.begin(), sorted.begin() + static_cast<long>(k), sorted.end());
        const double threshold = p.sand_fraction >= 1.0 ? -1.0 : sorted[k];
        for (std::size_t i = 0; i < sand_mask.size(); ++i)
            sand_mask.values()[i] = blobs.values()[i] > threshold ? 1.0 + grain.values()[i] : 0.0;
    }

    for (std::size_t r = 0; r < p.texture_rows; ++r) {
        for (std::size_t c = 0; c < p.texture_cols; ++c) {
            auto* px = texture.at(r, c);
            const double s = sand_mask(r, c);
            for (int ch = 0; ch < 3; ++ch) {
                const double v = s > 0.0 ? kSandBase[ch] + kSandGrain[ch] * (s - 1.0)
                                         : kReefLow[ch] + (kReefHigh[ch] - kReefLow[ch]) * reef(r, c);
                px[ch] = quantize(v);
            }
        }
    }
    return texture;
}

std::vector<Shift> make_shifts(std::uint64_t seed, const SurveyParams& p) {
    const std::size_t pairs = p.frame_count - 1;
    const auto& prof = p.shift_profile;
    std::vector<Shift> shifts;
    switch (prof.kind) {
        case ShiftProfile::Kind::constant:
            shifts.assign(pairs, Shift{prof.dx, prof.dy, CorrelationKind::cc});
            break;
        case ShiftProfile::Kind::list:
            if (prof.shifts.size() != pairs)
                throw Error(Stage::synth, "shift list needs frame_count - 1 entries");
            shifts = prof.shifts;
            break;
        case ShiftProfile::Kind::random: {
            auto rng = make_rng(seed, 2);
            const int bound = static_cast<int>(std::floor(prof.max_magnitude));
            if (bound < 1) throw Error(Stage::synth, "random shift profile needs max_magnitude >= 1");
            std::uniform_int_distribution<int> pick(-bound, bound);
            while (shifts.size() < pairs) {
                const Shift s{pick(rng), pick(rng), CorrelationKind::cc};
                if (s.magnitude() > prof.max_magnitude) continue;
                if (prof.forward_only && s.dy >= 0) continue;
                shifts.push_back(s);
            }
            break;
        }
    }
    return shifts;
}

long wrap(long v, std::size_t n) {
    const auto m = static_cast<long>(n);
    return ((v % m) + m) % m;
}

}  // namespace

// --- survey --------------------------------------------------------------------

SyntheticSurvey generate_survey(std::uint64_t seed, const SurveyParams& params) {
    if (params.frame_count < 2) throw Error(Stage::synth, "frame_count must be at least 2");
    if (params.frame_rows < kMinFrameSide || params.frame_cols < kMinFrameSide)
        throw Error(Stage::synth, "frame must be at least 16x16");
    if (params.texture_rows < params.frame_rows || params.texture_cols < params.frame_cols)
        throw Error(Stage::synth, "texture smaller than a frame");
    if (!(params.fps > 0.0) || !(params.gps_interval > 0.0)) throw Error(Stage::synth, "fps and gps_interval must be positive");
    if (params.noise_sigma < 0.0 || params.blur_sigma < 0.0 || params.vignette < 0.0 || params.vignette > 1.0 ||
        params.sand_fraction < 0.0 || params.sand_fraction > 1.0)
        throw Error(Stage::synth, "degradation parameter out of range");

    SyntheticSurvey survey;
    survey.seed = seed;
    survey.params = params;
    survey.true_shifts = make_shifts(seed, params);

    const auto strip_h = strip_geometry(params.frame_rows, params.strip_fraction).rows;
    const double limit = static_cast<double>(strip_h / 2);
    for (std::size_t i = 0; i < survey.true_shifts.size(); ++i) {
        if (survey.true_shifts[i].magnitude() > limit)
            throw Error(Stage::synth, "shift profile exceeding registrable range at pair " + std::to_string(i) +
                                          " (limit " + std::to_string(strip_h / 2) + " px)");
    }

    survey.path.resize(params.frame_count);
    for (std::size_t k = 1; k < params.frame_count; ++k) {
        const auto& s = survey.true_shifts[k - 1];
        survey.path[k] = {survey.path[k - 1].x - s.dx, survey.path[k - 1].y - s.dy};
    }

    survey.texture = make_texture(seed, params);

    // GPS fixes at a fixed interval over the whole stream; positions between frames follow the
    // path linearly, and the last segment's velocity carries past the final frame.
    const double last_time = static_cast<double>(params.frame_count - 1) / params.fps;
    const auto fix_count = static_cast<std::size_t>(std::ceil(last_time / params.gps_interval - 1e-9)) + 1;
    for (std::size_t s = 0; s < std::max<std::size_t>(fix_count, 2); ++s) {
        const double t = static_cast<double>(s) * params.gps_interval;
        const double kf = t * params.fps;
        const auto k0 = std::min(static_cast<std::size_t>(std::floor(kf)), params.frame_count - 2);
        const double w = kf - static_cast<double>(k0);
        const auto a = survey.true_position(k0);
        const auto b = survey.true_position(k0 + 1);
        survey.track.fixes.push_back(
            {params.start_utc + t, a.lat + w * (b.lat - a.lat), a.lon + w * (b.lon - a.lon)});
    }
    return survey;
}

double SyntheticSurvey::meters_per_pixel() const {
    return params.meters_per_pixel > 0.0 ? params.meters_per_pixel : 3.0 / static_cast<double>(params.frame_cols);
}

GeoFix SyntheticSurvey::true_position(std::size_t index) const {
    const auto& pt = path.at(index);
    const double cx = static_cast<double>(pt.x) + 0.5 * static_cast<double>(params.frame_cols);
    const double cy = static_cast<double>(pt.y) + 0.5 * static_cast<double>(params.frame_rows);
    const double scale = meters_per_pixel() / kEarthRadiusM * kDegPerRad;
    GeoFix fix;
    fix.time = params.start_utc + static_cast<double>(index) / params.fps;
    fix.lat = params.origin_lat - cy * scale;
    fix.lon = params.origin_lon + cx * scale / std::cos(params.origin_lat / kDegPerRad);
    return fix;
}

const std::uint8_t* SyntheticSurvey::texel(long y, long x) const {
    return texture.at(static_cast<std::size_t>(wrap(y, texture.rows)), static_cast<std::size_t>(wrap(x, texture.cols)));
}

Frame SyntheticSurvey::render_frame(std::size_t index) const {
    const auto& p = params;
    const auto& origin = path.at(index);

    // Motion blur: centred vertical box whose spread jitters per frame around blur_sigma.
    long half = 0;
    if (p.blur_sigma > 0.0) {
        auto rng = make_rng(seed, 3, index);
        std::uniform_real_distribution<double> jitter(0.5, 1.5);
        const double sigma = p.blur_sigma * jitter(rng);
        const double length = std::sqrt(12.0 * sigma * sigma + 1.0);
        half = std::max(1L, std::lround((length - 1.0) / 2.0));
    }
    const double taps = static_cast<double>(2 * half + 1);

    auto noise_rng = make_rng(seed, 4, index);
    std::normal_distribution<double> noise(0.0, p.noise_sigma > 0.0 ? p.noise_sigma : 1.0);

    const double cy = 0.5 * static_cast<double>(p.frame_rows - 1), cx = 0.5 * static_cast<double>(p.frame_cols - 1);
    const double rho_norm = cy * cy + cx * cx;

    Image img(p.frame_rows, p.frame_cols, 3);
    for (std::size_t r = 0; r < p.frame_rows; ++r) {
        for (std::size_t c = 0; c < p.frame_cols; ++c) {
            const long ty = origin.y + static_cast<long>(r);
            const long tx = origin.x + static_cast<long>(c);
            double acc[3] = {0.0, 0.0, 0.0};
            for (long j = -half; j <= half; ++j) {
                const auto* t = texel(ty + j, tx);
                for (int ch = 0; ch < 3; ++ch) acc[ch] += t[ch];
            }
            const double dr = static_cast<double>(r) - cy, dc = static_cast<double>(c) - cx;
            const double gain = 1.0 - p.vignette * (dr * dr + dc * dc) / rho_norm;
            auto* px = img.at(r, c);
            for (int ch = 0; ch < 3; ++ch) {
                double v = acc[ch] / taps * gain;
                if (p.noise_sigma > 0.0) v += noise(noise_rng);
                px[ch] = quantize(v);
            }
        }
    }
    return make_frame(index, p.fps, std::move(img));
}

std::vector<Frame> SyntheticSurvey::render_frames(std::size_t threads) const {
    std::vector<Frame> frames(params.frame_count);
    parallel_for(frames.size(), threads, [&](std::size_t i) { frames[i] = render_frame(i); });
    return frames;
}

GeneratedFrameSource SyntheticSurvey::frame_source() const {
    return GeneratedFrameSource(params.frame_count, [this](std::size_t i) { return render_frame(i); });
}

nlohmann::json ground_truth_json(const SyntheticSurvey& survey) {
    const auto& p = survey.params;
    nlohmann::json shifts = nlohmann::json::array(), path = nlohmann::json::array();
    for (const auto& s : survey.true_shifts) shifts.push_back({s.dx, s.dy});
    for (const auto& pt : survey.path) path.push_back({pt.x, pt.y});
    return {{"format", "corstitch-ground-truth"},
            {"version", 1},
            {"seed", survey.seed},
            {"fps", p.fps},
            {"strip_fraction", p.strip_fraction},
            {"frame_rows", p.frame_rows},
            {"frame_cols", p.frame_cols},
            {"texture_rows", p.texture_rows},
            {"texture_cols", p.texture_cols},
            {"texture_cells", p.texture_cells},
            {"texture_persistence", p.texture_persistence},
            {"noise_sigma", p.noise_sigma},
            {"sand_fraction", p.sand_fraction},
            {"blur_sigma", p.blur_sigma},
            {"vignette", p.vignette},
            {"meters_per_pixel", survey.meters_per_pixel()},
            {"origin", {{"lat", p.origin_lat}, {"lon", p.origin_lon}}},
            {"start_utc", p.start_utc},
            {"shifts", shifts},
            {"path", path}};
}

void write_survey(const SyntheticSurvey& survey, const std::filesystem::path& out_dir, const std::string& image_ext,
                  std::size_t threads) {
    if (image_ext != "png" && image_ext != "ppm") throw Error(Stage::synth, "image format must be png or ppm");
    const auto frames_dir = out_dir / "frames";
    std::filesystem::create_directories(frames_dir);
    parallel_for(survey.params.frame_count, threads, [&](std::size_t i) {
        const auto frame = survey.render_frame(i);
        char name[40];
        std::snprintf(name, sizeof name, "frame_%06zu.%s", i, image_ext.c_str());
        if (image_ext == "png") write_png(frames_dir / name, *frame.pixels);
        else write_ppm(frames_dir / name, *frame.pixels);
    });
    write_gps_track(out_dir / "gps.csv", survey.track);
    std::ofstream gt(out_dir / "ground_truth.json");
    gt << ground_truth_json(survey).dump(1) << '\n';
    if (!gt) throw Error(Stage::synth, "cannot write ground_truth.json");
}

GroundTruth read_ground_truth(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(Stage::verify, "cannot open ground truth " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw Error(Stage::verify, std::string("bad ground truth: ") + e.what());
    }
    if (j.value("format", "") != "corstitch-ground-truth" || j.value("version", 0) != 1)
        throw Error(Stage::verify, "ground truth format/version mismatch");
    GroundTruth gt;
    gt.fps = j.at("fps").get<double>();
    gt.strip_fraction = j.at("strip_fraction").get<double>();
    for (const auto& s : j.at("shifts")) gt.shifts.push_back({s.at(0).get<int>(), s.at(1).get<int>(), CorrelationKind::cc});
    return gt;
}

// --- oracles -------------------------------------------------------------------

namespace {

/// Naive 2-D DFT, sign -1 forward, +1 inverse (unscaled).
std::vector<std::complex<double>> naive_dft(const std::vector<std::complex<double>>& x, std::size_t rows,
                                            std::size_t cols, int sign) {
    std::vector<std::complex<double>> out(rows * cols);
    const double two_pi = 2.0 * std::numbers::pi;
    for (std::size_t ky = 0; ky < rows; ++ky) {
        for (std::size_t kx = 0; kx < cols; ++kx) {
            std::complex<double> sum = 0.0;
            for (std::size_t ny = 0; ny < rows; ++ny) {
                for (std::size_t nx = 0; nx < cols; ++nx) {
                    // Reduce the phase index modulo the period before scaling for accuracy.
                    const double phase = two_pi * (static_cast<double>((ky * ny) % rows) / static_cast<double>(rows) +
                                                   static_cast<double>((kx * nx) % cols) / static_cast<double>(cols));
                    sum += x[ny * cols + nx] * std::polar(1.0, sign * phase);
                }
            }
            out[ky * cols + kx] = sum;
        }
    }
    return out;
}

double mean_of(const RealGrid& g) {
    double s = 0.0;
    for (double v : g.values()) s += v;
    return s / static_cast<double>(g.size());
}

}  // namespace

CorrelationSurface brute_force_correlation(const RealGrid& f, const RealGrid& g, CorrelationKind kind,
                                           bool mean_subtract) {
    if (f.rows() != g.rows() || f.cols() != g.cols()) throw Error(Stage::registration, "dimension mismatch");
    if (f.rows() > kBruteForceMaxSide || f.cols() > kBruteForceMaxSide)
        throw Error(Stage::registration, "inputs too large for brute-force correlation (max 32x32)");
    if (f.empty()) throw Error(Stage::registration, "empty strip");

    const std::size_t rows = f.rows(), cols = f.cols();
    const bool demean = mean_subtract || kind == CorrelationKind::pc;
    const double mf = demean ? mean_of(f) : 0.0, mg = demean ? mean_of(g) : 0.0;

    // raw(dy, dx) over dy, dx in [0, rows) x [0, cols); centred layout applied at the end.
    std::vector<double> raw(rows * cols, 0.0);
    if (kind == CorrelationKind::cc) {
        for (std::size_t dy = 0; dy < rows; ++dy)
            for (std::size_t dx = 0; dx < cols; ++dx) {
                double sum = 0.0;
                for (std::size_t y = 0; y < rows; ++y)
                    for (std::size_t x = 0; x < cols; ++x)
                        sum += (f(y, x) - mf) * (g((y + dy) % rows, (x + dx) % cols) - mg);
                raw[dy * cols + dx] = sum;
            }
    } else {
        std::vector<std::complex<double>> fx(rows * cols), gx(rows * cols);
        for (std::size_t y = 0; y < rows; ++y)
            for (std::size_t x = 0; x < cols; ++x) {
                fx[y * cols + x] = f(y, x) - mf;
                gx[y * cols + x] = g(y, x) - mg;
            }
        const auto F = naive_dft(fx, rows, cols, -1);
        const auto G = naive_dft(gx, rows, cols, -1);
        std::vector<std::complex<double>> cross(rows * cols);
        double peak = 0.0;
        for (std::size_t i = 0; i < cross.size(); ++i) {
            cross[i] = std::conj(F[i]) * G[i];
            peak = std::max(peak, std::abs(cross[i]));
        }
        if (!(peak > 0.0)) throw DegeneratePairError();
        for (auto& v : cross) v /= std::abs(v) + 1e-12 * peak;
        const auto inv = naive_dft(cross, rows, cols, +1);
        for (std::size_t i = 0; i < raw.size(); ++i) raw[i] = inv[i].real() / static_cast<double>(raw.size());
    }

    CorrelationSurface surface{RealGrid(rows, cols), kind};
    const long half_r = static_cast<long>(rows / 2), half_c = static_cast<long>(cols / 2);
    for (long dy = -half_r; dy < static_cast<long>(rows) - half_r; ++dy)
        for (long dx = -half_c; dx < static_cast<long>(cols) - half_c; ++dx) {
            const auto ry = static_cast<std::size_t>(wrap(dy, rows));
            const auto rx = static_cast<std::size_t>(wrap(dx, cols));
            surface.values(static_cast<std::size_t>(dy + half_r), static_cast<std::size_t>(dx + half_c)) =
                raw[ry * cols + rx];
        }
    return surface;
}

RecoveryReport score_recovery(const std::vector<Shift>& truth, const std::vector<Shift>& estimates) {
    if (truth.size() != estimates.size())
        throw Error(Stage::verify, "length mismatch: " + std::to_string(estimates.size()) + " estimates for " +
                                       std::to_string(truth.size()) + " ground-truth pairs");
    if (truth.empty()) throw Error(Stage::verify, "nothing to score");
    RecoveryReport report;
    std::size_t exact = 0;
    double error_sum = 0.0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        const double ex = estimates[i].dx - truth[i].dx, ey = estimates[i].dy - truth[i].dy;
        error_sum += std::hypot(ex, ey);
        if (truth[i].same_offset(estimates[i])) ++exact;
        else report.failures.push_back({i, truth[i], estimates[i]});
    }
    const auto n = static_cast<double>(truth.size());
    report.exact_rate = static_cast<double>(exact) / n;
    report.mean_abs_error_px = error_sum / n;
    return report;
}

RecoveryReport score_recovery(const SyntheticSurvey& survey, const std::vector<Shift>& estimates) {
    return score_recovery(survey.true_shifts, estimates);
}

nlohmann::json to_json(const RecoveryReport& report) {
    nlohmann::json failures = nlohmann::json::array();
    for (const auto& f : report.failures)
        failures.push_back({{"pair", f.pair},
                            {"truth", {f.truth.dx, f.truth.dy}},
                            {"estimate", {f.estimate.dx, f.estimate.dy}},
                            {"source", kind_name(f.estimate.source)}});
    return {{"exact_rate", report.exact_rate},
            {"mean_abs_error_px", report.mean_abs_error_px},
            {"failures", failures}};
}

}  // namespace corstitch
