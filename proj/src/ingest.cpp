#include "corstitch/ingest.hpp"
#include "corstitch/error.hpp"
#include "corstitch/parallel.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <regex>
#include <sstream>

namespace corstitch {

StripGeometry strip_geometry(std::size_t frame_rows, double strip_fraction) {
    if (!(strip_fraction > 0.0 && strip_fraction <= 1.0))
        throw Error(Stage::ingest, "strip_fraction must be in (0, 1]");
    const auto h = static_cast<std::size_t>(std::lround(strip_fraction * static_cast<double>(frame_rows)));
    if (h < kMinStripRows)
        throw Error(Stage::ingest, "strip too short: " + std::to_string(h) + " rows (minimum " +
                                       std::to_string(kMinStripRows) + ")");
    return {(frame_rows - h) / 2, h};
}

RealGrid green_channel(const Image& image) {
    if (image.channels < 3) throw Error(Stage::ingest, "green_channel requires an RGB image");
    RealGrid out(image.rows, image.cols);
    for (std::size_t r = 0; r < image.rows; ++r)
        for (std::size_t c = 0; c < image.cols; ++c) out(r, c) = image.at(r, c)[1];
    return out;
}

RealGrid green_channel(const Frame& frame) { return green_channel(*frame.pixels); }

Strip central_strip(const RealGrid& channel, double strip_fraction, std::size_t source_index) {
    const auto geom = strip_geometry(channel.rows(), strip_fraction);
    Strip strip{source_index, geom.top, RealGrid(geom.rows, channel.cols())};
    for (std::size_t r = 0; r < geom.rows; ++r) {
        const auto src = channel.row(geom.top + r);
        std::copy(src.begin(), src.end(), strip.pixels.row(r).begin());
    }
    return strip;
}

Frame make_frame(std::size_t index, double fps, Image image) {
    if (!(fps > 0.0)) throw Error(Stage::ingest, "fps must be positive");
    if (image.rows < kMinFrameSide || image.cols < kMinFrameSide)
        throw Error(Stage::ingest, "frame " + std::to_string(index) + " smaller than 16x16");
    if (image.channels != 3) throw Error(Stage::ingest, "frame " + std::to_string(index) + " is not RGB");
    return {index, static_cast<double>(index) / fps, std::make_shared<const Image>(std::move(image))};
}

// --- frame directory ---------------------------------------------------------

DirectoryFrameSource::DirectoryFrameSource(const std::filesystem::path& dir, double fps, std::size_t threads)
    : fps_(fps), threads_(std::max<std::size_t>(threads, 1)) {
    if (!(fps > 0.0)) throw Error(Stage::ingest, "fps must be positive");
    std::error_code ec;
    if (!std::filesystem::is_directory(dir, ec))
        throw Error(Stage::ingest, "frame directory not found: " + dir.string());

    static const std::regex pattern(R"(frame_(\d+)\.(png|ppm|PNG|PPM))");
    std::map<std::size_t, std::filesystem::path> indexed;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        if (!entry.is_regular_file()) continue;
        std::smatch m;
        const auto name = entry.path().filename().string();
        if (!std::regex_match(name, m, pattern)) continue;
        const auto index = std::stoull(m[1].str());
        if (!indexed.emplace(index, entry.path()).second)
            throw Error(Stage::ingest, "duplicate frame " + std::to_string(index));
    }
    if (indexed.empty()) throw Error(Stage::ingest, "empty frame directory: " + dir.string());

    std::size_t expected = 0;
    for (const auto& [index, path] : indexed) {
        if (index != expected) throw Error(Stage::ingest, "missing frame " + std::to_string(expected));
        files_.push_back(path);
        ++expected;
    }
}

void DirectoryFrameSource::refill() {
    const std::size_t window = std::min(threads_ * 2, files_.size() - next_);
    std::vector<Frame> batch(window);
    parallel_for(window, threads_, [&](std::size_t i) {
        const auto index = next_ + i;
        batch[i] = make_frame(index, fps_, read_image(files_[index]));
    });
    for (const auto& frame : batch) {
        if (rows_ == 0) {
            rows_ = frame.rows();
            cols_ = frame.cols();
        } else if (frame.rows() != rows_ || frame.cols() != cols_) {
            throw Error(Stage::ingest, "dimension mismatch at frame " + std::to_string(frame.index) + ": " +
                                           std::to_string(frame.cols()) + "x" + std::to_string(frame.rows()) +
                                           " vs " + std::to_string(cols_) + "x" + std::to_string(rows_));
        }
    }
    next_ += window;
    buffer_ = std::move(batch);
    buffer_pos_ = 0;
}

std::optional<Frame> DirectoryFrameSource::next() {
    if (buffer_pos_ == buffer_.size()) {
        if (next_ == files_.size()) return std::nullopt;
        refill();
    }
    return std::move(buffer_[buffer_pos_++]);
}

std::vector<Frame> load_frame_sequence(const std::filesystem::path& dir, double fps, std::size_t threads) {
    DirectoryFrameSource source(dir, fps, threads);
    std::vector<Frame> frames;
    frames.reserve(source.files().size());
    while (auto frame = source.next()) frames.push_back(std::move(*frame));
    return frames;
}

// --- GPS CSV -----------------------------------------------------------------

namespace {

std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> fields;
    std::string_view rest = line;
    while (true) {
        const auto comma = rest.find(',');
        fields.push_back(trim(rest.substr(0, comma)));
        if (comma == std::string_view::npos) break;
        rest.remove_prefix(comma + 1);
    }
    return fields;
}

std::string lower(std::string s) {
    for (auto& ch : s) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
    return s;
}

template <typename T>
bool parse_number(std::string_view s, T& out) {
    const auto* end = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(s.data(), end, out);
    return ec == std::errc{} && ptr == end;
}

bool parse_date(const std::string& s, double& days) {
    int y = 0;
    unsigned m = 0, d = 0;
    if (s.size() != 10 || s[4] != '-' || s[7] != '-') return false;
    if (!parse_number(std::string_view(s).substr(0, 4), y) || !parse_number(std::string_view(s).substr(5, 2), m) ||
        !parse_number(std::string_view(s).substr(8, 2), d))
        return false;
    const std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{m}, std::chrono::day{d}};
    if (!ymd.ok()) return false;
    days = static_cast<double>(std::chrono::sys_days{ymd}.time_since_epoch().count());
    return true;
}

bool parse_time_of_day(const std::string& s, double& seconds) {
    if (s.size() < 8 || s[2] != ':' || s[5] != ':') return false;
    int h = 0, m = 0;
    double sec = 0.0;
    const std::string_view v(s);
    if (!parse_number(v.substr(0, 2), h) || !parse_number(v.substr(3, 2), m)) return false;
    if (s.size() > 8 && s[8] != '.') return false;
    if (!parse_number(v.substr(6), sec)) return false;
    if (h < 0 || h > 23 || m < 0 || m > 59 || sec < 0.0 || sec >= 61.0) return false;
    seconds = h * 3600.0 + m * 60.0 + sec;
    return true;
}

}  // namespace

GeoTrack parse_gps_track_text(const std::string& csv_text) {
    std::istringstream in(csv_text);
    std::string line;
    std::size_t line_no = 0;

    int col_date = -1, col_time = -1, col_lat = -1, col_lon = -1;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const auto header = split_csv(line);
        for (std::size_t i = 0; i < header.size(); ++i) {
            const auto name = lower(header[i]);
            const int idx = static_cast<int>(i);
            if (name == "date") col_date = idx;
            else if (name == "time") col_time = idx;
            else if (name == "latitude" || name == "lat") col_lat = idx;
            else if (name == "longitude" || name == "lon") col_lon = idx;
        }
        break;
    }
    for (auto [col, name] : {std::pair{col_date, "date"}, {col_time, "time"}, {col_lat, "latitude"},
                             {col_lon, "longitude"}}) {
        if (col < 0) throw Error(Stage::ingest, std::string("missing column ") + name);
    }
    const auto needed = static_cast<std::size_t>(std::max({col_date, col_time, col_lat, col_lon})) + 1;

    std::vector<GeoFix> raw;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const auto fields = split_csv(line);
        const auto where = ", line " + std::to_string(line_no);
        if (fields.size() < needed) throw Error(Stage::ingest, "unparsable row" + where);
        double days = 0.0, tod = 0.0;
        GeoFix fix;
        if (!parse_date(fields[col_date], days)) throw Error(Stage::ingest, "unparsable date" + where);
        if (!parse_time_of_day(fields[col_time], tod)) throw Error(Stage::ingest, "unparsable time" + where);
        if (!parse_number(std::string_view(fields[col_lat]), fix.lat))
            throw Error(Stage::ingest, "unparsable latitude" + where);
        if (!parse_number(std::string_view(fields[col_lon]), fix.lon))
            throw Error(Stage::ingest, "unparsable longitude" + where);
        if (!(std::abs(fix.lat) <= 90.0)) throw Error(Stage::ingest, "latitude out of range" + where);
        if (!(std::abs(fix.lon) <= 180.0)) throw Error(Stage::ingest, "longitude out of range" + where);
        fix.time = days * 86400.0 + tod;
        raw.push_back(fix);
    }

    std::stable_sort(raw.begin(), raw.end(), [](const GeoFix& a, const GeoFix& b) { return a.time < b.time; });

    // Collapse repeated timestamps to their mean position.
    GeoTrack track;
    for (std::size_t i = 0; i < raw.size();) {
        std::size_t j = i;
        double lat = 0.0, lon = 0.0;
        while (j < raw.size() && raw[j].time == raw[i].time) {
            lat += raw[j].lat;
            lon += raw[j].lon;
            ++j;
        }
        const auto n = static_cast<double>(j - i);
        track.fixes.push_back({raw[i].time, lat / n, lon / n});
        i = j;
    }
    if (track.fixes.size() < 2) throw Error(Stage::ingest, "GPS track needs at least 2 valid fixes");
    for (std::size_t i = 1; i < track.fixes.size(); ++i)
        if (!(track.fixes[i].time > track.fixes[i - 1].time))
            throw Error(Stage::ingest, "non-monotone GPS time");
    return track;
}

GeoTrack parse_gps_track(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw Error(Stage::ingest, "cannot open GPS track " + file.string());
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_gps_track_text(buffer.str());
}

std::string format_gps_track(const GeoTrack& track) {
    std::string out = "date,time,latitude,longitude\n";
    char buf[128];
    for (const auto& fix : track.fixes) {
        // Round to whole milliseconds first so the seconds field never prints as 60.000.
        const auto total_ms = static_cast<long long>(std::llround(fix.time * 1000.0));
        auto days = total_ms / 86'400'000;
        auto ms_of_day = total_ms % 86'400'000;
        if (ms_of_day < 0) {
            ms_of_day += 86'400'000;
            --days;
        }
        const std::chrono::year_month_day ymd{std::chrono::sys_days{std::chrono::days{days}}};
        const auto h = ms_of_day / 3'600'000;
        const auto m = (ms_of_day / 60'000) % 60;
        const auto s = (ms_of_day / 1000) % 60;
        const auto ms = ms_of_day % 1000;
        std::snprintf(buf, sizeof buf, "%04d-%02u-%02u,%02lld:%02lld:%02lld.%03lld,%.10f,%.10f\n",
                      static_cast<int>(ymd.year()), static_cast<unsigned>(ymd.month()),
                      static_cast<unsigned>(ymd.day()), h, m, s, ms, fix.lat, fix.lon);
        out += buf;
    }
    return out;
}

void write_gps_track(const std::filesystem::path& file, const GeoTrack& track) {
    std::ofstream out(file);
    out << format_gps_track(track);
    if (!out) throw Error(Stage::ingest, "cannot write " + file.string());
}

}  // namespace corstitch
