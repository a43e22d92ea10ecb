#include "corstitch/manifest.hpp"
#include "corstitch/error.hpp"

#include <fstream>

namespace corstitch {

nlohmann::json to_json(const MosaicRecord& r) {
    return {{"format", "corstitch-manifest"},
            {"version", kManifestVersion},
            {"index", r.index},
            {"image", r.image},
            {"transect", r.transect},
            {"start_time", r.start_time},
            {"end_time", r.end_time},
            {"first_frame", r.first_frame},
            {"last_frame", r.last_frame},
            {"height", r.height},
            {"width", r.width},
            {"strip_h", r.strip_h},
            {"accepted", r.accepted},
            {"rejected", r.rejected},
            {"skipped", r.skipped}};
}

MosaicRecord mosaic_record_from_json(const nlohmann::json& j) {
    if (j.value("format", "") != "corstitch-manifest")
        throw Error(Stage::georef, "manifest/version mismatch: not a corstitch manifest record");
    if (j.value("version", -1) != kManifestVersion)
        throw Error(Stage::georef, "manifest/version mismatch: expected version " + std::to_string(kManifestVersion));
    try {
        MosaicRecord r;
        r.index = j.at("index").get<std::size_t>();
        r.image = j.at("image").get<std::string>();
        r.transect = j.value("transect", "survey");
        r.start_time = j.at("start_time").get<double>();
        r.end_time = j.at("end_time").get<double>();
        r.first_frame = j.at("first_frame").get<std::size_t>();
        r.last_frame = j.at("last_frame").get<std::size_t>();
        r.height = j.at("height").get<std::size_t>();
        r.width = j.at("width").get<std::size_t>();
        r.strip_h = j.at("strip_h").get<std::size_t>();
        r.accepted = j.at("accepted").get<std::size_t>();
        r.rejected = j.at("rejected").get<std::size_t>();
        r.skipped = j.at("skipped").get<std::size_t>();
        return r;
    } catch (const nlohmann::json::exception& e) {
        throw Error(Stage::georef, std::string("bad manifest record: ") + e.what());
    }
}

std::vector<MosaicRecord> read_manifest(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(Stage::georef, "cannot open manifest " + path.string());
    std::vector<MosaicRecord> records;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception&) {
            throw Error(Stage::georef, "unparsable manifest line " + std::to_string(line_no));
        }
        records.push_back(mosaic_record_from_json(j));
    }
    return records;
}

void write_manifest(const std::filesystem::path& path, const std::vector<MosaicRecord>& records) {
    std::ofstream out(path);
    for (const auto& r : records) out << to_json(r).dump() << '\n';
    if (!out) throw Error(Stage::stitch, "cannot write " + path.string());
}

nlohmann::json quad_json(std::size_t index, const std::string& image, const GeoQuad& quad) {
    nlohmann::json corners = nlohmann::json::array();
    for (const auto& c : quad.corners) corners.push_back({c.lat, c.lon});
    auto fix = [](const GeoFix& f) { return nlohmann::json{{"time", f.time}, {"lat", f.lat}, {"lon", f.lon}}; };
    return {{"index", index},
            {"image", image},
            {"heading", quad.heading_deg},
            {"corners", corners},
            {"center_start", fix(quad.center_start)},
            {"center_end", fix(quad.center_end)}};
}

}  // namespace corstitch
