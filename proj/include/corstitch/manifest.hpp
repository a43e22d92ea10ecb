#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "corstitch/georef.hpp"

namespace corstitch {

inline constexpr int kManifestVersion = 1;

/// One line of manifest.jsonl, written by the stitch stage and read back by georef.
struct MosaicRecord {
    std::size_t index = 0;
    std::string image;     ///< path relative to the output directory
    std::string transect;  ///< slug used to name KMZ batches
    double start_time = 0.0;
    double end_time = 0.0;
    std::size_t first_frame = 0;
    std::size_t last_frame = 0;
    std::size_t height = 0;
    std::size_t width = 0;
    std::size_t strip_h = 0;
    std::size_t accepted = 0;
    std::size_t rejected = 0;
    std::size_t skipped = 0;
};

nlohmann::json to_json(const MosaicRecord& record);
MosaicRecord mosaic_record_from_json(const nlohmann::json& j);

std::vector<MosaicRecord> read_manifest(const std::filesystem::path& path);
void write_manifest(const std::filesystem::path& path, const std::vector<MosaicRecord>& records);

/// One line of quads.jsonl.
nlohmann::json quad_json(std::size_t index, const std::string& image, const GeoQuad& quad);

}  // namespace corstitch
