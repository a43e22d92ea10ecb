#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "corstitch/georef.hpp"

namespace corstitch {

inline constexpr std::size_t kDefaultBatchSize = 100;

struct OverlayEntry {
    std::size_t mosaic_index = 0;
    std::string image_name;  ///< archive-relative, e.g. files/mosaic_00000.png
    GeoQuad quad;
    int draw_order = 0;
};

/// KML document with one GroundOverlay per entry, each pinned by a gx:LatLonQuad with
/// lon,lat pairs at 9 decimals in GeoQuad corner order.
std::string render_kml(std::span<const OverlayEntry> entries, const std::string& document_name = "corstitch");

/// Parses a document produced by render_kml. Only the corners of each quad are recovered.
/// Throws on malformed XML.
std::vector<OverlayEntry> parse_kml(const std::string& text);

/// Archive-relative image path for a mosaic.
std::string overlay_image_name(std::size_t mosaic_index);

/// ZIP with doc.kml first, then each entry's image under its image_name.
void write_kmz(std::span<const OverlayEntry> entries, std::span<const std::vector<std::uint8_t>> images,
               const std::filesystem::path& out_path, const std::string& document_name = "corstitch");

/// [begin, end) ranges of at most batch_size items covering [0, count).
std::vector<std::pair<std::size_t, std::size_t>> batch_ranges(std::size_t count, std::size_t batch_size);

std::string batch_file_name(const std::string& slug, std::size_t batch);

/// Lower-case alphanumerics and '_' only; never empty.
std::string make_slug(const std::string& text);

/// Writes ceil(M / batch_size) archives; `load_image` returns PNG bytes for an entry.
/// No archive is written for an empty input.
std::vector<std::filesystem::path> write_kmz_batches(
    std::span<const OverlayEntry> entries,
    const std::function<std::vector<std::uint8_t>(const OverlayEntry&)>& load_image,
    const std::filesystem::path& out_dir, const std::string& slug, std::size_t batch_size = kDefaultBatchSize);

}  // namespace corstitch
