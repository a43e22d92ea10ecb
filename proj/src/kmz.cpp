#include "corstitch/kmz.hpp"
#include "corstitch/error.hpp"
#include "corstitch/log.hpp"
#include "corstitch/zip.hpp"

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>

#include <cctype>
#include <cstdio>
#include <set>
#include <sstream>

namespace corstitch {
namespace {

std::string xml_escape(const std::string& text) {
    std::string out;
    out.reserve(text.size());
    for (char ch : text) {
        switch (ch) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            case '\'': out += "&apos;"; break;
            default: out += ch;
        }
    }
    return out;
}

}  // namespace

std::string overlay_image_name(std::size_t mosaic_index) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "files/mosaic_%05zu.png", mosaic_index);
    return buf;
}

std::string render_kml(std::span<const OverlayEntry> entries, const std::string& document_name) {
    if (entries.empty()) throw Error(Stage::kmz, "render_kml needs at least one entry");
    std::ostringstream out;
    out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
        << "<kml xmlns=\"http://www.opengis.net/kml/2.2\" xmlns:gx=\"http://www.google.com/kml/ext/2.2\">\n"
        << "<Document>\n"
        << "  <name>" << xml_escape(document_name) << "</name>\n";
    char coord[64];
    for (const auto& e : entries) {
        out << "  <GroundOverlay>\n"
            << "    <name>mosaic_" << e.mosaic_index << "</name>\n"
            << "    <drawOrder>" << e.draw_order << "</drawOrder>\n"
            << "    <Icon><href>" << xml_escape(e.image_name) << "</href></Icon>\n"
            << "    <gx:LatLonQuad><coordinates>";
        for (std::size_t i = 0; i < e.quad.corners.size(); ++i) {
            std::snprintf(coord, sizeof coord, "%s%.9f,%.9f", i ? " " : "", e.quad.corners[i].lon,
                          e.quad.corners[i].lat);
            out << coord;
        }
        out << "</coordinates></gx:LatLonQuad>\n"
            << "  </GroundOverlay>\n";
    }
    out << "</Document>\n</kml>\n";
    return out.str();
}

std::vector<OverlayEntry> parse_kml(const std::string& text) {
    namespace pt = boost::property_tree;
    pt::ptree tree;
    std::istringstream in(text);
    try {
        pt::read_xml(in, tree);
    } catch (const pt::xml_parser_error& e) {
        throw Error(Stage::kmz, std::string("malformed KML: ") + e.what());
    }

    std::vector<OverlayEntry> entries;
    const auto& doc = tree.get_child("kml.Document");
    for (const auto& [tag, node] : doc) {
        if (tag != "GroundOverlay") continue;
        OverlayEntry e;
        const auto name = node.get<std::string>("name", "");
        if (name.rfind("mosaic_", 0) == 0) e.mosaic_index = std::stoul(name.substr(7));
        e.draw_order = node.get<int>("drawOrder", 0);
        e.image_name = node.get<std::string>("Icon.href");
        std::istringstream coords(node.get<std::string>("gx:LatLonQuad.coordinates"));
        std::string tuple;
        std::size_t i = 0;
        while (coords >> tuple) {
            if (i == 4) throw Error(Stage::kmz, "LatLonQuad with more than 4 corners");
            const auto comma = tuple.find(',');
            if (comma == std::string::npos) throw Error(Stage::kmz, "bad coordinate tuple " + tuple);
            e.quad.corners[i].lon = std::stod(tuple.substr(0, comma));
            e.quad.corners[i].lat = std::stod(tuple.substr(comma + 1));
            ++i;
        }
        if (i != 4) throw Error(Stage::kmz, "LatLonQuad with fewer than 4 corners");
        entries.push_back(std::move(e));
    }
    return entries;
}

void write_kmz(std::span<const OverlayEntry> entries, std::span<const std::vector<std::uint8_t>> images,
               const std::filesystem::path& out_path, const std::string& document_name) {
    if (entries.size() != images.size())
        throw Error(Stage::kmz, "image/entry count mismatch: " + std::to_string(images.size()) + " images for " +
                                    std::to_string(entries.size()) + " entries");
    std::set<std::string> names;
    for (const auto& e : entries)
        if (!names.insert(e.image_name).second) throw Error(Stage::kmz, "duplicate image name " + e.image_name);

    ZipWriter zip;
    zip.add("doc.kml", render_kml(entries, document_name));
    for (std::size_t i = 0; i < entries.size(); ++i) zip.add(entries[i].image_name, images[i]);
    zip.write(out_path);
}

std::vector<std::pair<std::size_t, std::size_t>> batch_ranges(std::size_t count, std::size_t batch_size) {
    if (batch_size == 0) throw Error(Stage::kmz, "batch size must be positive");
    std::vector<std::pair<std::size_t, std::size_t>> ranges;
    for (std::size_t begin = 0; begin < count; begin += batch_size)
        ranges.emplace_back(begin, std::min(count, begin + batch_size));
    return ranges;
}

std::string batch_file_name(const std::string& slug, std::size_t batch) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "_batch_%03zu.kmz", batch);
    return "transect_" + slug + buf;
}

std::string make_slug(const std::string& text) {
    std::string slug;
    for (char ch : text) {
        const auto u = static_cast<unsigned char>(ch);
        if (std::isalnum(u)) slug += static_cast<char>(std::tolower(u));
        else if (!slug.empty() && slug.back() != '_') slug += '_';
    }
    while (!slug.empty() && slug.back() == '_') slug.pop_back();
    return slug.empty() ? "survey" : slug;
}

std::vector<std::filesystem::path> write_kmz_batches(
    std::span<const OverlayEntry> entries,
    const std::function<std::vector<std::uint8_t>(const OverlayEntry&)>& load_image,
    const std::filesystem::path& out_dir, const std::string& slug, std::size_t batch_size) {
    std::vector<std::filesystem::path> written;
    if (entries.empty()) {
        log::warn("kmz_empty", {{"reason", "no mosaics to export"}});
        return written;
    }
    std::filesystem::create_directories(out_dir);
    const auto ranges = batch_ranges(entries.size(), batch_size);
    for (std::size_t b = 0; b < ranges.size(); ++b) {
        const auto [begin, end] = ranges[b];
        const auto batch = entries.subspan(begin, end - begin);
        std::vector<std::vector<std::uint8_t>> images;
        images.reserve(batch.size());
        for (const auto& e : batch) images.push_back(load_image(e));
        const auto path = out_dir / batch_file_name(slug, b);
        write_kmz(batch, images, path, "transect_" + slug + " batch " + std::to_string(b));
        log::info("kmz_written", {{"path", path.string()}, {"overlays", batch.size()}});
        written.push_back(path);
    }
    return written;
}

}  // namespace corstitch
