#include "corstitch/zip.hpp"
#include "corstitch/error.hpp"

#include <zlib.h>

#include <algorithm>
#include <fstream>
#include <iterator>

namespace corstitch {
namespace {

constexpr std::uint32_t kLocalSig = 0x04034b50;
constexpr std::uint32_t kCentralSig = 0x02014b50;
constexpr std::uint32_t kEndSig = 0x06054b50;
constexpr std::uint16_t kVersion = 20;
constexpr std::uint16_t kDeflate = 8;
constexpr std::uint16_t kDosTime = 0;                      // 00:00:00
constexpr std::uint16_t kDosDate = (0 << 9) | (1 << 5) | 1;  // 1980-01-01

void put16(std::vector<std::uint8_t>& out, std::uint16_t v) {
    out.push_back(static_cast<std::uint8_t>(v));
    out.push_back(static_cast<std::uint8_t>(v >> 8));
}
void put32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    put16(out, static_cast<std::uint16_t>(v));
    put16(out, static_cast<std::uint16_t>(v >> 16));
}

std::uint32_t crc_of(std::span<const std::uint8_t> data) {
    return static_cast<std::uint32_t>(crc32(0L, data.data(), static_cast<uInt>(data.size())));
}

std::vector<std::uint8_t> deflate_raw(std::span<const std::uint8_t> data) {
    z_stream zs{};
    if (deflateInit2(&zs, Z_DEFAULT_COMPRESSION, Z_DEFLATED, -MAX_WBITS, 8, Z_DEFAULT_STRATEGY) != Z_OK)
        throw Error(Stage::kmz, "deflateInit2 failed");
    std::vector<std::uint8_t> out(deflateBound(&zs, static_cast<uLong>(data.size())));
    zs.next_in = const_cast<Bytef*>(data.data());
    zs.avail_in = static_cast<uInt>(data.size());
    zs.next_out = out.data();
    zs.avail_out = static_cast<uInt>(out.size());
    const int rc = deflate(&zs, Z_FINISH);
    deflateEnd(&zs);
    if (rc != Z_STREAM_END) throw Error(Stage::kmz, "deflate failed");
    out.resize(zs.total_out);
    return out;
}

std::vector<std::uint8_t> inflate_raw(std::span<const std::uint8_t> data, std::size_t raw_size) {
    z_stream zs{};
    if (inflateInit2(&zs, -MAX_WBITS) != Z_OK) throw Error(Stage::kmz, "inflateInit2 failed");
    std::vector<std::uint8_t> out(std::max<std::size_t>(raw_size, 1));  // zlib rejects a null next_out
    zs.next_in = const_cast<Bytef*>(data.data());
    zs.avail_in = static_cast<uInt>(data.size());
    zs.next_out = out.data();
    zs.avail_out = static_cast<uInt>(out.size());
    const int rc = inflate(&zs, Z_FINISH);
    inflateEnd(&zs);
    if (rc != Z_STREAM_END || zs.total_out != raw_size) throw Error(Stage::kmz, "corrupt deflate stream");
    out.resize(raw_size);
    return out;
}

struct Reader {
    std::span<const std::uint8_t> bytes;

    void need(std::size_t pos, std::size_t n) const {
        if (pos + n > bytes.size()) throw Error(Stage::kmz, "truncated zip archive");
    }
    std::uint16_t u16(std::size_t pos) const {
        need(pos, 2);
        return static_cast<std::uint16_t>(bytes[pos] | (bytes[pos + 1] << 8));
    }
    std::uint32_t u32(std::size_t pos) const {
        return static_cast<std::uint32_t>(u16(pos)) | (static_cast<std::uint32_t>(u16(pos + 2)) << 16);
    }
};

}  // namespace

void ZipWriter::add(const std::string& name, std::span<const std::uint8_t> data) {
    if (name.empty() || name.size() > 0xffff) throw Error(Stage::kmz, "invalid zip member name");
    if (data.size() > 0xffffffffULL) throw Error(Stage::kmz, "zip member too large");
    for (const auto& m : members_)
        if (m.name == name) throw Error(Stage::kmz, "duplicate zip member " + name);
    members_.push_back({name, crc_of(data), static_cast<std::uint32_t>(data.size()), deflate_raw(data)});
}

void ZipWriter::add(const std::string& name, const std::string& text) {
    add(name, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

std::vector<std::uint8_t> ZipWriter::finish() const {
    std::vector<std::uint8_t> out;
    std::vector<std::uint32_t> offsets;
    for (const auto& m : members_) {
        offsets.push_back(static_cast<std::uint32_t>(out.size()));
        put32(out, kLocalSig);
        put16(out, kVersion);
        put16(out, 0);  // flags
        put16(out, kDeflate);
        put16(out, kDosTime);
        put16(out, kDosDate);
        put32(out, m.crc);
        put32(out, static_cast<std::uint32_t>(m.compressed.size()));
        put32(out, m.raw_size);
        put16(out, static_cast<std::uint16_t>(m.name.size()));
        put16(out, 0);  // extra
        out.insert(out.end(), m.name.begin(), m.name.end());
        out.insert(out.end(), m.compressed.begin(), m.compressed.end());
    }
    const auto central_start = static_cast<std::uint32_t>(out.size());
    for (std::size_t i = 0; i < members_.size(); ++i) {
        const auto& m = members_[i];
        put32(out, kCentralSig);
        put16(out, kVersion);  // made by
        put16(out, kVersion);  // needed
        put16(out, 0);
        put16(out, kDeflate);
        put16(out, kDosTime);
        put16(out, kDosDate);
        put32(out, m.crc);
        put32(out, static_cast<std::uint32_t>(m.compressed.size()));
        put32(out, m.raw_size);
        put16(out, static_cast<std::uint16_t>(m.name.size()));
        put16(out, 0);  // extra
        put16(out, 0);  // comment
        put16(out, 0);  // disk
        put16(out, 0);  // internal attrs
        put32(out, 0);  // external attrs
        put32(out, offsets[i]);
        out.insert(out.end(), m.name.begin(), m.name.end());
    }
    const auto central_size = static_cast<std::uint32_t>(out.size()) - central_start;
    put32(out, kEndSig);
    put16(out, 0);
    put16(out, 0);
    put16(out, static_cast<std::uint16_t>(members_.size()));
    put16(out, static_cast<std::uint16_t>(members_.size()));
    put32(out, central_size);
    put32(out, central_start);
    put16(out, 0);
    return out;
}

void ZipWriter::write(const std::filesystem::path& path) const {
    const auto bytes = finish();
    std::ofstream out(path, std::ios::binary);
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error(Stage::kmz, "cannot write " + path.string());
}

std::vector<ZipEntry> read_zip(std::span<const std::uint8_t> archive) {
    const Reader rd{archive};
    if (archive.size() < 22) throw Error(Stage::kmz, "not a zip archive");
    // The end record sits in the last 22 + 65535 bytes (comment length is 16-bit).
    std::size_t end = archive.size() - 22;
    const std::size_t floor = archive.size() > 22 + 0xffff ? archive.size() - 22 - 0xffff : 0;
    while (rd.u32(end) != kEndSig) {
        if (end == floor) throw Error(Stage::kmz, "zip end record not found");
        --end;
    }
    const std::size_t count = rd.u16(end + 10);
    std::size_t pos = rd.u32(end + 16);

    std::vector<ZipEntry> entries;
    for (std::size_t i = 0; i < count; ++i) {
        if (rd.u32(pos) != kCentralSig) throw Error(Stage::kmz, "bad central directory");
        const auto method = rd.u16(pos + 10);
        const auto crc = rd.u32(pos + 16);
        const std::size_t packed = rd.u32(pos + 20);
        const std::size_t raw = rd.u32(pos + 24);
        const std::size_t name_len = rd.u16(pos + 28);
        const std::size_t extra_len = rd.u16(pos + 30);
        const std::size_t comment_len = rd.u16(pos + 32);
        const std::size_t local = rd.u32(pos + 42);
        rd.need(pos + 46, name_len);
        ZipEntry entry;
        entry.name.assign(reinterpret_cast<const char*>(archive.data() + pos + 46), name_len);
        pos += 46 + name_len + extra_len + comment_len;

        if (rd.u32(local) != kLocalSig) throw Error(Stage::kmz, "bad local header for " + entry.name);
        const std::size_t data_at = local + 30 + rd.u16(local + 26) + rd.u16(local + 28);
        rd.need(data_at, packed);
        const auto payload = archive.subspan(data_at, packed);
        if (method == 0) {
            entry.data.assign(payload.begin(), payload.end());
        } else if (method == kDeflate) {
            entry.data = inflate_raw(payload, raw);
        } else {
            throw Error(Stage::kmz, "unsupported zip method for " + entry.name);
        }
        if (crc_of(entry.data) != crc) throw Error(Stage::kmz, "crc mismatch for " + entry.name);
        entries.push_back(std::move(entry));
    }
    return entries;
}

std::vector<ZipEntry> read_zip(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(Stage::kmz, "cannot open " + path.string());
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return read_zip(std::span<const std::uint8_t>(bytes));
}

}  // namespace corstitch
