#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace corstitch {

struct ZipEntry {
    std::string name;
    std::vector<std::uint8_t> data;
};

/// Minimal deflate-only ZIP writer. Members keep insertion order and carry a fixed
/// 1980-01-01 timestamp so identical inputs give identical archives.
class ZipWriter {
public:
    void add(const std::string& name, std::span<const std::uint8_t> data);
    void add(const std::string& name, const std::string& text);

    /// Serialized archive (local headers, central directory, end record).
    std::vector<std::uint8_t> finish() const;
    void write(const std::filesystem::path& path) const;

    std::size_t size() const { return members_.size(); }

private:
    struct Member {
        std::string name;
        std::uint32_t crc = 0;
        std::uint32_t raw_size = 0;
        std::vector<std::uint8_t> compressed;
    };
    std::vector<Member> members_;
};

/// Reads every member of a ZIP archive (stored or deflated), verifying CRCs.
std::vector<ZipEntry> read_zip(std::span<const std::uint8_t> archive);
std::vector<ZipEntry> read_zip(const std::filesystem::path& path);

}  // namespace corstitch
