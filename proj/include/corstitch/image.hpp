#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace corstitch {

/// Interleaved 8-bit raster, row 0 at top. channels is 3 (RGB) or 4 (RGBA).
struct Image {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::size_t channels = 3;
    std::vector<std::uint8_t> pixels;

    Image() = default;
    Image(std::size_t r, std::size_t c, std::size_t ch, std::uint8_t fill = 0)
        : rows(r), cols(c), channels(ch), pixels(r * c * ch, fill) {}

    std::uint8_t* at(std::size_t r, std::size_t c) { return pixels.data() + (r * cols + c) * channels; }
    const std::uint8_t* at(std::size_t r, std::size_t c) const {
        return pixels.data() + (r * cols + c) * channels;
    }
    std::span<const std::uint8_t> row(std::size_t r) const {
        return {pixels.data() + r * cols * channels, cols * channels};
    }

    bool operator==(const Image&) const = default;
};

// Lossless raster IO. PNG through libpng, binary PPM (P6) by hand.

/// Reads a .png or .ppm file as RGB (alpha, if any, is dropped).
Image read_image(const std::filesystem::path& path);

void write_png(const std::filesystem::path& path, const Image& image);
std::vector<std::uint8_t> encode_png(const Image& image);
/// Keeps an alpha channel when the stream has one.
Image decode_png(std::span<const std::uint8_t> bytes);

void write_ppm(const std::filesystem::path& path, const Image& image);
Image read_ppm(const std::filesystem::path& path);

}  // namespace corstitch
