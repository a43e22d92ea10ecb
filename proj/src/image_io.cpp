#include "corstitch/image.hpp"
#include "corstitch/error.hpp"

#include <png.h>

#include <cctype>
#include <fstream>
#include <iterator>
#include <string>

namespace corstitch {
namespace {

std::string lower_ext(const std::filesystem::path& path) {
    auto ext = path.extension().string();
    for (auto& ch : ext) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
    return ext;
}

png_uint_32 png_format(std::size_t channels) {
    return channels == 4 ? PNG_FORMAT_RGBA : PNG_FORMAT_RGB;
}

void check_image(const Image& image) {
    if (image.channels != 3 && image.channels != 4)
        throw Error(Stage::ingest, "image must have 3 or 4 channels");
    if (image.pixels.size() != image.rows * image.cols * image.channels)
        throw Error(Stage::ingest, "image buffer size mismatch");
}

Image finish_read(png_image& png, bool keep_alpha) {
    const bool alpha = keep_alpha && (png.format & PNG_FORMAT_FLAG_ALPHA);
    png.format = alpha ? PNG_FORMAT_RGBA : PNG_FORMAT_RGB;
    Image image(png.height, png.width, alpha ? 4 : 3);
    if (!png_image_finish_read(&png, nullptr, image.pixels.data(), 0, nullptr)) {
        std::string msg = png.message;
        png_image_free(&png);
        throw Error(Stage::ingest, "png decode failed: " + msg);
    }
    return image;
}

}  // namespace

Image read_image(const std::filesystem::path& path) {
    const auto ext = lower_ext(path);
    if (ext == ".ppm") return read_ppm(path);
    if (ext != ".png") throw Error(Stage::ingest, "unsupported image format: " + path.string());

    png_image png{};
    png.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_file(&png, path.c_str()))
        throw Error(Stage::ingest, "unreadable file " + path.string() + ": " + png.message);
    return finish_read(png, false);
}

Image decode_png(std::span<const std::uint8_t> bytes) {
    png_image png{};
    png.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_memory(&png, bytes.data(), bytes.size()))
        throw Error(Stage::ingest, std::string("png decode failed: ") + png.message);
    return finish_read(png, true);
}

std::vector<std::uint8_t> encode_png(const Image& image) {
    check_image(image);
    png_image png{};
    png.version = PNG_IMAGE_VERSION;
    png.width = static_cast<png_uint_32>(image.cols);
    png.height = static_cast<png_uint_32>(image.rows);
    png.format = png_format(image.channels);

    png.flags = PNG_IMAGE_FLAG_FAST;

    // One pass into a worst-case buffer; the size query would encode everything twice.
    png_alloc_size_t size = PNG_IMAGE_PNG_SIZE_MAX(png);
    std::vector<std::uint8_t> out(size);
    if (!png_image_write_to_memory(&png, out.data(), &size, 0, image.pixels.data(), 0, nullptr))
        throw Error(Stage::kmz, std::string("png encode failed: ") + png.message);
    out.resize(size);
    return out;
}

void write_png(const std::filesystem::path& path, const Image& image) {
    const auto bytes = encode_png(image);
    std::ofstream out(path, std::ios::binary);
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error(Stage::stitch, "cannot write " + path.string());
}

void write_ppm(const std::filesystem::path& path, const Image& image) {
    if (image.channels != 3) throw Error(Stage::synth, "ppm output requires RGB");
    std::ofstream out(path, std::ios::binary);
    out << "P6\n" << image.cols << ' ' << image.rows << "\n255\n";
    out.write(reinterpret_cast<const char*>(image.pixels.data()),
              static_cast<std::streamsize>(image.pixels.size()));
    if (!out) throw Error(Stage::synth, "cannot write " + path.string());
}

Image read_ppm(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(Stage::ingest, "unreadable file " + path.string());

    // Header tokens may be separated by whitespace and '#' comments.
    auto token = [&in]() {
        std::string tok;
        while (in) {
            int ch = in.get();
            if (ch == '#') {
                while (in && in.get() != '\n') {}
            } else if (std::isspace(ch)) {
                if (!tok.empty()) break;
            } else if (ch != EOF) {
                tok.push_back(static_cast<char>(ch));
            }
        }
        return tok;
    };
    if (token() != "P6") throw Error(Stage::ingest, "unreadable file " + path.string() + ": not a P6 ppm");
    std::size_t cols = 0, rows = 0, maxval = 0;
    try {
        cols = std::stoul(token());
        rows = std::stoul(token());
        maxval = std::stoul(token());
    } catch (const std::exception&) {
        throw Error(Stage::ingest, "unreadable file " + path.string() + ": bad ppm header");
    }
    if (maxval != 255) throw Error(Stage::ingest, "unreadable file " + path.string() + ": maxval must be 255");

    Image image(rows, cols, 3);
    in.read(reinterpret_cast<char*>(image.pixels.data()), static_cast<std::streamsize>(image.pixels.size()));
    if (in.gcount() != static_cast<std::streamsize>(image.pixels.size()))
        throw Error(Stage::ingest, "unreadable file " + path.string() + ": truncated pixel data");
    return image;
}

}  // namespace corstitch
