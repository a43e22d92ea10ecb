#pragma once

#include <filesystem>
#include <random>
#include <string>

#include "corstitch/grid.hpp"
#include "corstitch/image.hpp"

namespace testutil {

inline corstitch::RealGrid random_grid(std::size_t rows, std::size_t cols, std::mt19937_64& rng,
                                       double lo = 0.0, double hi = 255.0) {
    std::uniform_real_distribution<double> uni(lo, hi);
    corstitch::RealGrid g(rows, cols);
    for (auto& v : g.values()) v = uni(rng);
    return g;
}

inline corstitch::Image solid_image(std::size_t rows, std::size_t cols, std::uint8_t r, std::uint8_t g,
                                    std::uint8_t b) {
    corstitch::Image img(rows, cols, 3);
    for (std::size_t i = 0; i < rows * cols; ++i) {
        img.pixels[3 * i] = r;
        img.pixels[3 * i + 1] = g;
        img.pixels[3 * i + 2] = b;
    }
    return img;
}

// Scratch directory removed on scope exit.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        std::random_device rd;
        path_ = std::filesystem::temp_directory_path() / ("corstitch_" + tag + "_" + std::to_string(rd()));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;
    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
};

}  // namespace testutil
