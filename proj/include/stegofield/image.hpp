#pragma once

#include <array>
#include <stdexcept>
#include <vector>

namespace stegofield {

/// Row-major RGB image with channel values nominally in [0, 1].
struct Image {
    int width = 0;
    int height = 0;
    std::vector<float> pixels;

    Image() = default;
    Image(int w, int h, float fill = 0.0f) : width(w), height(h), pixels(static_cast<std::size_t>(w) * h * 3, fill) {
        if (w < 1 || h < 1) throw std::invalid_argument("image dimensions must be >= 1");
    }

    std::size_t pixel_count() const noexcept { return static_cast<std::size_t>(width) * height; }

    float* at(int row, int col) noexcept { return pixels.data() + (static_cast<std::size_t>(row) * width + col) * 3; }
    const float* at(int row, int col) const noexcept {
        return pixels.data() + (static_cast<std::size_t>(row) * width + col) * 3;
    }

    friend bool operator==(const Image&, const Image&) = default;
};

}  // namespace stegofield
