#pragma once

#include <array>
#include <filesystem>

#include "stegofield/image.hpp"

namespace stegofield {

/// Decodes an 8-bit PNG (gray, gray+alpha, RGB or RGBA). Gray is replicated
/// across channels; alpha is composited over `background`.
Image read_png(const std::filesystem::path& path, const std::array<float, 3>& background = {0.0f, 0.0f, 0.0f});

/// Writes an 8-bit RGB PNG, quantizing each channel as round(255 * clamp(v, 0, 1)).
void write_png(const Image& image, const std::filesystem::path& path);

/// Same as write_png but with an alpha channel (RGBA, 4 floats per pixel).
void write_png_rgba(int width, int height, const std::vector<float>& rgba, const std::filesystem::path& path);

}  // namespace stegofield
