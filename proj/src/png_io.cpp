#include "stegofield/png_io.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <vector>

#include "stegofield/error.hpp"

namespace stegofield {
namespace {

std::uint8_t quantize(float v) {
    const float clamped = std::clamp(std::isfinite(v) ? v : 0.0f, 0.0f, 1.0f);
    return static_cast<std::uint8_t>(std::lround(255.0f * clamped));
}

void write_buffer(int width, int height, std::uint32_t format, const std::vector<std::uint8_t>& bytes,
                  const std::filesystem::path& path) {
    png_image png;
    std::memset(&png, 0, sizeof(png));
    png.version = PNG_IMAGE_VERSION;
    png.width = static_cast<png_uint_32>(width);
    png.height = static_cast<png_uint_32>(height);
    png.format = format;
    if (!png_image_write_to_file(&png, path.string().c_str(), 0, bytes.data(), 0, nullptr))
        throw DataError(DataError::Kind::Io, "cannot write PNG " + path.string() + ": " + png.message);
}

}  // namespace

Image read_png(const std::filesystem::path& path, const std::array<float, 3>& background) {
    if (!std::filesystem::is_regular_file(path)) throw DataError(DataError::Kind::Io, "cannot read PNG " + path.string());
    png_image png;
    std::memset(&png, 0, sizeof(png));
    png.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_file(&png, path.string().c_str()))
        throw DataError(DataError::Kind::Format, "cannot decode PNG " + path.string() + ": " + png.message);
    png.format = PNG_FORMAT_RGBA;
    std::vector<std::uint8_t> bytes(PNG_IMAGE_SIZE(png));
    if (!png_image_finish_read(&png, nullptr, bytes.data(), 0, nullptr)) {
        png_image_free(&png);
        throw DataError(DataError::Kind::Format, "cannot decode PNG " + path.string() + ": " + png.message);
    }
    if (png.width < 1 || png.height < 1) throw DataError(DataError::Kind::Format, "empty PNG " + path.string());

    Image image(static_cast<int>(png.width), static_cast<int>(png.height));
    for (std::size_t i = 0; i < image.pixel_count(); ++i) {
        const float alpha = bytes[i * 4 + 3] / 255.0f;
        for (std::size_t c = 0; c < 3; ++c) {
            const float value = bytes[i * 4 + c] / 255.0f;
            image.pixels[i * 3 + c] = alpha == 1.0f ? value : value * alpha + background[c] * (1.0f - alpha);
        }
    }
    return image;
}

void write_png(const Image& image, const std::filesystem::path& path) {
    std::vector<std::uint8_t> bytes(image.pixels.size());
    std::transform(image.pixels.begin(), image.pixels.end(), bytes.begin(), quantize);
    write_buffer(image.width, image.height, PNG_FORMAT_RGB, bytes, path);
}

void write_png_rgba(int width, int height, const std::vector<float>& rgba, const std::filesystem::path& path) {
    if (rgba.size() != static_cast<std::size_t>(width) * height * 4)
        throw std::invalid_argument("RGBA buffer size mismatch");
    std::vector<std::uint8_t> bytes(rgba.size());
    std::transform(rgba.begin(), rgba.end(), bytes.begin(), quantize);
    write_buffer(width, height, PNG_FORMAT_RGBA, bytes, path);
}

}  // namespace stegofield
