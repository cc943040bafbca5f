#include "stegofield/metrics.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace stegofield {
namespace {

void require_same_shape(const Image& a, const Image& b) {
    if (a.width != b.width || a.height != b.height) throw std::invalid_argument("image dimensions differ");
    if (a.width < 1 || a.height < 1) throw std::invalid_argument("empty image");
}

constexpr int kWindow = 11;
constexpr int kRadius = kWindow / 2;

std::array<double, kWindow> gaussian_taps() {
    std::array<double, kWindow> taps{};
    double sum = 0.0;
    for (int i = 0; i < kWindow; ++i) {
        const double d = i - kRadius;
        taps[static_cast<std::size_t>(i)] = std::exp(-d * d / (2.0 * 1.5 * 1.5));
        sum += taps[static_cast<std::size_t>(i)];
    }
    for (double& t : taps) t /= sum;
    return taps;
}

// Valid-region separable filter of a single-channel plane.
std::vector<double> blur_valid(const std::vector<double>& plane, int width, int height,
                               const std::array<double, kWindow>& taps) {
    const int ow = width - kWindow + 1;
    const int oh = height - kWindow + 1;
    std::vector<double> horizontal(static_cast<std::size_t>(ow) * height);
    for (int y = 0; y < height; ++y)
        for (int x = 0; x < ow; ++x) {
            double s = 0.0;
            for (int k = 0; k < kWindow; ++k)
                s += taps[static_cast<std::size_t>(k)] * plane[static_cast<std::size_t>(y) * width + x + k];
            horizontal[static_cast<std::size_t>(y) * ow + x] = s;
        }
    std::vector<double> out(static_cast<std::size_t>(ow) * oh);
    for (int y = 0; y < oh; ++y)
        for (int x = 0; x < ow; ++x) {
            double s = 0.0;
            for (int k = 0; k < kWindow; ++k)
                s += taps[static_cast<std::size_t>(k)] * horizontal[static_cast<std::size_t>(y + k) * ow + x];
            out[static_cast<std::size_t>(y) * ow + x] = s;
        }
    return out;
}

}  // namespace

double psnr(const Image& a, const Image& b) {
    require_same_shape(a, b);
    double sum = 0.0;
    for (std::size_t i = 0; i < a.pixels.size(); ++i) {
        const double d = static_cast<double>(a.pixels[i]) - static_cast<double>(b.pixels[i]);
        sum += d * d;
    }
    const double mse = sum / static_cast<double>(a.pixels.size());
    if (mse == 0.0) return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(1.0 / mse);
}

double ssim(const Image& a, const Image& b) {
    require_same_shape(a, b);
    if (a.width < kWindow || a.height < kWindow) throw std::invalid_argument("SSIM needs images of at least 11x11");
    constexpr double c1 = 0.01 * 0.01;
    constexpr double c2 = 0.03 * 0.03;
    const auto taps = gaussian_taps();
    const std::size_t n = a.pixel_count();

    double total = 0.0;
    for (int c = 0; c < 3; ++c) {
        std::vector<double> x(n), y(n), xx(n), yy(n), xy(n);
        for (std::size_t i = 0; i < n; ++i) {
            x[i] = a.pixels[i * 3 + static_cast<std::size_t>(c)];
            y[i] = b.pixels[i * 3 + static_cast<std::size_t>(c)];
            xx[i] = x[i] * x[i];
            yy[i] = y[i] * y[i];
            xy[i] = x[i] * y[i];
        }
        const auto mx = blur_valid(x, a.width, a.height, taps);
        const auto my = blur_valid(y, a.width, a.height, taps);
        const auto sxx = blur_valid(xx, a.width, a.height, taps);
        const auto syy = blur_valid(yy, a.width, a.height, taps);
        const auto sxy = blur_valid(xy, a.width, a.height, taps);
        double sum = 0.0;
        for (std::size_t i = 0; i < mx.size(); ++i) {
            const double vx = sxx[i] - mx[i] * mx[i];
            const double vy = syy[i] - my[i] * my[i];
            const double cov = sxy[i] - mx[i] * my[i];
            sum += ((2 * mx[i] * my[i] + c1) * (2 * cov + c2)) /
                   ((mx[i] * mx[i] + my[i] * my[i] + c1) * (vx + vy + c2));
        }
        total += sum / static_cast<double>(mx.size());
    }
    return total / 3.0;
}

}  // namespace stegofield
