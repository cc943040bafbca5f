#include <doctest.h>

#include <stdexcept>

#include <cmath>

#include "stegofield/metrics.hpp"
#include "stegofield/random.hpp"

using namespace stegofield;

namespace {

Image random_image(int w, int h, std::uint64_t seed) {
    Image img(w, h);
    Rng rng(seed);
    for (float& v : img.pixels) v = static_cast<float>(uniform01(rng));
    return img;
}

// Full 2D window at every valid position.
double ssim_oracle(const Image& a, const Image& b) {
    double win[11][11], total = 0;
    for (int i = 0; i < 11; ++i)
        for (int j = 0; j < 11; ++j) total += win[i][j] = std::exp(-((i - 5) * (i - 5) + (j - 5) * (j - 5)) / (2 * 1.5 * 1.5));
    const double c1 = 0.01 * 0.01, c2 = 0.03 * 0.03;
    double sum = 0;
    int count = 0;
    for (int ch = 0; ch < 3; ++ch)
        for (int r = 0; r + 11 <= a.height; ++r)
            for (int c = 0; c + 11 <= a.width; ++c) {
                double ma = 0, mb = 0, saa = 0, sbb = 0, sab = 0;
                for (int i = 0; i < 11; ++i)
                    for (int j = 0; j < 11; ++j) {
                        const double w = win[i][j] / total, x = a.at(r + i, c + j)[ch], y = b.at(r + i, c + j)[ch];
                        ma += w * x;
                        mb += w * y;
                        saa += w * x * x;
                        sbb += w * y * y;
                        sab += w * x * y;
                    }
                const double va = saa - ma * ma, vb = sbb - mb * mb, cov = sab - ma * mb;
                sum += ((2 * ma * mb + c1) * (2 * cov + c2)) / ((ma * ma + mb * mb + c1) * (va + vb + c2));
                ++count;
            }
    return sum / count;
}

}  // namespace

TEST_CASE("psnr") {
    const Image a = random_image(16, 12, 1);
    CHECK(std::isinf(psnr(a, a)));
    Image b = a;
    Image flat(8, 8, 0.3f), shifted(8, 8, 0.4f);
    CHECK(psnr(flat, shifted) == doctest::Approx(20.0).epsilon(1e-5));

    const Image c = random_image(16, 12, 2);
    double mse = 0;
    for (std::size_t i = 0; i < a.pixels.size(); ++i) mse += (double(a.pixels[i]) - c.pixels[i]) * (double(a.pixels[i]) - c.pixels[i]);
    mse /= static_cast<double>(a.pixels.size());
    CHECK(std::abs(psnr(a, c) - 10 * std::log10(1 / mse)) <= 1e-6);
    CHECK(psnr(a, c) == psnr(c, a));
    CHECK_THROWS_AS(psnr(a, Image(12, 16)), std::invalid_argument);
}

TEST_CASE("ssim") {
    const Image a = random_image(32, 24, 3), b = random_image(32, 24, 4);
    CHECK(ssim(a, a) == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(std::abs(ssim(a, b) - ssim(b, a)) <= 1e-9);
    CHECK(std::abs(ssim(a, b) - ssim_oracle(a, b)) <= 1e-4);

    Image smooth(40, 30);
    for (int r = 0; r < 30; ++r)
        for (int c = 0; c < 40; ++c)
            for (int k = 0; k < 3; ++k) smooth.at(r, c)[k] = 0.5f + 0.4f * std::sin(0.2f * r + 0.3f * c + k);
    Image noisy = smooth;
    Rng rng(5);
    for (float& v : noisy.pixels) v += static_cast<float>(0.05 * (uniform01(rng) - 0.5));
    CHECK(std::abs(ssim(smooth, noisy) - ssim_oracle(smooth, noisy)) <= 1e-4);
    CHECK(ssim(smooth, noisy) < 1.0);

    const Image light(16, 16, 0.75f), dark(16, 16, 0.25f);
    CHECK(ssim(light, dark) < 1.0);
    CHECK_THROWS_AS(ssim(Image(10, 20), Image(10, 20)), std::invalid_argument);
    CHECK_THROWS_AS(ssim(a, Image(24, 32)), std::invalid_argument);
}
