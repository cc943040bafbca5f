#pragma once

#include "stegofield/image.hpp"

namespace stegofield {

/// 10 log10(1 / MSE) over all channels; +infinity for identical images.
double psnr(const Image& a, const Image& b);

/// Mean SSIM over the valid region of an 11x11 Gaussian window (sigma 1.5),
/// C1 = 0.01^2, C2 = 0.03^2, averaged over the three channels.
/// Both images must be at least 11x11.
double ssim(const Image& a, const Image& b);

}  // namespace stegofield
