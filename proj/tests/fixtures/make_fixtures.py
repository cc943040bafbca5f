"""Regenerates the 2D fixture images cover.png and hidden.png (128x128)."""
import numpy as np
from PIL import Image
from scipy.ndimage import gaussian_filter

N = 128
yy, xx = np.mgrid[0:N, 0:N] / (N - 1)


def save(rgb, name):
    rgb = np.clip(rgb, 0.0, 1.0)
    Image.fromarray((rgb * 255 + 0.5).astype(np.uint8), "RGB").save(name)


def soften(rgb, sigma=1.2):
    return np.stack([gaussian_filter(rgb[..., c], sigma, mode="nearest") for c in range(3)], -1)


# cover: saturated discs over a two-tone sky
cover = np.zeros((N, N, 3))
cover[..., 0] = 0.9 * (1 - yy)
cover[..., 1] = 0.15
cover[..., 2] = 0.95 * yy
for cx, cy, r, col in [(0.3, 0.35, 0.2, (1.0, 0.9, 0.1)), (0.7, 0.65, 0.25, (0.05, 0.9, 0.3)),
                       (0.75, 0.2, 0.12, (1.0, 1.0, 1.0)), (0.25, 0.8, 0.14, (0.0, 0.0, 0.0))]:
    mask = (xx - cx) ** 2 + (yy - cy) ** 2 < r * r
    cover[mask] = col
save(soften(cover), "cover.png")

# hidden: coarse checkerboard with a bright diagonal band
cells = ((xx * 4).astype(int) + (yy * 4).astype(int)) % 2
hidden = np.zeros((N, N, 3))
hidden[cells == 1] = (0.95, 0.1, 0.6)
hidden[cells == 0] = (0.05, 0.6, 1.0)
band = np.abs(xx - yy) < 0.08
hidden[band] = (1.0, 1.0, 0.0)
save(soften(hidden), "hidden.png")

# 4x3 grayscale and grayscale+alpha images for decoder tests
gray = np.array([[0, 64, 128, 255], [10, 20, 30, 40], [255, 0, 255, 0]], np.uint8)
Image.fromarray(gray, "L").save("gray.png")
alpha = np.array([[255, 0, 128, 255], [255, 255, 255, 255], [0, 0, 0, 0]], np.uint8)
Image.fromarray(np.stack([gray, alpha], -1), "LA").save("gray_alpha.png")
