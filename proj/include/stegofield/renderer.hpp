#pragma once

#include <array>
#include <span>
#include <vector>

#include "stegofield/field.hpp"
#include "stegofield/image.hpp"
#include "stegofield/key_schedule.hpp"
#include "stegofield/random.hpp"

namespace stegofield {

/// Pinhole camera. +x right, +y up, looking down -z in camera space.
struct Camera {
    std::array<double, 16> camera_to_world{1, 0, 0, 0, 0, 1, 0, 0, 0, 0, 1, 0, 0, 0, 0, 1};  // row-major 4x4
    double fov_x = 0.6911112070083618;
    int width = 64;
    int height = 64;
    double near_depth = 2.0;
    double far_depth = 6.0;

    double focal_length() const;
    std::array<double, 3> origin() const { return {camera_to_world[3], camera_to_world[7], camera_to_world[11]}; }
    /// Throws std::invalid_argument unless the rotation block is orthonormal
    /// within `tolerance`, near < far, fov in (0, pi) and the size is positive.
    void validate(double tolerance = 1e-4) const;
};

struct Ray {
    std::array<double, 3> origin{};
    std::array<double, 3> direction{};
};

/// Ray through the center of pixel (row, col).
Ray generate_ray(const Camera& camera, int row, int col);

struct RaySamples {
    std::vector<double> depths;
    std::vector<double> deltas;
};

/// Stratified depths in [near, far]: bin midpoints without jitter, otherwise
/// one uniform draw per bin. The last spacing is the bin width.
RaySamples sample_along_ray(double near_depth, double far_depth, int count, Rng* jitter = nullptr);

template <class Real>
struct CompositeResult {
    std::array<Real, 3> color{};
    Real transmittance = 1;  // left over after the last sample
};

/// Alpha compositing of n samples: sum_i T_i (1 - exp(-sigma_i delta_i)) c_i,
/// T_i = exp(-sum_{j<i} sigma_j delta_j). colors is n x 3. Per-sample weights
/// are written to `weights` when it is non-empty.
template <class Real>
CompositeResult<Real> composite(std::span<const Real> colors, std::span<const Real> densities,
                                std::span<const Real> deltas, std::span<Real> weights = {});

/// Gradient of (composite color + transmittance * background) with respect to
/// every sample color and density, given dL/d(pixel color).
template <class Real>
void composite_backward(std::span<const Real> colors, std::span<const Real> densities, std::span<const Real> deltas,
                        const std::array<Real, 3>& background, const std::array<Real, 3>& grad_pixel,
                        std::span<Real> grad_colors, std::span<Real> grad_densities);

struct RenderOptions {
    int samples_per_ray = 64;
    /// Background color composited behind the residual transmittance.
    std::array<float, 3> background{0.0f, 0.0f, 0.0f};
};

/// Volume-renders a 3D field. Rows run in parallel; results do not depend on
/// the thread count.
Image render_image(const StegoField& field, const Camera& camera, const KeySet& keys, const RenderOptions& options);
Image render_image_serial(const StegoField& field, const Camera& camera, const KeySet& keys,
                          const RenderOptions& options);

/// Evaluates a 2D field at every pixel center of a width x height image.
Image render_image_2d(const StegoField& field, const KeySet& keys, int width, int height);
Image render_image_2d_serial(const StegoField& field, const KeySet& keys, int width, int height);

/// Pixel center of (row, col) in [0,1]^2, x along columns.
inline std::array<float, 2> pixel_center_2d(int row, int col, int width, int height) {
    return {static_cast<float>((col + 0.5) / width), static_cast<float>((row + 0.5) / height)};
}

/// world -> unit cube; false when the point falls outside [0,1]^3.
bool to_unit_cube(const BoundingBox& box, const std::array<double, 3>& world, std::array<float, 3>& unit);

}  // namespace stegofield

namespace stegofield {

/// Render options matching the field's stored background flag.
inline RenderOptions default_render_options(const StegoField& field, int samples_per_ray = 64) {
    RenderOptions options;
    options.samples_per_ray = samples_per_ray;
    const float bg = field.white_background ? 1.0f : 0.0f;
    options.background = {bg, bg, bg};
    return options;
}

}  // namespace stegofield
