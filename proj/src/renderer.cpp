#include "stegofield/renderer.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "stegofield/parallel.hpp"

namespace stegofield {

double Camera::focal_length() const { return 0.5 * width / std::tan(0.5 * fov_x); }

void Camera::validate(double tolerance) const {
    if (width < 1 || height < 1) throw std::invalid_argument("camera image size must be positive");
    if (!(fov_x > 0.0 && fov_x < std::numbers::pi)) throw std::invalid_argument("camera fov must be in (0, pi)");
    if (!(near_depth < far_depth)) throw std::invalid_argument("camera near must be < far");
    for (double v : camera_to_world) {
        if (!std::isfinite(v)) throw std::invalid_argument("camera pose is not finite");
    }
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            double dot = 0.0;
            for (int k = 0; k < 3; ++k) dot += camera_to_world[static_cast<std::size_t>(k * 4 + i)] *
                                               camera_to_world[static_cast<std::size_t>(k * 4 + j)];
            if (std::abs(dot - (i == j ? 1.0 : 0.0)) > tolerance)
                throw std::invalid_argument("camera rotation is not orthonormal");
        }
}

Ray generate_ray(const Camera& camera, int row, int col) {
    if (row < 0 || row >= camera.height || col < 0 || col >= camera.width)
        throw std::out_of_range("pixel (" + std::to_string(row) + ", " + std::to_string(col) + ") outside the image");
    const double f = camera.focal_length();
    const std::array<double, 3> local{(col + 0.5 - 0.5 * camera.width) / f, -(row + 0.5 - 0.5 * camera.height) / f,
                                      -1.0};
    const auto& m = camera.camera_to_world;
    Ray ray;
    ray.origin = camera.origin();
    double norm = 0.0;
    for (std::size_t i = 0; i < 3; ++i) {
        ray.direction[i] = m[i * 4] * local[0] + m[i * 4 + 1] * local[1] + m[i * 4 + 2] * local[2];
        norm += ray.direction[i] * ray.direction[i];
    }
    norm = std::sqrt(norm);
    for (double& d : ray.direction) d /= norm;
    return ray;
}

RaySamples sample_along_ray(double near_depth, double far_depth, int count, Rng* jitter) {
    if (count < 1) throw std::invalid_argument("need at least one sample per ray");
    if (!(near_depth < far_depth)) throw std::invalid_argument("near must be < far");
    const double bin = (far_depth - near_depth) / count;
    RaySamples s;
    s.depths.resize(static_cast<std::size_t>(count));
    s.deltas.resize(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) {
        const double u = jitter ? uniform01(*jitter) : 0.5;
        s.depths[static_cast<std::size_t>(i)] = near_depth + (i + u) * bin;
    }
    for (int i = 0; i + 1 < count; ++i)
        s.deltas[static_cast<std::size_t>(i)] = s.depths[static_cast<std::size_t>(i) + 1] - s.depths[static_cast<std::size_t>(i)];
    s.deltas.back() = bin;
    return s;
}

template <class Real>
CompositeResult<Real> composite(std::span<const Real> colors, std::span<const Real> densities,
                                std::span<const Real> deltas, std::span<Real> weights) {
    const std::size_t n = densities.size();
    if (n == 0 || deltas.size() != n || colors.size() != 3 * n)
        throw std::invalid_argument("composite: sample arrays must share one length >= 1");
    if (!weights.empty() && weights.size() != n) throw std::invalid_argument("composite: weight buffer size");
    CompositeResult<Real> out;
    Real optical_depth = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (!(densities[i] >= Real(0))) throw std::invalid_argument("composite: negative density");
        const Real t = std::exp(-optical_depth);
        const Real tau = densities[i] * deltas[i];
        const Real w = t * -std::expm1(-tau);
        for (std::size_t c = 0; c < 3; ++c) out.color[c] += w * colors[i * 3 + c];
        if (!weights.empty()) weights[i] = w;
        optical_depth += tau;
    }
    out.transmittance = std::exp(-optical_depth);
    return out;
}

template <class Real>
void composite_backward(std::span<const Real> colors, std::span<const Real> densities, std::span<const Real> deltas,
                        const std::array<Real, 3>& background, const std::array<Real, 3>& grad_pixel,
                        std::span<Real> grad_colors, std::span<Real> grad_densities) {
    const std::size_t n = densities.size();
    if (deltas.size() != n || colors.size() != 3 * n || grad_colors.size() != 3 * n || grad_densities.size() != n)
        throw std::invalid_argument("composite_backward: size mismatch");
    std::vector<Real> transmittance(n + 1);
    std::vector<Real> weight(n);
    Real optical_depth = 0;
    for (std::size_t i = 0; i < n; ++i) {
        transmittance[i] = std::exp(-optical_depth);
        const Real tau = densities[i] * deltas[i];
        weight[i] = transmittance[i] * -std::expm1(-tau);
        optical_depth += tau;
    }
    transmittance[n] = std::exp(-optical_depth);

    // suffix = sum_{k>i} w_k c_k + T_{n+1} bg, projected on grad_pixel
    Real suffix = 0;
    for (std::size_t c = 0; c < 3; ++c) suffix += transmittance[n] * background[c] * grad_pixel[c];
    for (std::size_t i = n; i-- > 0;) {
        Real gc = 0;
        for (std::size_t c = 0; c < 3; ++c) {
            grad_colors[i * 3 + c] = weight[i] * grad_pixel[c];
            gc += colors[i * 3 + c] * grad_pixel[c];
        }
        grad_densities[i] = deltas[i] * (transmittance[i + 1] * gc - suffix);
        suffix += weight[i] * gc;
    }
}

template CompositeResult<float> composite<float>(std::span<const float>, std::span<const float>,
                                                 std::span<const float>, std::span<float>);
template CompositeResult<double> composite<double>(std::span<const double>, std::span<const double>,
                                                   std::span<const double>, std::span<double>);
template void composite_backward<float>(std::span<const float>, std::span<const float>, std::span<const float>,
                                        const std::array<float, 3>&, const std::array<float, 3>&, std::span<float>,
                                        std::span<float>);
template void composite_backward<double>(std::span<const double>, std::span<const double>, std::span<const double>,
                                         const std::array<double, 3>&, const std::array<double, 3>&,
                                         std::span<double>, std::span<double>);

bool to_unit_cube(const BoundingBox& box, const std::array<double, 3>& world, std::array<float, 3>& unit) {
    for (std::size_t i = 0; i < 3; ++i) {
        const double u = world[i] * box.scale[i] + box.offset[i];
        if (!(u >= 0.0 && u <= 1.0)) return false;
        unit[i] = static_cast<float>(u);
    }
    return true;
}

namespace {

struct RowScratch {
    FieldWorkspace<float> ws;
    std::vector<float> points, dirs, outputs, colors, densities, deltas;
    std::vector<int> inside;
};

void render_row(const StegoField& field, const Camera& camera, const KeySet& keys, const RenderOptions& options,
                int row, RowScratch& s, Image& image) {
    const auto n = static_cast<std::size_t>(options.samples_per_ray);
    const RaySamples samples = sample_along_ray(camera.near_depth, camera.far_depth, options.samples_per_ray);
    for (int col = 0; col < camera.width; ++col) {
        const Ray ray = generate_ray(camera, row, col);
        s.points.clear();
        s.dirs.clear();
        s.inside.clear();
        for (std::size_t i = 0; i < n; ++i) {
            std::array<double, 3> world{};
            for (std::size_t a = 0; a < 3; ++a) world[a] = ray.origin[a] + samples.depths[i] * ray.direction[a];
            std::array<float, 3> unit{};
            if (!to_unit_cube(field.bounding_box, world, unit)) continue;
            s.inside.push_back(static_cast<int>(i));
            s.points.insert(s.points.end(), unit.begin(), unit.end());
            for (double d : ray.direction) s.dirs.push_back(static_cast<float>(d));
        }
        float* px = image.at(row, col);
        if (s.inside.empty()) {
            for (std::size_t c = 0; c < 3; ++c) px[c] = options.background[c];
            continue;
        }
        const std::size_t m = s.inside.size();
        s.outputs.resize(m * 4);
        field_forward<float>(field, s.points, s.dirs, keys, s.ws, s.outputs);
        s.colors.resize(m * 3);
        s.densities.resize(m);
        s.deltas.resize(m);
        for (std::size_t k = 0; k < m; ++k) {
            for (std::size_t c = 0; c < 3; ++c) s.colors[k * 3 + c] = s.outputs[k * 4 + c];
            s.densities[k] = s.outputs[k * 4 + 3];
            s.deltas[k] = static_cast<float>(samples.deltas[static_cast<std::size_t>(s.inside[k])]);
        }
        const auto result = composite<float>(s.colors, s.densities, s.deltas);
        for (std::size_t c = 0; c < 3; ++c) px[c] = result.color[c] + result.transmittance * options.background[c];
    }
}

void check_render_inputs(const StegoField& field, const Camera& camera, const KeySet& keys) {
    if (field.mode() != FieldMode::Radiance3D) throw std::invalid_argument("render_image needs a 3D field");
    camera.validate();
    check_encode_inputs(field.grid(), keys);
}

}  // namespace

Image render_image(const StegoField& field, const Camera& camera, const KeySet& keys, const RenderOptions& options) {
    check_render_inputs(field, camera, keys);
    Image image(camera.width, camera.height);
    const int workers = parallel::worker_count();
#pragma omp parallel num_threads(workers) if (workers > 1)
    {
        RowScratch scratch;
#pragma omp for schedule(dynamic, 1)
        for (int row = 0; row < camera.height; ++row) render_row(field, camera, keys, options, row, scratch, image);
    }
    return image;
}

Image render_image_serial(const StegoField& field, const Camera& camera, const KeySet& keys,
                          const RenderOptions& options) {
    check_render_inputs(field, camera, keys);
    Image image(camera.width, camera.height);
    RowScratch scratch;
    for (int row = 0; row < camera.height; ++row) render_row(field, camera, keys, options, row, scratch, image);
    return image;
}

namespace {

void render_row_2d(const StegoField& field, const KeySet& keys, int row, int width, int height,
                   FieldWorkspace<float>& ws, std::vector<float>& points, Image& image) {
    points.resize(static_cast<std::size_t>(width) * 2);
    for (int col = 0; col < width; ++col) {
        const auto p = pixel_center_2d(row, col, width, height);
        points[static_cast<std::size_t>(col) * 2] = p[0];
        points[static_cast<std::size_t>(col) * 2 + 1] = p[1];
    }
    field_forward<float>(field, points, {}, keys, ws,
                         std::span<float>(image.at(row, 0), static_cast<std::size_t>(width) * 3));
}

void check_2d_inputs(const StegoField& field, const KeySet& keys) {
    if (field.mode() != FieldMode::Image2D) throw std::invalid_argument("render_image_2d needs a 2D field");
    check_encode_inputs(field.grid(), keys);
}

}  // namespace

Image render_image_2d(const StegoField& field, const KeySet& keys, int width, int height) {
    check_2d_inputs(field, keys);
    Image image(width, height);
    const int workers = parallel::worker_count();
#pragma omp parallel num_threads(workers) if (workers > 1)
    {
        FieldWorkspace<float> ws;
        std::vector<float> points;
#pragma omp for schedule(static)
        for (int row = 0; row < height; ++row) render_row_2d(field, keys, row, width, height, ws, points, image);
    }
    return image;
}

Image render_image_2d_serial(const StegoField& field, const KeySet& keys, int width, int height) {
    check_2d_inputs(field, keys);
    Image image(width, height);
    FieldWorkspace<float> ws;
    std::vector<float> points;
    for (int row = 0; row < height; ++row) render_row_2d(field, keys, row, width, height, ws, points, image);
    return image;
}

}  // namespace stegofield
