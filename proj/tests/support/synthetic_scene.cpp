#include "synthetic_scene.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <string>

#include <json.hpp>

#include "stegofield/png_io.hpp"
#include "stegofield/renderer.hpp"

namespace stegofield::testing {

namespace {

using Vec = std::array<double, 3>;

Vec sub(const Vec& a, const Vec& b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2]}; }
double dot(const Vec& a, const Vec& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }
Vec normalize(const Vec& v) {
    const double n = std::sqrt(dot(v, v));
    return {v[0] / n, v[1] / n, v[2] / n};
}
Vec cross(const Vec& a, const Vec& b) {
    return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}

struct Hit {
    double t = std::numeric_limits<double>::infinity();
    Vec normal{};
    Vec color{};
};

void hit_sphere(const Ray& ray, const Sphere& s, Hit& hit) {
    const Vec oc = sub(ray.origin, s.center);
    const double b = dot(oc, ray.direction);
    const double c = dot(oc, oc) - s.radius * s.radius;
    const double disc = b * b - c;
    if (disc < 0) return;
    const double t = -b - std::sqrt(disc);
    if (t <= 0 || t >= hit.t) return;
    hit.t = t;
    const Vec p{ray.origin[0] + t * ray.direction[0], ray.origin[1] + t * ray.direction[1],
                ray.origin[2] + t * ray.direction[2]};
    hit.normal = normalize(sub(p, s.center));
    hit.color = s.color;
}

void hit_box(const Ray& ray, const Box& box, Hit& hit) {
    double t0 = -std::numeric_limits<double>::infinity(), t1 = std::numeric_limits<double>::infinity();
    int axis = 0;
    double sign = 1;
    for (int i = 0; i < 3; ++i) {
        const double inv = 1.0 / ray.direction[i];
        double a = (box.lo[i] - ray.origin[i]) * inv, b = (box.hi[i] - ray.origin[i]) * inv;
        const double s = a < b ? -1.0 : 1.0;
        if (a > b) std::swap(a, b);
        if (a > t0) {
            t0 = a;
            axis = i;
            sign = s;
        }
        t1 = std::min(t1, b);
    }
    if (t0 > t1 || t0 <= 0 || t0 >= hit.t) return;
    hit.t = t0;
    hit.normal = {0, 0, 0};
    hit.normal[axis] = sign;
    hit.color = box.color;
}

}  // namespace

SyntheticScene cover_scene() {
    SyntheticScene s;
    s.spheres.push_back({{0.0, 0.0, 0.25}, 0.55, {0.9, 0.15, 0.1}});
    s.boxes.push_back({{-0.8, -0.8, -0.6}, {0.8, 0.8, -0.3}, {0.1, 0.2, 0.9}});
    return s;
}

SyntheticScene hidden_scene() {
    SyntheticScene s;
    s.spheres.push_back({{-0.5, 0.4, 0.0}, 0.35, {0.95, 0.85, 0.1}});
    s.spheres.push_back({{0.5, -0.4, 0.1}, 0.35, {0.95, 0.85, 0.1}});
    s.boxes.push_back({{-0.2, -0.2, -0.9}, {0.2, 0.2, 0.9}, {0.1, 0.8, 0.2}});
    return s;
}

std::array<double, 16> orbit_pose(double azimuth, double elevation, double radius) {
    const Vec eye{radius * std::cos(elevation) * std::cos(azimuth), radius * std::cos(elevation) * std::sin(azimuth),
                  radius * std::sin(elevation)};
    const Vec back = normalize(eye);  // camera +z points away from the target
    const Vec right = normalize(cross({0, 0, 1}, back));
    const Vec up = cross(back, right);
    return {right[0], up[0], back[0], eye[0], right[1], up[1], back[1], eye[1],
            right[2], up[2], back[2], eye[2], 0,        0,     0,       1};
}

void write_blender_scene(const SyntheticScene& scene, const std::filesystem::path& dir, const SceneLayout& layout) {
    std::filesystem::create_directories(dir);
    const Vec light = normalize({0.4, -0.5, 0.8});
    auto write_split = [&](const std::string& split, int views, double phase) {
        std::filesystem::create_directories(dir / split);
        nlohmann::json j;
        j["camera_angle_x"] = layout.camera_angle_x;
        j["frames"] = nlohmann::json::array();
        for (int v = 0; v < views; ++v) {
            const double az = 2.0 * std::numbers::pi * (v + phase) / views;
            const double el = (v % 2 == 0 ? 0.35 : 0.6);
            Camera cam;
            cam.camera_to_world = orbit_pose(az, el, layout.radius);
            cam.fov_x = layout.camera_angle_x;
            cam.width = layout.width;
            cam.height = layout.height;
            std::vector<float> rgba(static_cast<std::size_t>(layout.width) * layout.height * 4, 0.0f);
            for (int r = 0; r < layout.height; ++r)
                for (int c = 0; c < layout.width; ++c) {
                    const Ray ray = generate_ray(cam, r, c);
                    Hit hit;
                    for (const auto& s : scene.spheres) hit_sphere(ray, s, hit);
                    for (const auto& b : scene.boxes) hit_box(ray, b, hit);
                    if (!std::isfinite(hit.t)) continue;
                    const double shade = 0.35 + 0.65 * std::max(0.0, dot(hit.normal, light));
                    float* px = rgba.data() + (static_cast<std::size_t>(r) * layout.width + c) * 4;
                    for (int i = 0; i < 3; ++i) px[i] = static_cast<float>(hit.color[i] * shade);
                    px[3] = 1.0f;
                }
            const std::string name = split + "/r_" + std::to_string(v);
            write_png_rgba(layout.width, layout.height, rgba, dir / (name + ".png"));
            nlohmann::json m = nlohmann::json::array();
            for (int i = 0; i < 4; ++i) {
                nlohmann::json row = nlohmann::json::array();
                for (int k = 0; k < 4; ++k) row.push_back(cam.camera_to_world[static_cast<std::size_t>(i * 4 + k)]);
                m.push_back(row);
            }
            j["frames"].push_back({{"file_path", "./" + name}, {"transform_matrix", m}});
        }
        std::ofstream(dir / ("transforms_" + split + ".json")) << j.dump(2);
    };
    write_split("train", layout.train_views, 0.0);
    write_split("test", layout.test_views, 0.5);
}

}  // namespace stegofield::testing
