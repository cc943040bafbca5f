#pragma once

#include <array>
#include <filesystem>
#include <vector>

namespace stegofield::testing {

struct Sphere {
    std::array<double, 3> center;
    double radius;
    std::array<double, 3> color;
};

struct Box {
    std::array<double, 3> lo;
    std::array<double, 3> hi;
    std::array<double, 3> color;
};

struct SyntheticScene {
    std::vector<Sphere> spheres;
    std::vector<Box> boxes;
};

/// Red sphere and blue slab.
SyntheticScene cover_scene();
/// Two yellow spheres and a green pillar.
SyntheticScene hidden_scene();

struct SceneLayout {
    int width = 64;
    int height = 64;
    int train_views = 8;
    int test_views = 4;
    double radius = 4.0;
    double camera_angle_x = 0.6911112070083618;
};

/// Writes transforms_train.json, transforms_test.json and RGBA PNGs (alpha 0
/// where rays miss) in the Blender synthetic layout. Cameras orbit the origin.
void write_blender_scene(const SyntheticScene& scene, const std::filesystem::path& dir, const SceneLayout& layout = {});

/// Row-major camera-to-world matrix of an orbit camera looking at the origin.
std::array<double, 16> orbit_pose(double azimuth, double elevation, double radius);

}  // namespace stegofield::testing
