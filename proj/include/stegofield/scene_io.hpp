#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "stegofield/field.hpp"
#include "stegofield/image.hpp"
#include "stegofield/renderer.hpp"

namespace stegofield {

struct View {
    Image image;
    std::optional<Camera> camera;  // absent in 2D mode
};

/// Posed images (3D) or a single target image (2D).
struct SceneDataset {
    FieldMode mode = FieldMode::Image2D;
    std::string split = "train";
    std::vector<View> views;
    BoundingBox bounding_box;
    bool white_background = false;

    int width() const { return views.empty() ? 0 : views.front().image.width; }
    int height() const { return views.empty() ? 0 : views.front().image.height; }
    /// Total pixel count over all views.
    std::size_t sample_count() const;
};

struct BlenderLoadOptions {
    bool white_background = true;
    double near_depth = 2.0;
    double far_depth = 6.0;
};

/// Reads <dir>/transforms_<split>.json (camera_angle_x, frames[].file_path,
/// frames[].transform_matrix as 4x4 camera-to-world). Optional top-level
/// "near", "far" and "aabb": [[x,y,z],[x,y,z]] override the defaults; the
/// default box is [-1.5, 1.5]^3.
SceneDataset load_blender_dataset(const std::filesystem::path& dir, const std::string& split,
                                  const BlenderLoadOptions& options = {});

/// One PNG as a 2D dataset.
SceneDataset load_image_dataset(const std::filesystem::path& png);

/// Cover and hidden PNGs as two independent 2D datasets.
std::pair<SceneDataset, SceneDataset> load_image_pair(const std::filesystem::path& cover,
                                                      const std::filesystem::path& hidden);

}  // namespace stegofield
