#include "stegofield/scene_io.hpp"

#include <cmath>
#include <fstream>

#include <json.hpp>

#include "stegofield/error.hpp"
#include "stegofield/png_io.hpp"

namespace stegofield {
namespace {

using nlohmann::json;

[[noreturn]] void format_error(const std::string& what) { throw DataError(DataError::Kind::Format, what); }

std::array<double, 3> read_vec3(const json& node, const std::string& what) {
    if (!node.is_array() || node.size() != 3) format_error(what + " must be a 3-vector");
    std::array<double, 3> v{};
    for (std::size_t i = 0; i < 3; ++i) {
        if (!node[i].is_number()) format_error(what + " must be numeric");
        v[i] = node[i].get<double>();
    }
    return v;
}

std::array<double, 16> read_pose(const json& node) {
    if (!node.is_array() || node.size() != 4) format_error("transform_matrix must be 4x4");
    std::array<double, 16> m{};
    for (std::size_t r = 0; r < 4; ++r) {
        const json& row = node[r];
        if (!row.is_array() || row.size() != 4) format_error("transform_matrix must be 4x4");
        for (std::size_t c = 0; c < 4; ++c) {
            if (!row[c].is_number()) format_error("transform_matrix entries must be numeric");
            m[r * 4 + c] = row[c].get<double>();
        }
    }
    return m;
}

}  // namespace

std::size_t SceneDataset::sample_count() const {
    std::size_t n = 0;
    for (const View& v : views) n += v.image.pixel_count();
    return n;
}

SceneDataset load_blender_dataset(const std::filesystem::path& dir, const std::string& split,
                                  const BlenderLoadOptions& options) {
    const std::filesystem::path meta_path = dir / ("transforms_" + split + ".json");
    std::ifstream in(meta_path);
    if (!in) throw DataError(DataError::Kind::Io, "missing " + meta_path.string());
    json meta;
    try {
        in >> meta;
    } catch (const json::exception& e) {
        format_error("malformed JSON in " + meta_path.string() + ": " + e.what());
    }
    if (!meta.is_object() || !meta.contains("camera_angle_x") || !meta["camera_angle_x"].is_number())
        format_error(meta_path.string() + ": camera_angle_x missing");
    if (!meta.contains("frames") || !meta["frames"].is_array() || meta["frames"].empty())
        format_error(meta_path.string() + ": frames missing or empty");

    SceneDataset data;
    data.mode = FieldMode::Radiance3D;
    data.split = split;
    data.white_background = options.white_background;
    double near_depth = options.near_depth, far_depth = options.far_depth;
    if (meta.contains("near")) near_depth = meta["near"].get<double>();
    if (meta.contains("far")) far_depth = meta["far"].get<double>();
    if (meta.contains("aabb")) {
        const json& box = meta["aabb"];
        if (!box.is_array() || box.size() != 2) format_error("aabb must be [[min], [max]]");
        data.bounding_box = BoundingBox::from_extent(read_vec3(box[0], "aabb min"), read_vec3(box[1], "aabb max"));
    }

    const double fov = meta["camera_angle_x"].get<double>();
    const float bg = options.white_background ? 1.0f : 0.0f;
    for (const json& frame : meta["frames"]) {
        if (!frame.contains("file_path") || !frame["file_path"].is_string()) format_error("frame without file_path");
        if (!frame.contains("transform_matrix")) format_error("frame without transform_matrix");
        std::filesystem::path file = dir / frame["file_path"].get<std::string>();
        if (!file.has_extension()) file += ".png";

        View view;
        view.image = read_png(file, {bg, bg, bg});
        Camera cam;
        cam.camera_to_world = read_pose(frame["transform_matrix"]);
        cam.fov_x = fov;
        cam.width = view.image.width;
        cam.height = view.image.height;
        cam.near_depth = near_depth;
        cam.far_depth = far_depth;
        try {
            cam.validate(1e-3);
        } catch (const std::invalid_argument& e) {
            format_error(file.string() + ": " + e.what());
        }
        if (!data.views.empty() &&
            (view.image.width != data.width() || view.image.height != data.height()))
            format_error("inconsistent image sizes in " + meta_path.string());
        view.camera = cam;
        data.views.push_back(std::move(view));
    }
    return data;
}

SceneDataset load_image_dataset(const std::filesystem::path& png) {
    SceneDataset data;
    data.mode = FieldMode::Image2D;
    data.views.push_back(View{read_png(png), std::nullopt});
    return data;
}

std::pair<SceneDataset, SceneDataset> load_image_pair(const std::filesystem::path& cover,
                                                      const std::filesystem::path& hidden) {
    return {load_image_dataset(cover), load_image_dataset(hidden)};
}

}  // namespace stegofield
