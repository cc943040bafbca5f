#include <doctest.h>

#include <stdexcept>

#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>

#include <json.hpp>

#include "stegofield/checkpoint.hpp"
#include "stegofield/error.hpp"
#include "stegofield/png_io.hpp"
#include "stegofield/scene_io.hpp"
#include "synthetic_scene.hpp"
#include "temp_dir.hpp"

using namespace stegofield;
namespace fs = std::filesystem;

namespace {

const fs::path kFixtures = STEGOFIELD_FIXTURES;

DataError::Kind data_error_kind(auto&& fn) {
    try {
        fn();
    } catch (const DataError& e) {
        return e.kind();
    }
    FAIL("expected a DataError");
    return DataError::Kind::Io;
}

void write_transforms(const fs::path& dir, const nlohmann::json& j) { std::ofstream(dir / "transforms_train.json") << j.dump(); }

nlohmann::json identity_frame(const std::string& file) {
    return {{"file_path", file}, {"transform_matrix", {{1, 0, 0, 0}, {0, 1, 0, 0}, {0, 0, 1, 4}, {0, 0, 0, 1}}}};
}

StegoField sample_field(std::uint64_t seed) {
    HashGridConfig g;
    g.levels = 4;
    g.log2_table_size = 10;
    g.min_resolution = 4;
    g.max_resolution = 32;
    StegoField f(g, FieldMode::Radiance3D, 16, 2);
    f.initialize(seed);
    f.tables().randomize(seed, 1.0);
    f.white_background = true;
    f.bounding_box = BoundingBox::from_extent({-1, -2, -3}, {1, 2, 3});
    return f;
}

}  // namespace

TEST_CASE("png decoding") {
    const Image gray = read_png(kFixtures / "gray.png");
    REQUIRE(gray.width == 4);
    REQUIRE(gray.height == 3);
    for (int k = 0; k < 3; ++k) {
        CHECK(gray.at(0, 1)[k] == doctest::Approx(64.0 / 255));
        CHECK(gray.at(2, 2)[k] == 1.0f);
    }
    const Image over_white = read_png(kFixtures / "gray_alpha.png", {1, 1, 1});
    CHECK(over_white.at(0, 1)[0] == 1.0f);   // fully transparent
    CHECK(over_white.at(0, 0)[0] == 0.0f);   // opaque black
    CHECK(over_white.at(0, 2)[1] == doctest::Approx(128.0 / 255 * 128.0 / 255 + (1 - 128.0 / 255)).epsilon(1e-3));

    TempDir tmp;
    std::ofstream(tmp / "bad.png") << "not a png at all";
    CHECK(data_error_kind([&] { read_png(tmp / "bad.png"); }) == DataError::Kind::Format);
    CHECK(data_error_kind([&] { read_png(tmp / "missing.png"); }) == DataError::Kind::Io);

    Image img(5, 4);
    for (std::size_t i = 0; i < img.pixels.size(); ++i) img.pixels[i] = static_cast<float>(i % 256) / 255.0f;
    write_png(img, tmp / "rt.png");
    CHECK(read_png(tmp / "rt.png") == img);
}

TEST_CASE("image pair loading") {
    const auto [cover, hidden] = load_image_pair(kFixtures / "cover.png", kFixtures / "hidden.png");
    CHECK(cover.mode == FieldMode::Image2D);
    CHECK(cover.sample_count() == 16384);
    CHECK(hidden.sample_count() == 16384);
    CHECK_FALSE(cover.views.front().camera.has_value());
    TempDir tmp;
    std::ofstream(tmp / "bad.png") << "garbage";
    CHECK_THROWS_AS(load_image_pair(kFixtures / "cover.png", tmp / "bad.png"), DataError);
}

TEST_CASE("blender dataset loading") {
    TempDir tmp;
    testing::SceneLayout layout;
    layout.width = 16;
    layout.height = 16;
    layout.train_views = 3;
    layout.test_views = 2;
    testing::write_blender_scene(testing::cover_scene(), tmp.path(), layout);
    const SceneDataset train = load_blender_dataset(tmp.path(), "train");
    REQUIRE(train.views.size() == 3);
    CHECK(train.mode == FieldMode::Radiance3D);
    CHECK(train.split == "train");
    CHECK(train.views[0].camera->fov_x == doctest::Approx(layout.camera_angle_x));
    CHECK(train.views[1].camera->camera_to_world == testing::orbit_pose(2.0 * 3.141592653589793 / 3, 0.6, 4.0));
    CHECK(train.white_background);
    // corner pixels miss the scene and are transparent: white background
    for (int k = 0; k < 3; ++k) CHECK(train.views[0].image.at(0, 0)[k] == 1.0f);
    BlenderLoadOptions black;
    black.white_background = false;
    CHECK(load_blender_dataset(tmp.path(), "test", black).views[0].image.at(0, 0)[0] == 0.0f);
    CHECK(data_error_kind([&] { load_blender_dataset(tmp.path(), "val"); }) == DataError::Kind::Io);
}

TEST_CASE("blender dataset errors and extras") {
    TempDir tmp;
    write_png(Image(8, 8, 0.5f), tmp / "a.png");
    write_png(Image(8, 6, 0.5f), tmp / "b.png");

    nlohmann::json j{{"camera_angle_x", 0.7}, {"frames", {identity_frame("./a")}}};
    write_transforms(tmp.path(), j);
    CHECK(load_blender_dataset(tmp.path(), "train").views.size() == 1);

    auto three_by_four = j;
    three_by_four["frames"][0]["transform_matrix"] = {{1, 0, 0, 0}, {0, 1, 0, 0}, {0, 0, 1, 4}};
    write_transforms(tmp.path(), three_by_four);
    CHECK(data_error_kind([&] { load_blender_dataset(tmp.path(), "train"); }) == DataError::Kind::Format);

    auto mixed = j;
    mixed["frames"].push_back(identity_frame("./b"));
    write_transforms(tmp.path(), mixed);
    CHECK(data_error_kind([&] { load_blender_dataset(tmp.path(), "train"); }) == DataError::Kind::Format);

    auto skewed = j;
    skewed["frames"][0]["transform_matrix"] = {{1, 0.5, 0, 0}, {0, 1, 0, 0}, {0, 0, 1, 4}, {0, 0, 0, 1}};
    write_transforms(tmp.path(), skewed);
    CHECK(data_error_kind([&] { load_blender_dataset(tmp.path(), "train"); }) == DataError::Kind::Format);

    auto no_fov = j;
    no_fov.erase("camera_angle_x");
    write_transforms(tmp.path(), no_fov);
    CHECK(data_error_kind([&] { load_blender_dataset(tmp.path(), "train"); }) == DataError::Kind::Format);

    std::ofstream(tmp / "transforms_train.json") << "{ not json";
    CHECK(data_error_kind([&] { load_blender_dataset(tmp.path(), "train"); }) == DataError::Kind::Format);

    auto extras = j;
    extras["near"] = 1.0;
    extras["far"] = 3.0;
    extras["aabb"] = {{-1, -1, -1}, {1, 1, 1}};
    write_transforms(tmp.path(), extras);
    const SceneDataset d = load_blender_dataset(tmp.path(), "train");
    CHECK(d.views[0].camera->near_depth == 1.0);
    CHECK(d.views[0].camera->far_depth == 3.0);
    CHECK(d.bounding_box.scale[0] == doctest::Approx(0.5));
    CHECK(d.bounding_box.offset[0] == doctest::Approx(0.5));
}

TEST_CASE("checkpoint round trip and layout") {
    TempDir tmp;
    const StegoField f = sample_field(3);
    save_checkpoint(f, tmp / "a.ckpt");
    const StegoField g = load_checkpoint(tmp / "a.ckpt");
    CHECK(g == f);
    save_checkpoint(g, tmp / "b.ckpt");
    const auto a = serialize_checkpoint(f), b = serialize_checkpoint(g);
    CHECK(a == b);
    CHECK(fs::file_size(tmp / "a.ckpt") == fs::file_size(tmp / "b.ckpt"));

    const std::size_t mlp = f.mlp().spec().parameter_count();
    CHECK(a.size() == kCheckpointHeaderBytes + 4 * f.grid().parameter_count() + 4 * mlp);
    CHECK(checkpoint_size(f.grid(), f.mode(), 16, 2) == a.size());
    CHECK(std::memcmp(a.data(), "SNGP", 4) == 0);

    const StegoField other = sample_field(99);
    const auto c = serialize_checkpoint(other);
    CHECK(c.size() == a.size());
    CHECK(std::equal(a.begin(), a.begin() + kCheckpointHeaderBytes, c.begin()));
    CHECK(a != c);
}

TEST_CASE("checkpoint errors") {
    const auto bytes = serialize_checkpoint(sample_field(1));
    auto kind = [](std::vector<std::uint8_t> b) { return data_error_kind([&] { deserialize_checkpoint(b); }); };

    CHECK(kind({bytes.begin(), bytes.begin() + 100}) == DataError::Kind::Truncated);
    CHECK(kind({bytes.begin(), bytes.begin() + 20}) == DataError::Kind::Truncated);
    CHECK(kind({bytes.begin(), bytes.end() - 1}) == DataError::Kind::Truncated);
    auto magic = bytes;
    magic[0] = 'X';
    CHECK(kind(magic) == DataError::Kind::BadMagic);
    auto version = bytes;
    version[4] = 2;
    CHECK(kind(version) == DataError::Kind::VersionMismatch);
    auto trailing = bytes;
    trailing.push_back(0);
    CHECK(kind(trailing) == DataError::Kind::Format);
    auto nan = bytes;
    const float q = std::numeric_limits<float>::quiet_NaN();
    std::memcpy(nan.data() + kCheckpointHeaderBytes + 8, &q, 4);
    CHECK(kind(nan) == DataError::Kind::NonFinite);

    StegoField bad = sample_field(2);
    bad.mlp().values()[3] = std::numeric_limits<float>::infinity();
    TempDir tmp;
    CHECK_THROWS_AS(save_checkpoint(bad, tmp / "x.ckpt"), NumericalError);
    CHECK(data_error_kind([&] { load_checkpoint(tmp / "missing.ckpt"); }) == DataError::Kind::Io);
}
