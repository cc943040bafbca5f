// Writes the procedural cover and hidden 3D fixtures: make_synthetic_scene <out dir>
#include <iostream>

#include "synthetic_scene.hpp"

int main(int argc, char** argv) {
    if (argc != 2) {
        std::cerr << "usage: make_synthetic_scene <out dir>\n";
        return 1;
    }
    const std::filesystem::path out = argv[1];
    stegofield::testing::write_blender_scene(stegofield::testing::cover_scene(), out / "cover");
    stegofield::testing::write_blender_scene(stegofield::testing::hidden_scene(), out / "hidden");
    return 0;
}
