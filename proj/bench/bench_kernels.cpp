// Serial reference vs OpenMP kernels. Thread count follows STEGOFIELD_THREADS.
#include <benchmark/benchmark.h>

#include <vector>

#include "stegofield/hash_grid.hpp"
#include "stegofield/key_schedule.hpp"
#include "stegofield/parallel.hpp"
#include "stegofield/random.hpp"
#include "stegofield/renderer.hpp"

using namespace stegofield;

namespace {

HashGridConfig encode_grid() {
    HashGridConfig grid;
    grid.log2_table_size = 16;
    return grid;
}

struct EncodeFixture {
    HashGridConfig grid = encode_grid();
    FeatureTables<float> tables;
    KeySet keys;
    std::vector<float> points, out;

    explicit EncodeFixture(int count) : tables(grid) {
        tables.randomize(1, 1e-2);
        keys = generate_key_set(1, 3, grid.levels, 7);
        Rng rng(3);
        points.resize(static_cast<std::size_t>(count) * 3);
        for (float& p : points) p = static_cast<float>(uniform01(rng));
        out.resize(static_cast<std::size_t>(count) * grid.encoded_width());
    }
};

template <bool Parallel>
void BM_EncodeBatch(benchmark::State& state) {
    EncodeFixture fx(static_cast<int>(state.range(0)));
    for (auto _ : state) {
        if constexpr (Parallel)
            encode_batch<float>(fx.points, fx.keys, fx.tables, fx.out);
        else
            encode_batch_serial<float>(fx.points, fx.keys, fx.tables, fx.out);
        benchmark::DoNotOptimize(fx.out.data());
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

StegoField make_field(FieldMode mode) {
    HashGridConfig grid;
    grid.dims = field_dims(mode);
    grid.log2_table_size = 15;
    grid.max_resolution = 256;
    StegoField field(grid, mode);
    field.initialize(5);
    return field;
}

Camera bench_camera(int size) {
    Camera cam;
    cam.width = size;
    cam.height = size;
    cam.camera_to_world[11] = 4.0;  // back along +z, looking at the origin
    return cam;
}

template <bool Parallel>
void BM_Render3D(benchmark::State& state) {
    const StegoField field = make_field(FieldMode::Radiance3D);
    const KeySet keys = generate_key_set(1, 3, field.grid().levels, 11);
    const Camera cam = bench_camera(static_cast<int>(state.range(0)));
    RenderOptions opts;
    opts.samples_per_ray = 32;
    for (auto _ : state) {
        Image img = Parallel ? render_image(field, cam, keys, opts) : render_image_serial(field, cam, keys, opts);
        benchmark::DoNotOptimize(img.pixels.data());
    }
    state.SetItemsProcessed(state.iterations() * state.range(0) * state.range(0));
}

template <bool Parallel>
void BM_Render2D(benchmark::State& state) {
    const StegoField field = make_field(FieldMode::Image2D);
    const KeySet keys = generate_key_set(1, 2, field.grid().levels, 11);
    const int size = static_cast<int>(state.range(0));
    for (auto _ : state) {
        Image img = Parallel ? render_image_2d(field, keys, size, size) : render_image_2d_serial(field, keys, size, size);
        benchmark::DoNotOptimize(img.pixels.data());
    }
    state.SetItemsProcessed(state.iterations() * size * size);
}

}  // namespace

BENCHMARK(BM_EncodeBatch<false>)->Name("encode_batch/serial")->Arg(1 << 14);
BENCHMARK(BM_EncodeBatch<true>)->Name("encode_batch/omp")->Arg(1 << 14);
BENCHMARK(BM_Render3D<false>)->Name("render_image/serial")->Arg(32)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Render3D<true>)->Name("render_image/omp")->Arg(32)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Render2D<false>)->Name("render_image_2d/serial")->Arg(128)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Render2D<true>)->Name("render_image_2d/omp")->Arg(128)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
