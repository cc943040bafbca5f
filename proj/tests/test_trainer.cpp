#include <doctest.h>

#include <stdexcept>

#include <algorithm>
#include <cmath>
#include <limits>

#include "stegofield/checkpoint.hpp"
#include "stegofield/error.hpp"
#include "stegofield/parallel.hpp"
#include "stegofield/trainer.hpp"
#include "synthetic_scene.hpp"
#include "temp_dir.hpp"

using namespace stegofield;

namespace {

const std::filesystem::path kFixtures = STEGOFIELD_FIXTURES;

TrainConfig tiny_2d(std::int64_t iterations) {
    TrainConfig cfg;
    cfg.mode = FieldMode::Image2D;
    cfg.grid.levels = 8;
    cfg.grid.log2_table_size = 12;
    cfg.grid.min_resolution = 8;
    cfg.grid.max_resolution = 128;
    cfg.grid.dims = 2;
    cfg.hidden_width = 32;
    cfg.max_iterations = iterations;
    cfg.batch_size = 256;
    cfg.eval_every = 0;
    cfg.seed = 5;
    return cfg;
}

std::vector<SceneEntry> image_roster(bool with_hidden, int levels = 8) {
    std::vector<SceneEntry> roster;
    roster.push_back({"cover", load_image_dataset(kFixtures / "cover.png"), std::nullopt, default_key_set(2, levels)});
    if (with_hidden)
        roster.push_back({"hidden", load_image_dataset(kFixtures / "hidden.png"), std::nullopt,
                          generate_key_set(1, 2, levels, 17)});
    return roster;
}

double median(std::vector<double> v) {
    std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2), v.end());
    return v[v.size() / 2];
}

}  // namespace

TEST_CASE("mixed key sets") {
    const KeySet secret = generate_key_set(4, 3, 16, 1);
    const PrimeKey pi = default_key(3);
    CHECK(make_mixed_keyset(secret, 0.0).keys == std::vector<PrimeKey>(4, pi));
    CHECK(make_mixed_keyset(secret, 1.0) == secret);
    const KeySet half = make_mixed_keyset(secret, 0.5);
    CHECK(half.keys == std::vector<PrimeKey>{secret.keys[0], secret.keys[1], pi, pi});
    CHECK(half.levels == 16);
    CHECK(make_mixed_keyset(secret, 0.75).keys[2] == secret.keys[2]);
    CHECK_THROWS_AS(make_mixed_keyset(secret, 0.3), std::invalid_argument);
    CHECK_THROWS_AS(make_mixed_keyset(secret, 1.5), std::invalid_argument);
}

TEST_CASE("roster validation") {
    const TrainConfig cfg = tiny_2d(1);
    auto roster = image_roster(true);
    StegoField field = make_field(cfg, roster[0].train);
    SUBCASE("shared primes between scenes") {
        roster.push_back({"again", roster[1].train, std::nullopt, roster[1].keys});
        CHECK_THROWS_AS(Trainer(field, roster, cfg), std::invalid_argument);
    }
    SUBCASE("invalid secret") {
        roster[1].keys.keys[0].primes[0] = 12345678;  // even
        CHECK_THROWS_AS(Trainer(field, roster, cfg), DataError);
    }
    SUBCASE("level mismatch") {
        roster[1].keys.levels = 16;
        CHECK_THROWS(Trainer(field, roster, cfg));
    }
    SUBCASE("empty roster") { CHECK_THROWS_AS(Trainer(field, {}, cfg), std::invalid_argument); }
    SUBCASE("bad config") {
        TrainConfig bad = cfg;
        bad.max_iterations = 0;
        CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
        bad = cfg;
        bad.sparsity_weight = -1;
        CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    }
}

TEST_CASE("uniform scene choice") {
    TrainConfig cfg = tiny_2d(10000);
    cfg.batch_size = 4;
    cfg.grid.levels = 2;
    cfg.grid.log2_table_size = 8;
    cfg.grid.max_resolution = 16;
    cfg.hidden_width = 4;
    cfg.hidden_layers = 1;
    auto roster = image_roster(true, 2);
    StegoField field = make_field(cfg, roster[0].train);
    Trainer trainer(field, roster, cfg);
    int hidden = 0;
    for (int i = 0; i < 10000; ++i) {
        trainer.step();
        hidden += trainer.last_scene();
    }
    CHECK(std::abs(hidden / 10000.0 - 0.5) <= 0.02);
}

TEST_CASE("training reduces the loss") {
    const TrainConfig cfg = tiny_2d(1000);
    auto [field, report] = train(image_roster(true), cfg);
    REQUIRE(report.step_losses.size() == 1000);
    const std::vector<double> early(report.step_losses.begin(), report.step_losses.begin() + 100);
    const std::vector<double> late(report.step_losses.begin() + 900, report.step_losses.end());
    CHECK(median(late) < median(early));
    REQUIRE(report.final_psnr.size() == 2);
    CHECK(report.final_psnr[0] > 20.0);
    CHECK(report.final_psnr[1] > 20.0);
    for (double l : report.step_losses) CHECK(std::isfinite(l));
}

TEST_CASE("a perfect prediction is a no-op") {
    TrainConfig cfg = tiny_2d(1);
    cfg.sparsity_weight = 0.0f;
    SceneDataset gray;
    gray.views.push_back({Image(16, 16, 0.5f), std::nullopt});
    std::vector<SceneEntry> roster{{"gray", gray, std::nullopt, default_key_set(2, cfg.grid.levels)}};
    StegoField field(cfg.grid, FieldMode::Image2D, cfg.hidden_width, cfg.hidden_layers);  // all zero: outputs 0.5
    const StegoField before = field;
    Trainer trainer(field, roster, cfg);
    CHECK(trainer.step() == 0.0);
    CHECK(field == before);
}

TEST_CASE("baseline training and zero overhead") {
    const TrainConfig cfg = tiny_2d(50);
    auto [base, r1] = train(image_roster(false), cfg);
    auto [stego, r2] = train(image_roster(true), cfg);
    for (int s : r1.step_scenes) CHECK(s == 0);
    const auto a = serialize_checkpoint(base), b = serialize_checkpoint(stego);
    CHECK(a.size() == b.size());
    CHECK(std::equal(a.begin(), a.begin() + kCheckpointHeaderBytes, b.begin()));
}

TEST_CASE("results do not depend on the worker count") {
    const TrainConfig cfg = tiny_2d(40);
    parallel::set_worker_count(1);
    auto [serial, r1] = train(image_roster(true), cfg);
    parallel::set_worker_count(3);
    auto [threaded, r2] = train(image_roster(true), cfg);
    parallel::set_worker_count(1);
    CHECK(serialize_checkpoint(serial) == serialize_checkpoint(threaded));
    CHECK(r1.step_losses == r2.step_losses);
    auto [again, r3] = train(image_roster(true), cfg);
    CHECK(serialize_checkpoint(serial) == serialize_checkpoint(again));
}

TEST_CASE("3D training steps") {
    TempDir tmp;
    testing::SceneLayout layout;
    layout.width = 16;
    layout.height = 16;
    layout.train_views = 4;
    layout.test_views = 1;
    testing::write_blender_scene(testing::cover_scene(), tmp / "cover", layout);
    testing::write_blender_scene(testing::hidden_scene(), tmp / "hidden", layout);
    TrainConfig cfg;
    cfg.mode = FieldMode::Radiance3D;
    cfg.grid.levels = 6;
    cfg.grid.log2_table_size = 12;
    cfg.grid.min_resolution = 8;
    cfg.grid.max_resolution = 64;
    cfg.hidden_width = 16;
    cfg.max_iterations = 20;
    cfg.batch_size = 32;
    cfg.samples_per_ray = 16;
    cfg.eval_every = 10;
    cfg.eval_views = 1;
    auto roster = [&] {
        return std::vector<SceneEntry>{
            {"cover", load_blender_dataset(tmp / "cover", "train"), load_blender_dataset(tmp / "cover", "test"),
             default_key_set(3, 6)},
            {"hidden", load_blender_dataset(tmp / "hidden", "train"), std::nullopt, generate_key_set(2, 3, 6, 4)}};
    };
    std::vector<LogRecord> records;
    parallel::set_worker_count(1);
    auto [a, ra] = train(roster(), cfg, [&](const LogRecord& r) { records.push_back(r); });
    parallel::set_worker_count(2);
    auto [b, rb] = train(roster(), cfg);
    parallel::set_worker_count(1);
    CHECK(serialize_checkpoint(a) == serialize_checkpoint(b));
    CHECK(a.white_background);
    CHECK(records.size() == 4);  // two evaluations x two scenes
    for (const auto& r : records) {
        CHECK(r.psnr.has_value());
        CHECK(to_json_line(r).find("\"iter\":") != std::string::npos);
    }
}

TEST_CASE("non-finite loss is reported") {
    TrainConfig cfg = tiny_2d(1);
    SceneDataset bad;
    bad.views.push_back({Image(16, 16, std::numeric_limits<float>::quiet_NaN()), std::nullopt});
    std::vector<SceneEntry> roster{{"bad", bad, std::nullopt, default_key_set(2, cfg.grid.levels)}};
    StegoField field = make_field(cfg, bad);
    Trainer trainer(field, roster, cfg);
    CHECK_THROWS_AS(trainer.step(), NumericalError);
}
