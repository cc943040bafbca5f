// stegofield: train, render and analyze key-controlled neural fields.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "stegofield/checkpoint.hpp"
#include "stegofield/error.hpp"
#include "stegofield/key_schedule.hpp"
#include "stegofield/metrics.hpp"
#include "stegofield/png_io.hpp"
#include "stegofield/renderer.hpp"
#include "stegofield/scene_io.hpp"
#include "stegofield/security.hpp"
#include "stegofield/trainer.hpp"

namespace fs = std::filesystem;
using namespace stegofield;

namespace {

enum Exit { kOk = 0, kUsage = 1, kData = 2, kNumeric = 3 };

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

FieldMode parse_mode(const std::string& s) {
    if (s == "2d") return FieldMode::Image2D;
    if (s == "3d") return FieldMode::Radiance3D;
    throw UsageError("--mode must be 2d or 3d");
}

// "default" is the standard key Pi; anything else is a key file.
KeySet resolve_keys(const std::string& spec, int dims, int levels) {
    if (spec == "default") return default_key_set(dims, levels);
    return load_key_file(spec);
}

SceneDataset load_scene(FieldMode mode, const std::string& path, const std::string& split, bool white) {
    if (mode == FieldMode::Image2D) return load_image_dataset(path);
    BlenderLoadOptions opt;
    opt.white_background = white;
    return load_blender_dataset(path, split, opt);
}

std::optional<SceneDataset> load_eval(FieldMode mode, const std::string& path, const std::string& split, bool white) {
    if (mode == FieldMode::Image2D || split.empty()) return std::nullopt;
    if (!fs::exists(fs::path(path) / ("transforms_" + split + ".json"))) return std::nullopt;
    return load_scene(mode, path, split, white);
}

void write_text(const std::string& text, const std::string& out) {
    if (out.empty() || out == "-") {
        std::cout << text << "\n";
        return;
    }
    std::ofstream f(out);
    if (!f) throw DataError(DataError::Kind::Io, "cannot write " + out);
    f << text << "\n";
}

std::vector<double> parse_list(const std::string& csv) {
    std::vector<double> out;
    std::stringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ',')) {
        std::size_t used = 0;
        double v = 0;
        try {
            v = std::stod(item, &used);
        } catch (const std::exception&) {
            throw UsageError("bad number in list: " + item);
        }
        if (used != item.size()) throw UsageError("bad number in list: " + item);
        out.push_back(v);
    }
    if (out.empty()) throw UsageError("empty list");
    return out;
}

// ---- keygen

struct KeygenArgs {
    int d = 3;
    int m = 1;
    int levels = 16;
    std::optional<std::uint64_t> seed;
    std::string out;
};

void run_keygen(const KeygenArgs& a) {
    const std::uint64_t seed = a.seed ? *a.seed : (std::uint64_t{std::random_device{}()} << 32 | std::random_device{}());
    const KeySet keys = generate_key_set(a.m, a.d, a.levels, seed);
    if (a.out.empty())
        std::cout << format_key_file(keys);
    else
        save_key_file(keys, a.out);
}

// ---- train

struct TrainArgs {
    std::string mode = "2d";
    std::string cover;
    std::vector<std::string> hidden;
    std::vector<std::string> keys;
    std::int64_t iters = 20000;
    float eta = 1e-2f;
    float beta = 1e-6f;
    std::uint64_t seed = 0;
    std::string out;
    std::string log;
    int levels = 16;
    int log2_table = 19;
    int features = 2;
    int min_res = 16;
    int max_res = 512;
    int hidden_width = 64;
    int hidden_layers = 2;
    int batch = 0;
    int samples = 64;
    int eval_every = 500;
    std::string split = "train";
    std::string eval_split = "test";
    bool black_background = false;
};

void run_train(const TrainArgs& a) {
    TrainConfig cfg;
    cfg.mode = parse_mode(a.mode);
    cfg.grid.levels = a.levels;
    cfg.grid.log2_table_size = a.log2_table;
    cfg.grid.features = a.features;
    cfg.grid.min_resolution = a.min_res;
    cfg.grid.max_resolution = a.max_res;
    cfg.grid.dims = field_dims(cfg.mode);
    cfg.hidden_width = a.hidden_width;
    cfg.hidden_layers = a.hidden_layers;
    cfg.max_iterations = a.iters;
    cfg.learning_rate = a.eta;
    cfg.sparsity_weight = a.beta;
    cfg.batch_size = a.batch;
    cfg.samples_per_ray = a.samples;
    cfg.seed = a.seed;
    cfg.eval_every = a.eval_every;
    cfg.validate();
    if (a.hidden.size() != a.keys.size()) throw UsageError("need exactly one --keys file per --hidden scene");

    const bool white = !a.black_background;
    std::vector<SceneEntry> roster;
    roster.push_back({"cover", load_scene(cfg.mode, a.cover, a.split, white),
                      load_eval(cfg.mode, a.cover, a.eval_split, white),
                      default_key_set(cfg.grid.dims, cfg.grid.levels)});
    for (std::size_t i = 0; i < a.hidden.size(); ++i) {
        KeySet keys = load_key_file(a.keys[i]);
        if (keys == default_key_set(keys.dims(), keys.levels)) throw UsageError("hidden scenes need a secret key");
        roster.push_back({"hidden" + std::to_string(i + 1), load_scene(cfg.mode, a.hidden[i], a.split, white),
                          load_eval(cfg.mode, a.hidden[i], a.eval_split, white), std::move(keys)});
    }

    std::ofstream log;
    if (!a.log.empty()) {
        log.open(a.log);
        if (!log) throw DataError(DataError::Kind::Io, "cannot write " + a.log);
    }
    auto [field, report] = train(std::move(roster), cfg, [&](const LogRecord& r) {
        const std::string line = to_json_line(r);
        if (log) log << line << "\n" << std::flush;
        std::cerr << line << "\n";
    });
    save_checkpoint(field, a.out);
}

// ---- render / extract

struct RenderArgs {
    std::string ckpt;
    std::string keys = "default";
    std::string data;
    std::string split = "test";
    int camera_index = 0;
    std::string image;
    int width = 0;
    int height = 0;
    int samples = 64;
    std::string out;
};

void run_render(const RenderArgs& a) {
    const StegoField field = load_checkpoint(a.ckpt);
    const KeySet keys = resolve_keys(a.keys, field.dims(), field.grid().levels);
    Image img;
    if (field.mode() == FieldMode::Image2D) {
        int w = a.width, h = a.height;
        if (!a.image.empty()) {
            const Image ref = read_png(a.image);
            w = ref.width;
            h = ref.height;
        }
        if (w <= 0 || h <= 0) throw UsageError("2D render needs --image or --width/--height");
        img = render_image_2d(field, keys, w, h);
    } else {
        if (a.data.empty()) throw UsageError("3D render needs --data <dataset dir>");
        BlenderLoadOptions opt;
        opt.white_background = field.white_background;
        const SceneDataset data = load_blender_dataset(a.data, a.split, opt);
        if (a.camera_index < 0 || static_cast<std::size_t>(a.camera_index) >= data.views.size())
            throw UsageError("--camera-index out of range");
        img = render_image(field, *data.views[static_cast<std::size_t>(a.camera_index)].camera, keys,
                           default_render_options(field, a.samples));
    }
    write_png(img, a.out);
}

// ---- attack

struct AttackArgs {
    std::string ckpt;
    std::string keys;
    std::string data;
    std::string hidden;
    std::string split = "test";
    std::string provisions = "0,0.25,0.5,0.75,1";
    int views = 4;
    int samples = 64;
    std::string out;
};

void run_attack(const AttackArgs& a) {
    const StegoField field = load_checkpoint(a.ckpt);
    const KeySet secret = load_key_file(a.keys);
    const SceneDataset cover = load_scene(field.mode(), a.data, a.split, field.white_background);
    const SceneDataset hidden = load_scene(field.mode(), a.hidden, a.split, field.white_background);
    const auto provisions = parse_list(a.provisions);
    write_text(to_json(partial_key_attack(field, secret, cover, hidden, provisions, a.views, a.samples)), a.out);
}

// ---- analyze

struct KeyspaceArgs {
    int d = 3;
    int m = 1;
    double fps = 20.0;
    std::uint64_t primes = 0;
    std::string out;
};

struct CollisionArgs {
    std::string ckpt;
    std::vector<std::string> keys;
    std::string kappa;
    int table_size = 1 << 19;
    int resolution = 128;
    double threshold = 0.01;
    std::string out;
};

void run_collisions(const CollisionArgs& a) {
    if (a.ckpt.empty() == a.kappa.empty()) throw UsageError("give exactly one of --ckpt and --kappa");
    if (!a.kappa.empty()) {
        std::vector<std::uint64_t> counts;
        for (double v : parse_list(a.kappa)) {
            if (v < 0 || v != std::floor(v)) throw UsageError("--kappa takes non-negative integers");
            counts.push_back(static_cast<std::uint64_t>(v));
        }
        write_text(to_json(fill_rate(counts, static_cast<std::uint64_t>(a.table_size))), a.out);
        return;
    }
    const StegoField field = load_checkpoint(a.ckpt);
    std::vector<KeySet> sets{default_key_set(field.dims(), field.grid().levels)};
    for (const auto& k : a.keys) sets.push_back(load_key_file(k));
    std::vector<OccupiedCells> scenes;
    std::vector<std::uint64_t> counts;
    for (const KeySet& ks : sets) {
        scenes.push_back({active_cells(field, ks, a.resolution, a.threshold), ks.keys.front()});
        counts.push_back(scenes.back().vertices.size());
    }
    const auto table = field.grid().table_size();
    FillRateReport report = fill_rate(counts, table);
    report.measured_collisions = count_collisions(scenes, table);
    write_text(to_json(report), a.out);
}

void add_attack_options(CLI::App* sub, AttackArgs& a) {
    sub->add_option("--ckpt", a.ckpt, "Trained checkpoint")->required();
    sub->add_option("--keys", a.keys, "Secret key file")->required();
    sub->add_option("--data", a.data, "Cover scene (PNG in 2D, dataset dir in 3D)")->required();
    sub->add_option("--hidden", a.hidden, "Hidden scene ground truth")->required();
    sub->add_option("--split", a.split, "Dataset split for 3D views")->capture_default_str();
    sub->add_option("--provisions", a.provisions, "Comma-separated key fractions")->capture_default_str();
    sub->add_option("--views", a.views, "Views scored per scene")->capture_default_str();
    sub->add_option("--samples", a.samples, "Samples per ray")->capture_default_str();
    sub->add_option("--out", a.out, "JSON report path (stdout if absent)");
}

void add_render_options(CLI::App* sub, RenderArgs& a, bool keys_required) {
    sub->add_option("--ckpt", a.ckpt, "Checkpoint")->required();
    auto* keys = sub->add_option("--keys", a.keys, "Key file, or 'default' for the standard key");
    if (keys_required)
        keys->required();
    else
        keys->capture_default_str();
    sub->add_option("--data", a.data, "Dataset directory providing cameras (3D)");
    sub->add_option("--split", a.split, "Dataset split")->capture_default_str();
    sub->add_option("--camera-index", a.camera_index, "Camera to render (3D)")->capture_default_str();
    sub->add_option("--image", a.image, "Reference PNG giving the output size (2D)");
    sub->add_option("--width", a.width, "Output width (2D)");
    sub->add_option("--height", a.height, "Output height (2D)");
    sub->add_option("--samples", a.samples, "Samples per ray")->capture_default_str();
    sub->add_option("--out", a.out, "Output PNG")->required();
}

// Flat key=value files: every key targets the subcommand being run.
class SubcommandConfig : public CLI::ConfigINI {
public:
    explicit SubcommandConfig(const CLI::App* root) : root_(root) {}

    std::vector<CLI::ConfigItem> from_config(std::istream& input) const override {
        std::vector<std::string> path;
        for (const CLI::App* app = root_; !app->get_subcommands().empty();) {
            app = app->get_subcommands().front();
            path.push_back(app->get_name());
        }
        auto items = CLI::ConfigINI::from_config(input);
        for (auto& item : items) {
            if (!item.parents.empty()) throw CLI::ConfigError("config sections are not supported: " + item.fullname());
            item.parents = path;
        }
        return items;
    }

private:
    const CLI::App* root_;
};

int dispatch(int argc, char** argv) {
    CLI::App app{"Key-controlled steganographic neural fields"};
    app.require_subcommand(1);
    app.fallthrough();
    app.set_config("--config", "", "key=value file overlaying the subcommand's flags");
    app.config_formatter(std::make_shared<SubcommandConfig>(&app));
    app.allow_config_extras(CLI::config_extras_mode::error);

    KeygenArgs kg;
    auto* keygen = app.add_subcommand("keygen", "Generate a secret key file");
    keygen->add_option("--d", kg.d, "Coordinate dimensions (2 or 3)")->capture_default_str();
    keygen->add_option("--m", kg.m, "Number of keys")->capture_default_str();
    keygen->add_option("--levels", kg.levels, "Resolution levels")->capture_default_str();
    keygen->add_option("--seed", kg.seed, "RNG seed (random if absent)");
    keygen->add_option("--out", kg.out, "Key file (stdout if absent)");

    TrainArgs tr;
    auto* train_cmd = app.add_subcommand("train", "Train a field on a cover scene and optional hidden scenes");
    train_cmd->add_option("--mode", tr.mode, "2d or 3d")->capture_default_str();
    train_cmd->add_option("--cover", tr.cover, "Cover scene (PNG in 2D, dataset dir in 3D)")->required();
    train_cmd->add_option("--hidden", tr.hidden, "Hidden scenes");
    train_cmd->add_option("--keys", tr.keys, "One key file per hidden scene");
    train_cmd->add_option("--iters", tr.iters, "Iterations")->capture_default_str();
    train_cmd->add_option("--eta", tr.eta, "Adam learning rate")->capture_default_str();
    train_cmd->add_option("--beta", tr.beta, "Sparsity weight")->capture_default_str();
    train_cmd->add_option("--seed", tr.seed, "Seed")->capture_default_str();
    train_cmd->add_option("--out", tr.out, "Checkpoint path")->required();
    train_cmd->add_option("--log", tr.log, "JSON-lines training log");
    train_cmd->add_option("--levels", tr.levels, "Resolution levels L")->capture_default_str();
    train_cmd->add_option("--log2-table-size", tr.log2_table, "log2 of table size T")->capture_default_str();
    train_cmd->add_option("--features", tr.features, "Features per entry F")->capture_default_str();
    train_cmd->add_option("--min-res", tr.min_res, "Coarsest resolution")->capture_default_str();
    train_cmd->add_option("--max-res", tr.max_res, "Finest resolution")->capture_default_str();
    train_cmd->add_option("--hidden-width", tr.hidden_width, "MLP width")->capture_default_str();
    train_cmd->add_option("--hidden-layers", tr.hidden_layers, "MLP hidden layers")->capture_default_str();
    train_cmd->add_option("--batch", tr.batch, "Pixels or rays per step (0 = 4096 / 1024)")->capture_default_str();
    train_cmd->add_option("--samples", tr.samples, "Samples per ray")->capture_default_str();
    train_cmd->add_option("--eval-every", tr.eval_every, "Iterations between PSNR reports")->capture_default_str();
    train_cmd->add_option("--split", tr.split, "Training split (3D)")->capture_default_str();
    train_cmd->add_option("--eval-split", tr.eval_split, "Held-out split (3D)")->capture_default_str();
    train_cmd->add_flag("--black-background", tr.black_background, "Composite 3D images over black");

    RenderArgs rd;
    auto* render = app.add_subcommand("render", "Render a checkpoint with a key set");
    add_render_options(render, rd, false);
    RenderArgs ex;
    auto* extract = app.add_subcommand("extract", "Render with a mandatory key set");
    add_render_options(extract, ex, true);

    AttackArgs at;
    auto* attack = app.add_subcommand("attack", "Partial-key disclosure attack");
    add_attack_options(attack, at);

    auto* analyze = app.add_subcommand("analyze", "Security analysis reports");
    analyze->require_subcommand(1);
    analyze->fallthrough();
    KeyspaceArgs ks;
    auto* keyspace = analyze->add_subcommand("keyspace", "Key-space size and brute-force time");
    keyspace->add_option("--d", ks.d, "Coordinate dimensions")->capture_default_str();
    keyspace->add_option("--m", ks.m, "Number of keys")->capture_default_str();
    keyspace->add_option("--fps", ks.fps, "Renders per second")->capture_default_str();
    keyspace->add_option("--primes", ks.primes, "Available primes (0 = built-in count)");
    keyspace->add_option("--out", ks.out, "JSON report path");
    CollisionArgs co;
    auto* collisions = analyze->add_subcommand("collisions", "Hash-table fill rate and collisions");
    collisions->add_option("--ckpt", co.ckpt, "3D checkpoint to measure");
    collisions->add_option("--keys", co.keys, "Secret key files of the hidden scenes");
    collisions->add_option("--kappa", co.kappa, "Comma-separated active-cell counts");
    collisions->add_option("--table-size", co.table_size, "Table size T for --kappa")->capture_default_str();
    collisions->add_option("--resolution", co.resolution, "Occupancy grid resolution")->capture_default_str();
    collisions->add_option("--threshold", co.threshold, "Minimum sigma * delta")->capture_default_str();
    collisions->add_option("--out", co.out, "JSON report path");
    AttackArgs at2;
    auto* attack2 = analyze->add_subcommand("attack", "Partial-key disclosure attack");
    add_attack_options(attack2, at2);

    std::string a_path, b_path;
    auto* metrics = app.add_subcommand("metrics", "PSNR and SSIM of two PNGs");
    metrics->add_option("--a", a_path, "First image")->required();
    metrics->add_option("--b", b_path, "Second image")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kUsage;
    }

    if (*keygen) run_keygen(kg);
    if (*train_cmd) run_train(tr);
    if (*render) run_render(rd);
    if (*extract) run_render(ex);
    if (*attack) run_attack(at);
    if (*keyspace) {
        const std::uint64_t u = ks.primes ? ks.primes : available_primes();
        write_text(to_json(key_space(u, ks.d, ks.m, ks.fps)), ks.out);
    }
    if (*collisions) run_collisions(co);
    if (*attack2) run_attack(at2);
    if (*metrics) {
        const Image a = read_png(a_path), b = read_png(b_path);
        nlohmann::ordered_json j;
        const double p = psnr(a, b);
        if (std::isfinite(p))
            j["psnr"] = p;
        else
            j["psnr"] = "inf";
        j["ssim"] = ssim(a, b);
        std::cout << j.dump() << "\n";
    }
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return dispatch(argc, argv);
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kUsage;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kUsage;
    } catch (const std::out_of_range& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kUsage;
    } catch (const NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return kNumeric;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return kData;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kData;
    }
}
