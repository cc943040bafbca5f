#include "stegofield/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <set>
#include <stdexcept>

#include <json.hpp>

#include "stegofield/error.hpp"
#include "stegofield/metrics.hpp"
#include "stegofield/parallel.hpp"
#include "stegofield/renderer.hpp"

namespace stegofield {
namespace {

constexpr std::size_t kPixelsPerChunk = 256;
constexpr std::size_t kRaysPerChunk = 8;

bool is_default_key_set(const KeySet& keys) {
    return keys.size() == 1 && keys.keys.front() == default_key(keys.dims());
}

}  // namespace

void TrainConfig::validate() const {
    grid.validate();
    if (grid.dims != field_dims(mode)) throw std::invalid_argument("grid dimensionality does not match the mode");
    if (max_iterations < 1) throw std::invalid_argument("max iterations must be >= 1");
    if (!(learning_rate > 0.0f)) throw std::invalid_argument("learning rate must be > 0");
    if (!(sparsity_weight >= 0.0f)) throw std::invalid_argument("sparsity weight must be >= 0");
    if (batch_size < 0) throw std::invalid_argument("batch size must be >= 0");
    if (samples_per_ray < 1) throw std::invalid_argument("samples per ray must be >= 1");
    if (eval_every < 0 || eval_views < 1) throw std::invalid_argument("bad evaluation cadence");
}

std::string to_json_line(const LogRecord& record) {
    nlohmann::ordered_json j;
    j["iter"] = record.iteration;
    j["scene"] = record.scene;
    j["loss"] = record.loss;
    if (record.psnr) j["psnr"] = std::isfinite(*record.psnr) ? nlohmann::ordered_json(*record.psnr) : "inf";
    j["seconds"] = record.seconds;
    return j.dump();
}

struct Trainer::Chunk {
    FieldWorkspace<float> ws;
    MlpParams<float> mlp_grads;
    std::vector<float> points, dirs, targets, outputs, grad_out;
    std::vector<float> colors, densities, deltas, grad_colors, grad_densities;
    std::vector<std::size_t> ray_first;  // first point of each ray in `points`
    double loss_sum = 0.0;
};

Trainer::~Trainer() = default;
Trainer::Trainer(Trainer&&) noexcept = default;

Trainer::Trainer(StegoField& field, std::vector<SceneEntry> roster, TrainConfig config)
    : field_(field), roster_(std::move(roster)), config_(std::move(config)), rng_(config_.seed) {
    config_.validate();
    if (roster_.empty()) throw std::invalid_argument("training roster is empty");
    if (field_.mode() != config_.mode || field_.grid() != config_.grid)
        throw std::invalid_argument("field does not match the training config");

    std::set<std::uint64_t> primes;
    for (const SceneEntry& entry : roster_) {
        if (entry.train.views.empty()) throw DataError(DataError::Kind::Format, "scene '" + entry.name + "' has no views");
        if (entry.train.mode != config_.mode)
            throw std::invalid_argument("scene '" + entry.name + "' does not match the training mode");
        if (entry.keys.dims() != config_.grid.dims || entry.keys.levels != config_.grid.levels)
            throw std::invalid_argument("key set of scene '" + entry.name + "' does not match the grid");
        if (!is_default_key_set(entry.keys)) validate_secret_key_set(entry.keys);
        for (const PrimeKey& key : entry.keys.keys)
            for (std::uint64_t p : key.primes)
                if (!primes.insert(p).second)
                    throw std::invalid_argument("key sets of the roster must not share primes");
    }

    adam_.learning_rate = config_.learning_rate;
    table_grads_ = FeatureTables<float>(config_.grid);
    mlp_grads_ = MlpParams<float>(field_.mlp().spec());
    table_state_ = AdamState<float>(field_.tables().values().size());
    mlp_state_ = AdamState<float>(field_.mlp().values().size());
}

double Trainer::step() {
    last_scene_ = static_cast<int>(uniform_index(rng_, roster_.size()));
    const SceneEntry& scene = roster_[static_cast<std::size_t>(last_scene_)];
    const View& view = scene.train.views[uniform_index(rng_, scene.train.views.size())];
    return config_.mode == FieldMode::Image2D ? step_2d(scene, view) : step_3d(scene, view);
}

double Trainer::step_2d(const SceneEntry& scene, const View& view) {
    const Image& image = view.image;
    const std::size_t pixels = image.pixel_count();
    const std::size_t batch = config_.full_image ? pixels : static_cast<std::size_t>(config_.effective_batch());
    std::vector<std::size_t> picks(batch);
    for (std::size_t i = 0; i < batch; ++i) picks[i] = config_.full_image ? i : uniform_index(rng_, pixels);

    const std::size_t n_chunks = (batch + kPixelsPerChunk - 1) / kPixelsPerChunk;
    if (chunks_.size() < n_chunks) chunks_.resize(n_chunks);
    const double scale = 2.0 / static_cast<double>(batch * 3);
    const KeySet& keys = scene.keys;

    const int workers = parallel::worker_count();
    const auto chunk_count = static_cast<std::int64_t>(n_chunks);
#pragma omp parallel for num_threads(workers) schedule(static) if (workers > 1)
    for (std::int64_t ci = 0; ci < chunk_count; ++ci) {
        Chunk& chunk = chunks_[static_cast<std::size_t>(ci)];
        const std::size_t begin = static_cast<std::size_t>(ci) * kPixelsPerChunk;
        const std::size_t count = std::min(kPixelsPerChunk, batch - begin);
        chunk.points.resize(count * 2);
        chunk.targets.resize(count * 3);
        for (std::size_t i = 0; i < count; ++i) {
            const std::size_t p = picks[begin + i];
            const int row = static_cast<int>(p / static_cast<std::size_t>(image.width));
            const int col = static_cast<int>(p % static_cast<std::size_t>(image.width));
            const auto x = pixel_center_2d(row, col, image.width, image.height);
            chunk.points[i * 2] = x[0];
            chunk.points[i * 2 + 1] = x[1];
            std::copy_n(image.at(row, col), 3, chunk.targets.data() + i * 3);
        }
        chunk.outputs.resize(count * 3);
        field_forward<float>(field_, chunk.points, {}, keys, chunk.ws, chunk.outputs);
        chunk.grad_out.resize(count * 3);
        double sum = 0.0;
        for (std::size_t i = 0; i < count * 3; ++i) {
            const double diff = static_cast<double>(chunk.outputs[i]) - chunk.targets[i];
            sum += diff * diff;
            chunk.grad_out[i] = static_cast<float>(scale * diff);
        }
        chunk.loss_sum = sum;
        if (chunk.mlp_grads.spec() != field_.mlp().spec()) chunk.mlp_grads = MlpParams<float>(field_.mlp().spec());
        chunk.mlp_grads.zero();
        field_backward<float>(field_, chunk.ws, chunk.grad_out, chunk.mlp_grads);
    }

    double loss = 0.0;
    table_grads_.fill(0.0f);
    mlp_grads_.zero();
    for (std::size_t ci = 0; ci < n_chunks; ++ci) {
        Chunk& chunk = chunks_[ci];
        loss += chunk.loss_sum;
        auto dst = mlp_grads_.values();
        auto src = chunk.mlp_grads.values();
        for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
        scatter_table_gradients<float>(field_, chunk.points, keys, chunk.ws, table_grads_);
    }
    loss /= static_cast<double>(batch * 3);
    apply_gradients(loss);
    return loss;
}

double Trainer::step_3d(const SceneEntry& scene, const View& view) {
    const Image& image = view.image;
    const Camera& camera = *view.camera;
    const std::size_t pixels = image.pixel_count();
    const std::size_t batch = config_.full_image ? pixels : static_cast<std::size_t>(config_.effective_batch());
    const auto n = static_cast<std::size_t>(config_.samples_per_ray);

    std::vector<std::size_t> picks(batch);
    std::vector<float> depths(batch * n), deltas(batch * n);
    for (std::size_t r = 0; r < batch; ++r) {
        picks[r] = config_.full_image ? r : uniform_index(rng_, pixels);
        const RaySamples s = sample_along_ray(camera.near_depth, camera.far_depth, config_.samples_per_ray, &rng_);
        for (std::size_t i = 0; i < n; ++i) {
            depths[r * n + i] = static_cast<float>(s.depths[i]);
            deltas[r * n + i] = static_cast<float>(s.deltas[i]);
        }
    }

    const std::size_t n_chunks = (batch + kRaysPerChunk - 1) / kRaysPerChunk;
    if (chunks_.size() < n_chunks) chunks_.resize(n_chunks);
    const double scale = 2.0 / static_cast<double>(batch * 3);
    const KeySet& keys = scene.keys;
    const float bg_value = field_.white_background ? 1.0f : 0.0f;
    const std::array<float, 3> background{bg_value, bg_value, bg_value};

    const int workers = parallel::worker_count();
    const auto chunk_count = static_cast<std::int64_t>(n_chunks);
#pragma omp parallel for num_threads(workers) schedule(static) if (workers > 1)
    for (std::int64_t ci = 0; ci < chunk_count; ++ci) {
        Chunk& chunk = chunks_[static_cast<std::size_t>(ci)];
        const std::size_t begin = static_cast<std::size_t>(ci) * kRaysPerChunk;
        const std::size_t rays = std::min(kRaysPerChunk, batch - begin);
        chunk.points.clear();
        chunk.dirs.clear();
        chunk.deltas.clear();
        chunk.targets.resize(rays * 3);
        chunk.ray_first.assign(rays + 1, 0);
        for (std::size_t r = 0; r < rays; ++r) {
            const std::size_t p = picks[begin + r];
            const int row = static_cast<int>(p / static_cast<std::size_t>(image.width));
            const int col = static_cast<int>(p % static_cast<std::size_t>(image.width));
            std::copy_n(image.at(row, col), 3, chunk.targets.data() + r * 3);
            const Ray ray = generate_ray(camera, row, col);
            chunk.ray_first[r] = chunk.deltas.size();
            for (std::size_t i = 0; i < n; ++i) {
                const double t = depths[(begin + r) * n + i];
                std::array<double, 3> world{};
                for (std::size_t a = 0; a < 3; ++a) world[a] = ray.origin[a] + t * ray.direction[a];
                std::array<float, 3> unit{};
                if (!to_unit_cube(field_.bounding_box, world, unit)) continue;
                chunk.points.insert(chunk.points.end(), unit.begin(), unit.end());
                for (double d : ray.direction) chunk.dirs.push_back(static_cast<float>(d));
                chunk.deltas.push_back(deltas[(begin + r) * n + i]);
            }
        }
        chunk.ray_first[rays] = chunk.deltas.size();
        const std::size_t count = chunk.deltas.size();

        chunk.outputs.resize(count * 4);
        if (count > 0) field_forward<float>(field_, chunk.points, chunk.dirs, keys, chunk.ws, chunk.outputs);
        chunk.grad_out.assign(count * 4, 0.0f);
        double sum = 0.0;
        for (std::size_t r = 0; r < rays; ++r) {
            const std::size_t first = chunk.ray_first[r];
            const std::size_t m = chunk.ray_first[r + 1] - first;
            std::array<float, 3> pixel = background;
            if (m > 0) {
                chunk.colors.resize(m * 3);
                chunk.densities.resize(m);
                for (std::size_t k = 0; k < m; ++k) {
                    for (std::size_t c = 0; c < 3; ++c) chunk.colors[k * 3 + c] = chunk.outputs[(first + k) * 4 + c];
                    chunk.densities[k] = chunk.outputs[(first + k) * 4 + 3];
                }
                const std::span<const float> ray_deltas(chunk.deltas.data() + first, m);
                const auto result = composite<float>(chunk.colors, chunk.densities, ray_deltas);
                for (std::size_t c = 0; c < 3; ++c) pixel[c] = result.color[c] + result.transmittance * background[c];
                std::array<float, 3> grad_pixel{};
                for (std::size_t c = 0; c < 3; ++c) {
                    const double diff = static_cast<double>(pixel[c]) - chunk.targets[r * 3 + c];
                    sum += diff * diff;
                    grad_pixel[c] = static_cast<float>(scale * diff);
                }
                chunk.grad_colors.resize(m * 3);
                chunk.grad_densities.resize(m);
                composite_backward<float>(chunk.colors, chunk.densities, ray_deltas, background, grad_pixel,
                                          chunk.grad_colors, chunk.grad_densities);
                for (std::size_t k = 0; k < m; ++k) {
                    for (std::size_t c = 0; c < 3; ++c) chunk.grad_out[(first + k) * 4 + c] = chunk.grad_colors[k * 3 + c];
                    chunk.grad_out[(first + k) * 4 + 3] = chunk.grad_densities[k];
                }
            } else {
                for (std::size_t c = 0; c < 3; ++c) {
                    const double diff = static_cast<double>(pixel[c]) - chunk.targets[r * 3 + c];
                    sum += diff * diff;
                }
            }
        }
        chunk.loss_sum = sum;
        if (chunk.mlp_grads.spec() != field_.mlp().spec()) chunk.mlp_grads = MlpParams<float>(field_.mlp().spec());
        chunk.mlp_grads.zero();
        chunk.ws.count = static_cast<int>(count);
        if (count > 0) field_backward<float>(field_, chunk.ws, chunk.grad_out, chunk.mlp_grads);
    }

    double loss = 0.0;
    table_grads_.fill(0.0f);
    mlp_grads_.zero();
    for (std::size_t ci = 0; ci < n_chunks; ++ci) {
        Chunk& chunk = chunks_[ci];
        loss += chunk.loss_sum;
        auto dst = mlp_grads_.values();
        auto src = chunk.mlp_grads.values();
        for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
        if (chunk.ws.count > 0) scatter_table_gradients<float>(field_, chunk.points, keys, chunk.ws, table_grads_);
    }
    loss /= static_cast<double>(batch * 3);
    apply_gradients(loss);
    return loss;
}

void Trainer::apply_gradients(double& loss) {
    loss += sparsity_loss<float>(field_.tables().values(), config_.sparsity_weight, table_grads_.values());
    if (!std::isfinite(loss)) throw NumericalError("non-finite training loss at iteration " + std::to_string(iteration_));
    ++iteration_;
    adam_update<float>(field_.tables().values(), table_grads_.values(), table_state_, adam_, iteration_);
    adam_update<float>(field_.mlp().values(), mlp_grads_.values(), mlp_state_, adam_, iteration_);
}

double Trainer::evaluate(int scene_index) const {
    const SceneEntry& scene = roster_.at(static_cast<std::size_t>(scene_index));
    const SceneDataset& data = scene.eval ? *scene.eval : scene.train;
    const std::size_t views = std::min(data.views.size(), static_cast<std::size_t>(config_.eval_views));
    double total = 0.0;
    for (std::size_t v = 0; v < views; ++v) {
        const View& view = data.views[v];
        Image rendered = config_.mode == FieldMode::Image2D
                             ? render_image_2d(field_, scene.keys, view.image.width, view.image.height)
                             : render_image(field_, *view.camera, scene.keys,
                                            default_render_options(field_, config_.samples_per_ray));
        total += psnr(rendered, view.image);
    }
    return total / static_cast<double>(views);
}

TrainReport Trainer::run(const std::function<void(const LogRecord&)>& on_record) {
    TrainReport report;
    const auto start = std::chrono::steady_clock::now();
    std::vector<double> loss_since(roster_.size(), 0.0);
    std::vector<int> steps_since(roster_.size(), 0);

    auto emit = [&](bool with_psnr) {
        const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        for (std::size_t s = 0; s < roster_.size(); ++s) {
            LogRecord record;
            record.iteration = iteration_;
            record.scene = roster_[s].name;
            record.loss = steps_since[s] > 0 ? loss_since[s] / steps_since[s] : 0.0;
            if (with_psnr) record.psnr = evaluate(static_cast<int>(s));
            record.seconds = seconds;
            if (on_record) on_record(record);
            report.records.push_back(std::move(record));
            loss_since[s] = 0.0;
            steps_since[s] = 0;
        }
    };

    while (iteration_ < config_.max_iterations) {
        const double loss = step();
        report.step_losses.push_back(loss);
        report.step_scenes.push_back(last_scene_);
        loss_since[static_cast<std::size_t>(last_scene_)] += loss;
        ++steps_since[static_cast<std::size_t>(last_scene_)];
        if (config_.eval_every > 0 && iteration_ % config_.eval_every == 0 && iteration_ < config_.max_iterations)
            emit(true);
    }
    emit(true);
    for (const LogRecord& r : report.records)
        if (r.iteration == iteration_) report.final_psnr.push_back(r.psnr.value_or(0.0));
    return report;
}

StegoField make_field(const TrainConfig& config, const SceneDataset& reference) {
    StegoField field(config.grid, config.mode, config.hidden_width, config.hidden_layers);
    field.bounding_box = reference.bounding_box;
    field.white_background = reference.white_background;
    field.initialize(config.seed);
    return field;
}

std::pair<StegoField, TrainReport> train(std::vector<SceneEntry> roster, const TrainConfig& config,
                                         const std::function<void(const LogRecord&)>& on_record) {
    if (roster.empty()) throw std::invalid_argument("training roster is empty");
    StegoField field = make_field(config, roster.front().train);
    Trainer trainer(field, std::move(roster), config);
    TrainReport report = trainer.run(on_record);
    return {std::move(field), std::move(report)};
}

KeySet make_mixed_keyset(const KeySet& secret, double provision) {
    const int m = secret.size();
    if (m < 1) throw std::invalid_argument("secret key set is empty");
    if (!(provision >= 0.0 && provision <= 1.0)) throw std::invalid_argument("provision must be in [0, 1]");
    const double slots = provision * m;
    const double rounded = std::round(slots);
    if (std::abs(slots - rounded) > 1e-9)
        throw std::invalid_argument("provision times key count must be an integer");
    const int secret_slots = static_cast<int>(rounded);
    KeySet mixed{{}, secret.levels};
    for (int j = 0; j < m; ++j)
        mixed.keys.push_back(j < secret_slots ? secret.keys[static_cast<std::size_t>(j)] : default_key(secret.dims()));
    return mixed;
}

}  // namespace stegofield
