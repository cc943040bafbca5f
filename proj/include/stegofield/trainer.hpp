#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "stegofield/field.hpp"
#include "stegofield/key_schedule.hpp"
#include "stegofield/optim.hpp"
#include "stegofield/random.hpp"
#include "stegofield/scene_io.hpp"

namespace stegofield {

/// One scene of the training roster and the key set that must decode it.
struct SceneEntry {
    std::string name;
    SceneDataset train;
    std::optional<SceneDataset> eval;  // held-out views; falls back to train
    KeySet keys;
};

struct TrainConfig {
    FieldMode mode = FieldMode::Image2D;
    HashGridConfig grid;
    int hidden_width = 64;
    int hidden_layers = 2;

    std::int64_t max_iterations = 20000;
    float learning_rate = 1e-2f;
    float sparsity_weight = 1e-6f;
    /// Pixels (2D) or rays (3D) per step; 0 picks 4096 / 1024.
    int batch_size = 0;
    int samples_per_ray = 64;
    /// Use every pixel of the chosen view instead of a random batch.
    bool full_image = false;
    std::uint64_t seed = 0;

    /// 0 disables periodic evaluation.
    int eval_every = 500;
    int eval_views = 4;

    int effective_batch() const { return batch_size > 0 ? batch_size : (mode == FieldMode::Image2D ? 4096 : 1024); }
    void validate() const;
};

struct LogRecord {
    std::int64_t iteration = 0;
    std::string scene;
    double loss = 0.0;  // mean training loss of this scene since the previous record
    std::optional<double> psnr;
    double seconds = 0.0;
};

struct TrainReport {
    std::vector<double> step_losses;
    std::vector<int> step_scenes;
    std::vector<LogRecord> records;
    std::vector<double> final_psnr;  // per roster entry, on held-out views
};

/// JSON-lines form of one record: {"iter":..,"scene":..,"loss":..,"psnr":..}.
std::string to_json_line(const LogRecord& record);

/// Owns the optimizer state and RNG for training one field on a roster.
/// Gradients are reduced over fixed-size chunks in a fixed order, so results
/// are identical for any worker count.
class Trainer {
public:
    Trainer(StegoField& field, std::vector<SceneEntry> roster, TrainConfig config);
    ~Trainer();
    Trainer(Trainer&&) noexcept;
    Trainer& operator=(Trainer&&) = delete;

    /// One iteration: random scene, its key set, a random view and pixel
    /// batch, MSE plus weighted sparsity loss, one Adam step. Returns the loss.
    double step();

    int last_scene() const noexcept { return last_scene_; }
    std::int64_t iteration() const noexcept { return iteration_; }
    const std::vector<SceneEntry>& roster() const noexcept { return roster_; }

    /// Mean PSNR of one roster scene over up to eval_views held-out views.
    double evaluate(int scene_index) const;

    TrainReport run(const std::function<void(const LogRecord&)>& on_record = {});

private:
    struct Chunk;

    double step_2d(const SceneEntry& scene, const View& view);
    double step_3d(const SceneEntry& scene, const View& view);
    void apply_gradients(double& loss);

    StegoField& field_;
    std::vector<SceneEntry> roster_;
    TrainConfig config_;
    AdamConfig adam_;
    Rng rng_;
    std::int64_t iteration_ = 0;
    int last_scene_ = -1;

    FeatureTables<float> table_grads_;
    MlpParams<float> mlp_grads_;
    AdamState<float> table_state_;
    AdamState<float> mlp_state_;
    std::vector<Chunk> chunks_;
};

/// Builds a field from config.seed and trains it for config.max_iterations.
std::pair<StegoField, TrainReport> train(std::vector<SceneEntry> roster, const TrainConfig& config,
                                         const std::function<void(const LogRecord&)>& on_record = {});

/// Fresh field for a roster's mode and bounding box, initialized from the seed.
StegoField make_field(const TrainConfig& config, const SceneDataset& reference);

/// First round(provision * m) slots hold the secret keys, the rest the
/// default key. provision * m must be integral.
KeySet make_mixed_keyset(const KeySet& secret, double provision);

}  // namespace stegofield
