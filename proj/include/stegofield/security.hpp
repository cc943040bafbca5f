#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "stegofield/field.hpp"
#include "stegofield/key_schedule.hpp"
#include "stegofield/scene_io.hpp"

namespace stegofield {

/// Prime-counting values bounding the secret prime pool.
inline constexpr std::uint64_t kPrimesBelow1e10 = 455'052'511ULL;
inline constexpr std::uint64_t kPrimesBelow1e7 = 664'579ULL;
inline constexpr double kSecondsPerYear = 3.15e7;

/// Primes available in [1e7, 1e10]: 454,387,932.
std::uint64_t available_primes() noexcept;

/// Offset logarithmic integral Li(x) = li(x) - li(2).
double offset_log_integral(double x);

/// Li(1e10) - Li(1e7), a transcription check on available_primes().
double available_primes_estimate();

struct KeySpaceReport {
    std::uint64_t available_primes = 0;
    int dims = 3;
    int keys = 1;
    int prime_count = 3;   // d * m
    double bits = 0.0;     // log2 of the key space
    double log10_size = 0.0;
    std::optional<std::string> exact_size;  // decimal, when the space fits in 256 bits
    double log10_brute_force_years = 0.0;
    double fps = 20.0;
};

/// Key space U^(d*m), in the log domain.
KeySpaceReport key_space(std::uint64_t available, int dims, int keys, double fps = 20.0);

/// Years to search half of a key space of size q at `fps` renders per second.
double brute_force_years(double q, double fps);
double log10_brute_force_years(double log10_q, double fps);

struct FillRateReport {
    std::vector<std::uint64_t> active_cells;
    std::uint64_t table_size = 0;
    std::vector<double> fill_rates;
    double combined_fill_rate = 0.0;
    /// Under independent uniform hashing of all cells into one table.
    double expected_occupied_slots = 0.0;
    double expected_collisions = 0.0;
    std::optional<std::uint64_t> measured_collisions;
};

/// rho = kappa / T per scene and combined, plus the expected number of cells
/// landing on an already claimed slot: kappa_total - T (1 - (1 - 1/T)^kappa_total).
FillRateReport fill_rate(std::span<const std::uint64_t> active_cells, std::uint64_t table_size);

/// Occupied grid vertices of one scene and the key that hashes them.
struct OccupiedCells {
    std::vector<std::array<std::uint32_t, 3>> vertices;
    PrimeKey key;
};

/// Cells that land on an already claimed slot when every scene's cells are
/// hashed into one table of `table_size` slots with the real keyed hash.
std::uint64_t count_collisions(std::span<const OccupiedCells> scenes, std::uint32_t table_size);

struct CollisionEstimate {
    double mean = 0.0;
    double standard_error = 0.0;
};

/// Monte-Carlo collision count for `kappa` distinct random cells of a 512^3
/// grid hashed with a fresh random key per trial.
CollisionEstimate estimate_collisions(std::uint64_t kappa, std::uint32_t table_size, int trials, std::uint64_t seed);

/// Grid cells of a 3D field whose density, probed at the cell center, gives
/// tau * delta >= threshold with delta the world-space cell edge.
std::vector<std::array<std::uint32_t, 3>> active_cells(const StegoField& field, const KeySet& keys, int resolution,
                                                       double threshold = 0.01);

struct AttackRow {
    double provision = 0.0;
    double psnr_cover = 0.0;
    double psnr_hidden = 0.0;
};

struct AttackReport {
    int key_count = 0;
    std::vector<AttackRow> rows;
};

/// Renders with the secret key set partially replaced by the default key
/// (see make_mixed_keyset) and scores each render against both scenes.
AttackReport partial_key_attack(const StegoField& field, const KeySet& secret, const SceneDataset& cover,
                                const SceneDataset& hidden, std::span<const double> provisions, int max_views = 4,
                                int samples_per_ray = 64);

std::string to_json(const KeySpaceReport& report);
std::string to_json(const FillRateReport& report);
std::string to_json(const AttackReport& report);

}  // namespace stegofield
