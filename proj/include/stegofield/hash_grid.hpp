#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "stegofield/key_schedule.hpp"
#include "stegofield/random.hpp"

namespace stegofield {

/// Geometry of the multi-resolution feature tables.
struct HashGridConfig {
    int levels = 16;
    int log2_table_size = 19;
    int features = 2;
    int min_resolution = 16;
    int max_resolution = 512;
    int dims = 3;

    std::uint32_t table_size() const noexcept { return std::uint32_t{1} << log2_table_size; }
    int encoded_width() const noexcept { return levels * features; }
    std::size_t parameter_count() const noexcept {
        return static_cast<std::size_t>(levels) * table_size() * static_cast<std::size_t>(features);
    }
    /// Per-level resolution growth; 1 for a single level.
    double growth_factor() const;
    void validate() const;

    friend bool operator==(const HashGridConfig&, const HashGridConfig&) = default;
};

/// floor(N_min * z^level), with the last level pinned to N_max.
int level_resolution(int level, const HashGridConfig& config);

/// (XOR_i vertex[i] * key[i]) mod table_size, in wrapping 64-bit arithmetic.
inline std::uint32_t hash_index(std::span<const std::uint32_t> vertex, const PrimeKey& key,
                                std::uint32_t table_size) noexcept {
    std::uint64_t h = 0;
    for (std::size_t i = 0; i < vertex.size(); ++i) h ^= static_cast<std::uint64_t>(vertex[i]) * key.primes[i];
    return static_cast<std::uint32_t>(h & (table_size - 1));
}

/// Up to 2^d table slots touched at one level, with their d-linear weights.
template <class Real>
struct LevelCorners {
    std::array<std::uint32_t, 8> slot{};
    std::array<Real, 8> weight{};
    int count = 0;
};

/// Throws std::out_of_range unless every coordinate is in [0, 1].
template <class Real>
void check_unit_point(std::span<const Real> x) {
    for (Real c : x) {
        if (!(c >= Real(0) && c <= Real(1))) throw std::out_of_range("point outside the unit cube");
    }
}

/// Corner vertices of the cell containing x at one level. Bit i of the corner
/// index selects the upper vertex along axis i. x is assumed to be in [0,1]^d.
template <class Real, class Hasher>
LevelCorners<Real> level_corners_with(std::span<const Real> x, int resolution, Hasher&& hasher) {
    const int dims = static_cast<int>(x.size());
    std::array<std::uint32_t, 3> base{};
    std::array<Real, 3> frac{};
    for (int i = 0; i < dims; ++i) {
        const Real scaled = x[static_cast<std::size_t>(i)] * static_cast<Real>(resolution);
        auto cell = static_cast<std::int64_t>(std::floor(scaled));
        if (cell >= resolution) cell = resolution - 1;
        if (cell < 0) cell = 0;
        base[static_cast<std::size_t>(i)] = static_cast<std::uint32_t>(cell);
        frac[static_cast<std::size_t>(i)] = scaled - static_cast<Real>(cell);
    }
    LevelCorners<Real> out;
    out.count = 1 << dims;
    std::array<std::uint32_t, 3> vertex{};
    for (int c = 0; c < out.count; ++c) {
        Real w = 1;
        for (int i = 0; i < dims; ++i) {
            const auto ui = static_cast<std::size_t>(i);
            const bool upper = (c >> i) & 1;
            vertex[ui] = base[ui] + (upper ? 1u : 0u);
            w *= upper ? frac[ui] : Real(1) - frac[ui];
        }
        out.slot[static_cast<std::size_t>(c)] =
            hasher(std::span<const std::uint32_t>(vertex.data(), static_cast<std::size_t>(dims)));
        out.weight[static_cast<std::size_t>(c)] = w;
    }
    return out;
}

template <class Real>
LevelCorners<Real> level_corners(std::span<const Real> x, int resolution, const PrimeKey& key,
                                 std::uint32_t table_size) {
    return level_corners_with<Real>(x, resolution, [&](std::span<const std::uint32_t> v) {
        return hash_index(v, key, table_size);
    });
}

/// The classic unkeyed spatial hash in 32-bit wrapping arithmetic. Kept as an
/// independent route to the default-key result (T divides 2^32).
inline std::uint32_t standard_hash_index(std::span<const std::uint32_t> vertex, std::uint32_t table_size) noexcept {
    constexpr std::uint32_t kPrimes[3] = {1u, 2654435761u, 805459861u};
    std::uint32_t h = 0;
    for (std::size_t i = 0; i < vertex.size(); ++i) h ^= vertex[i] * kPrimes[i];
    return h & (table_size - 1);
}

/// The shared table: levels x T x F values, laid out [level][slot][feature].
template <class Real>
class FeatureTables {
public:
    FeatureTables() = default;
    explicit FeatureTables(const HashGridConfig& config)
        : config_(config), values_(config.parameter_count(), Real(0)) {
        config_.validate();
        resolutions_.reserve(static_cast<std::size_t>(config_.levels));
        for (int l = 0; l < config_.levels; ++l) resolutions_.push_back(level_resolution(l, config_));
    }

    const HashGridConfig& config() const noexcept { return config_; }
    int resolution(int level) const { return resolutions_[static_cast<std::size_t>(level)]; }

    std::span<Real> values() noexcept { return values_; }
    std::span<const Real> values() const noexcept { return values_; }

    Real* entry(int level, std::uint32_t slot) noexcept {
        return values_.data() + (static_cast<std::size_t>(level) * config_.table_size() + slot) *
                                    static_cast<std::size_t>(config_.features);
    }
    const Real* entry(int level, std::uint32_t slot) const noexcept {
        return values_.data() + (static_cast<std::size_t>(level) * config_.table_size() + slot) *
                                    static_cast<std::size_t>(config_.features);
    }

    void fill(Real v) { std::fill(values_.begin(), values_.end(), v); }

    /// Uniform in [-scale, scale].
    void randomize(std::uint64_t seed, double scale = 1e-4) {
        Rng rng(seed);
        for (Real& v : values_) v = static_cast<Real>((2.0 * uniform01(rng) - 1.0) * scale);
    }

    friend bool operator==(const FeatureTables&, const FeatureTables&) = default;

private:
    HashGridConfig config_;
    std::vector<Real> values_;
    std::vector<int> resolutions_;
};

inline void check_encode_inputs(const HashGridConfig& cfg, const KeySet& keys) {
    if (keys.size() < 1) throw std::invalid_argument("empty key set");
    if (keys.dims() != cfg.dims) throw std::invalid_argument("key dimensionality mismatch");
    if (keys.size() > cfg.levels) throw std::invalid_argument("more keys than levels");
}

/// Concatenated per-level interpolated features of x; out has L*F entries.
template <class Real>
void encode(std::span<const Real> x, const KeySet& keys, const FeatureTables<Real>& tables, std::span<Real> out) {
    const HashGridConfig& cfg = tables.config();
    check_encode_inputs(cfg, keys);
    if (static_cast<int>(x.size()) != cfg.dims) throw std::invalid_argument("point dimensionality mismatch");
    if (static_cast<int>(out.size()) != cfg.encoded_width()) throw std::invalid_argument("encoding width mismatch");
    check_unit_point(x);

    const int features = cfg.features;
    const int m = keys.size();
    for (int l = 0; l < cfg.levels; ++l) {
        const PrimeKey& key = keys.keys[static_cast<std::size_t>(l % m)];
        const auto corners = level_corners<Real>(x, tables.resolution(l), key, cfg.table_size());
        Real* dst = out.data() + static_cast<std::size_t>(l) * static_cast<std::size_t>(features);
        for (int f = 0; f < features; ++f) dst[f] = 0;
        for (int c = 0; c < corners.count; ++c) {
            const Real* src = tables.entry(l, corners.slot[static_cast<std::size_t>(c)]);
            const Real w = corners.weight[static_cast<std::size_t>(c)];
            for (int f = 0; f < features; ++f) dst[f] += w * src[f];
        }
    }
}

/// Encoding of an unmodified (non-stego) hash grid, built on standard_hash_index.
template <class Real>
void encode_standard(std::span<const Real> x, const FeatureTables<Real>& tables, std::span<Real> out) {
    const HashGridConfig& cfg = tables.config();
    if (static_cast<int>(x.size()) != cfg.dims) throw std::invalid_argument("point dimensionality mismatch");
    if (static_cast<int>(out.size()) != cfg.encoded_width()) throw std::invalid_argument("encoding width mismatch");
    check_unit_point(x);
    const std::uint32_t table_size = cfg.table_size();
    for (int l = 0; l < cfg.levels; ++l) {
        const auto corners = level_corners_with<Real>(x, tables.resolution(l), [&](std::span<const std::uint32_t> v) {
            return standard_hash_index(v, table_size);
        });
        Real* dst = out.data() + static_cast<std::size_t>(l) * static_cast<std::size_t>(cfg.features);
        for (int f = 0; f < cfg.features; ++f) dst[f] = 0;
        for (int c = 0; c < corners.count; ++c) {
            const Real* src = tables.entry(l, corners.slot[static_cast<std::size_t>(c)]);
            for (int f = 0; f < cfg.features; ++f) dst[f] += corners.weight[static_cast<std::size_t>(c)] * src[f];
        }
    }
}

/// Adds weight * grad_out into every table slot encode(x) reads.
template <class Real>
void encode_backward(std::span<const Real> x, const KeySet& keys, std::span<const Real> grad_out,
                     FeatureTables<Real>& grad) {
    const HashGridConfig& cfg = grad.config();
    check_encode_inputs(cfg, keys);
    if (static_cast<int>(grad_out.size()) != cfg.encoded_width()) throw std::invalid_argument("gradient width mismatch");
    check_unit_point(x);
    const int features = cfg.features;
    const int m = keys.size();
    for (int l = 0; l < cfg.levels; ++l) {
        const Real* g = grad_out.data() + static_cast<std::size_t>(l) * static_cast<std::size_t>(features);
        bool any = false;
        for (int f = 0; f < features; ++f) any = any || g[f] != Real(0);
        if (!any) continue;
        const PrimeKey& key = keys.keys[static_cast<std::size_t>(l % m)];
        const auto corners = level_corners<Real>(x, grad.resolution(l), key, cfg.table_size());
        for (int c = 0; c < corners.count; ++c) {
            Real* dst = grad.entry(l, corners.slot[static_cast<std::size_t>(c)]);
            const Real w = corners.weight[static_cast<std::size_t>(c)];
            for (int f = 0; f < features; ++f) dst[f] += w * g[f];
        }
    }
}

/// Encodes `count` points stored point-major (count x d) into count x L*F.
/// The serial version is the reference the OpenMP kernel is tested against.
template <class Real>
void encode_batch_serial(std::span<const Real> points, const KeySet& keys, const FeatureTables<Real>& tables,
                         std::span<Real> out);
template <class Real>
void encode_batch(std::span<const Real> points, const KeySet& keys, const FeatureTables<Real>& tables,
                  std::span<Real> out);

extern template void encode_batch_serial<float>(std::span<const float>, const KeySet&, const FeatureTables<float>&,
                                                std::span<float>);
extern template void encode_batch_serial<double>(std::span<const double>, const KeySet&,
                                                 const FeatureTables<double>&, std::span<double>);
extern template void encode_batch<float>(std::span<const float>, const KeySet&, const FeatureTables<float>&,
                                         std::span<float>);
extern template void encode_batch<double>(std::span<const double>, const KeySet&, const FeatureTables<double>&,
                                          std::span<double>);

}  // namespace stegofield
