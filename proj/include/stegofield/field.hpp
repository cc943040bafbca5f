#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "stegofield/hash_grid.hpp"
#include "stegofield/key_schedule.hpp"
#include "stegofield/mlp.hpp"

namespace stegofield {

enum class FieldMode : std::uint8_t { Image2D = 0, Radiance3D = 1 };

inline int field_dims(FieldMode mode) noexcept { return mode == FieldMode::Image2D ? 2 : 3; }
inline int field_output_width(FieldMode mode) noexcept { return mode == FieldMode::Image2D ? 3 : 4; }

/// Number of direction-encoding components (real SH up to degree 3).
inline constexpr int kDirectionEncodingWidth = 16;
/// Raw density is clamped here before exponentiation.
inline constexpr double kMaxLogDensity = 10.0;

/// Real spherical-harmonics basis of a unit direction, bands 0..3.
/// Throws std::invalid_argument when |dir| deviates from 1 by more than 1e-4.
template <class Real>
std::array<Real, kDirectionEncodingWidth> encode_direction(const std::array<Real, 3>& dir);

/// world -> unit cube: unit = world * scale + offset, per axis.
struct BoundingBox {
    std::array<float, 3> scale{1.0f / 3.0f, 1.0f / 3.0f, 1.0f / 3.0f};
    std::array<float, 3> offset{0.5f, 0.5f, 0.5f};

    /// Box covering [lo, hi] on every axis.
    static BoundingBox from_extent(const std::array<double, 3>& lo, const std::array<double, 3>& hi);

    friend bool operator==(const BoundingBox&, const BoundingBox&) = default;
};

/// One parameter set that decodes a different scene for each key set:
/// feature tables shared across keys plus one MLP.
template <class Real>
class BasicStegoField {
public:
    BasicStegoField() = default;
    BasicStegoField(const HashGridConfig& grid, FieldMode mode, int hidden_width = 64, int hidden_layers = 2);

    static MlpSpec mlp_spec_for(const HashGridConfig& grid, FieldMode mode, int hidden_width, int hidden_layers);

    const HashGridConfig& grid() const noexcept { return tables_.config(); }
    FieldMode mode() const noexcept { return mode_; }
    int hidden_width() const noexcept { return hidden_width_; }
    int hidden_layers() const noexcept { return hidden_layers_; }
    int dims() const noexcept { return field_dims(mode_); }
    int output_width() const noexcept { return field_output_width(mode_); }

    FeatureTables<Real>& tables() noexcept { return tables_; }
    const FeatureTables<Real>& tables() const noexcept { return tables_; }
    MlpParams<Real>& mlp() noexcept { return mlp_; }
    const MlpParams<Real>& mlp() const noexcept { return mlp_; }

    BoundingBox bounding_box;
    bool white_background = false;

    /// Tables uniform in [-1e-4, 1e-4], MLP Glorot-uniform, both from `seed`.
    void initialize(std::uint64_t seed);

    friend bool operator==(const BasicStegoField&, const BasicStegoField&) = default;

private:
    FieldMode mode_ = FieldMode::Image2D;
    int hidden_width_ = 64;
    int hidden_layers_ = 2;
    FeatureTables<Real> tables_;
    MlpParams<Real> mlp_;
};

using StegoField = BasicStegoField<float>;

template <class Real>
struct RadianceSample {
    std::array<Real, 3> color{};
    Real density = 0;
};

/// Scratch and activations for one chunk of points.
template <class Real>
struct FieldWorkspace {
    int count = 0;
    std::vector<Real> inputs;       // count x MLP input width
    std::vector<Real> raw;          // count x output width, before activation
    std::vector<Real> grad_raw;
    std::vector<Real> grad_inputs;  // count x MLP input width
    MlpTape<Real> tape;
};

/// Which hash drives the encoding: the keyed hash with a key set, or the
/// classic unkeyed hash of a standard (baseline) hash-grid model.
enum class HashRoute { Keyed, Standard };

/// Evaluates `count` points (count x d, unit cube). dirs is count x 3 in 3D
/// mode and empty in 2D mode. out receives activated outputs: RGB in 2D,
/// RGB + density in 3D.
template <class Real>
void field_forward(const BasicStegoField<Real>& field, std::span<const Real> points, std::span<const Real> dirs,
                   const KeySet& keys, FieldWorkspace<Real>& ws, std::span<Real> out,
                   HashRoute route = HashRoute::Keyed);

/// Backpropagates dL/d(activated output) through the output activations and
/// the MLP. MLP gradients accumulate into mlp_grads; the encoding gradient is
/// left in ws.grad_inputs for scatter_table_gradients.
template <class Real>
void field_backward(const BasicStegoField<Real>& field, FieldWorkspace<Real>& ws, std::span<const Real> grad_out,
                    MlpParams<Real>& mlp_grads);

/// Adds the encoding gradient of every point in ws into table_grads, in point order.
template <class Real>
void scatter_table_gradients(const BasicStegoField<Real>& field, std::span<const Real> points, const KeySet& keys,
                             const FieldWorkspace<Real>& ws, FeatureTables<Real>& table_grads);

template <class Real>
std::array<Real, 3> field_query_2d(const BasicStegoField<Real>& field, const std::array<Real, 2>& x,
                                   const KeySet& keys);

template <class Real>
RadianceSample<Real> field_query_3d(const BasicStegoField<Real>& field, const std::array<Real, 3>& x,
                                    const std::array<Real, 3>& dir, const KeySet& keys);

/// Same queries through the standard unkeyed hash: the field seen as a plain
/// hash-grid model.
template <class Real>
std::array<Real, 3> baseline_query_2d(const BasicStegoField<Real>& field, const std::array<Real, 2>& x);

template <class Real>
RadianceSample<Real> baseline_query_3d(const BasicStegoField<Real>& field, const std::array<Real, 3>& x,
                                       const std::array<Real, 3>& dir);

extern template class BasicStegoField<float>;
extern template class BasicStegoField<double>;

}  // namespace stegofield
