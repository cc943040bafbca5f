#include "stegofield/field.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace stegofield {

template <class Real>
std::array<Real, kDirectionEncodingWidth> encode_direction(const std::array<Real, 3>& dir) {
    const Real x = dir[0], y = dir[1], z = dir[2];
    const double norm = std::sqrt(static_cast<double>(x) * x + static_cast<double>(y) * y + static_cast<double>(z) * z);
    if (!(std::abs(norm - 1.0) <= 1e-4)) throw std::invalid_argument("direction is not a unit vector");
    const Real xx = x * x, yy = y * y, zz = z * z;
    const Real xy = x * y, yz = y * z, xz = x * z;
    return {
        Real(0.28209479177387814),
        Real(-0.48860251190291987) * y,
        Real(0.48860251190291987) * z,
        Real(-0.48860251190291987) * x,
        Real(1.0925484305920792) * xy,
        Real(-1.0925484305920792) * yz,
        Real(0.94617469575755997) * zz - Real(0.31539156525251999),
        Real(-1.0925484305920792) * xz,
        Real(0.54627421529603959) * xx - Real(0.54627421529603959) * yy,
        Real(0.59004358992664352) * y * (-Real(3) * xx + yy),
        Real(2.8906114426405538) * xy * z,
        Real(0.45704579946446572) * y * (Real(1) - Real(5) * zz),
        Real(0.3731763325901154) * z * (Real(5) * zz - Real(3)),
        Real(0.45704579946446572) * x * (Real(1) - Real(5) * zz),
        Real(1.4453057213202769) * z * (xx - yy),
        Real(0.59004358992664352) * x * (-xx + Real(3) * yy),
    };
}

BoundingBox BoundingBox::from_extent(const std::array<double, 3>& lo, const std::array<double, 3>& hi) {
    BoundingBox box;
    for (std::size_t i = 0; i < 3; ++i) {
        if (!(hi[i] > lo[i])) throw std::invalid_argument("bounding box must have positive extent");
        box.scale[i] = static_cast<float>(1.0 / (hi[i] - lo[i]));
        box.offset[i] = static_cast<float>(-lo[i] / (hi[i] - lo[i]));
    }
    return box;
}

template <class Real>
MlpSpec BasicStegoField<Real>::mlp_spec_for(const HashGridConfig& grid, FieldMode mode, int hidden_width,
                                            int hidden_layers) {
    const int input = grid.encoded_width() + (mode == FieldMode::Radiance3D ? kDirectionEncodingWidth : 0);
    return MlpSpec::standard(input, hidden_width, hidden_layers, field_output_width(mode));
}

template <class Real>
BasicStegoField<Real>::BasicStegoField(const HashGridConfig& grid, FieldMode mode, int hidden_width,
                                       int hidden_layers)
    : mode_(mode),
      hidden_width_(hidden_width),
      hidden_layers_(hidden_layers),
      tables_(grid),
      mlp_(mlp_spec_for(grid, mode, hidden_width, hidden_layers)) {
    if (grid.dims != field_dims(mode)) throw std::invalid_argument("grid dimensionality does not match field mode");
    if (hidden_layers < 0) throw std::invalid_argument("hidden layer count must be >= 0");
}

template <class Real>
void BasicStegoField<Real>::initialize(std::uint64_t seed) {
    tables_.randomize(seed, 1e-4);
    mlp_.initialize(seed ^ 0x9e3779b97f4a7c15ULL);
}

template class BasicStegoField<float>;
template class BasicStegoField<double>;

namespace {

template <class Real>
Real sigmoid(Real v) {
    return Real(1) / (Real(1) + std::exp(-v));
}

}  // namespace

template <class Real>
void field_forward(const BasicStegoField<Real>& field, std::span<const Real> points, std::span<const Real> dirs,
                   const KeySet& keys, FieldWorkspace<Real>& ws, std::span<Real> out, HashRoute route) {
    const auto dims = static_cast<std::size_t>(field.dims());
    const std::size_t count = points.size() / dims;
    const bool radiance = field.mode() == FieldMode::Radiance3D;
    const auto in_width = static_cast<std::size_t>(field.mlp().spec().input_width());
    const auto enc_width = static_cast<std::size_t>(field.grid().encoded_width());
    const auto out_width = static_cast<std::size_t>(field.output_width());
    if (count == 0 || points.size() != count * dims) throw std::invalid_argument("field_forward: bad point buffer");
    if (radiance && dirs.size() != count * 3) throw std::invalid_argument("field_forward: need one direction per point");
    if (!radiance && !dirs.empty()) throw std::invalid_argument("field_forward: 2D fields take no directions");
    if (out.size() != count * out_width) throw std::invalid_argument("field_forward: bad output buffer");
    if (route == HashRoute::Keyed) check_encode_inputs(field.grid(), keys);

    ws.count = static_cast<int>(count);
    ws.inputs.resize(count * in_width);
    for (std::size_t i = 0; i < count; ++i) {
        const auto x = points.subspan(i * dims, dims);
        std::span<Real> row(ws.inputs.data() + i * in_width, in_width);
        if (route == HashRoute::Keyed)
            encode<Real>(x, keys, field.tables(), row.first(enc_width));
        else
            encode_standard<Real>(x, field.tables(), row.first(enc_width));
        if (radiance) {
            const auto sh = encode_direction<Real>({dirs[i * 3], dirs[i * 3 + 1], dirs[i * 3 + 2]});
            std::copy(sh.begin(), sh.end(), row.begin() + static_cast<std::ptrdiff_t>(enc_width));
        }
    }

    ws.raw.resize(count * out_width);
    mlp_forward_batch<Real>(field.mlp(), ws.inputs, static_cast<int>(count), ws.tape, ws.raw);
    for (std::size_t i = 0; i < count; ++i) {
        const Real* raw = ws.raw.data() + i * out_width;
        Real* dst = out.data() + i * out_width;
        for (int c = 0; c < 3; ++c) dst[c] = sigmoid(raw[c]);
        if (radiance) dst[3] = std::exp(std::min(raw[3], static_cast<Real>(kMaxLogDensity)));
    }
}

template <class Real>
void field_backward(const BasicStegoField<Real>& field, FieldWorkspace<Real>& ws, std::span<const Real> grad_out,
                    MlpParams<Real>& mlp_grads) {
    const auto count = static_cast<std::size_t>(ws.count);
    const auto out_width = static_cast<std::size_t>(field.output_width());
    const bool radiance = field.mode() == FieldMode::Radiance3D;
    if (grad_out.size() != count * out_width) throw std::invalid_argument("field_backward: bad gradient buffer");

    ws.grad_raw.resize(count * out_width);
    for (std::size_t i = 0; i < count; ++i) {
        const Real* raw = ws.raw.data() + i * out_width;
        const Real* g = grad_out.data() + i * out_width;
        Real* gr = ws.grad_raw.data() + i * out_width;
        for (int c = 0; c < 3; ++c) {
            const Real s = sigmoid(raw[c]);
            gr[c] = g[c] * s * (Real(1) - s);
        }
        if (radiance) {
            gr[3] = raw[3] < static_cast<Real>(kMaxLogDensity) ? g[3] * std::exp(raw[3]) : Real(0);
        }
    }
    ws.grad_inputs.resize(ws.inputs.size());
    mlp_backward_batch<Real>(field.mlp(), ws.tape, ws.grad_raw, mlp_grads, ws.grad_inputs);
}

template <class Real>
void scatter_table_gradients(const BasicStegoField<Real>& field, std::span<const Real> points, const KeySet& keys,
                             const FieldWorkspace<Real>& ws, FeatureTables<Real>& table_grads) {
    const auto dims = static_cast<std::size_t>(field.dims());
    const auto in_width = static_cast<std::size_t>(field.mlp().spec().input_width());
    const auto enc_width = static_cast<std::size_t>(field.grid().encoded_width());
    const auto count = static_cast<std::size_t>(ws.count);
    if (points.size() != count * dims) throw std::invalid_argument("scatter_table_gradients: point count mismatch");
    for (std::size_t i = 0; i < count; ++i) {
        encode_backward<Real>(points.subspan(i * dims, dims), keys,
                              std::span<const Real>(ws.grad_inputs.data() + i * in_width, enc_width), table_grads);
    }
}

namespace {

template <class Real>
void require_mode(const BasicStegoField<Real>& field, FieldMode mode) {
    if (field.mode() != mode) throw std::invalid_argument("query does not match the field mode");
}

}  // namespace

template <class Real>
std::array<Real, 3> field_query_2d(const BasicStegoField<Real>& field, const std::array<Real, 2>& x,
                                   const KeySet& keys) {
    require_mode(field, FieldMode::Image2D);
    FieldWorkspace<Real> ws;
    std::array<Real, 3> out{};
    field_forward<Real>(field, x, {}, keys, ws, out);
    return out;
}

template <class Real>
RadianceSample<Real> field_query_3d(const BasicStegoField<Real>& field, const std::array<Real, 3>& x,
                                    const std::array<Real, 3>& dir, const KeySet& keys) {
    require_mode(field, FieldMode::Radiance3D);
    FieldWorkspace<Real> ws;
    std::array<Real, 4> out{};
    field_forward<Real>(field, x, dir, keys, ws, out);
    return {{out[0], out[1], out[2]}, out[3]};
}

template <class Real>
std::array<Real, 3> baseline_query_2d(const BasicStegoField<Real>& field, const std::array<Real, 2>& x) {
    require_mode(field, FieldMode::Image2D);
    FieldWorkspace<Real> ws;
    std::array<Real, 3> out{};
    field_forward<Real>(field, x, {}, KeySet{}, ws, out, HashRoute::Standard);
    return out;
}

template <class Real>
RadianceSample<Real> baseline_query_3d(const BasicStegoField<Real>& field, const std::array<Real, 3>& x,
                                       const std::array<Real, 3>& dir) {
    require_mode(field, FieldMode::Radiance3D);
    FieldWorkspace<Real> ws;
    std::array<Real, 4> out{};
    field_forward<Real>(field, x, dir, KeySet{}, ws, out, HashRoute::Standard);
    return {{out[0], out[1], out[2]}, out[3]};
}

#define STEGOFIELD_INSTANTIATE_FIELD(Real)                                                                        \
    template std::array<Real, kDirectionEncodingWidth> encode_direction<Real>(const std::array<Real, 3>&);       \
    template void field_forward<Real>(const BasicStegoField<Real>&, std::span<const Real>, std::span<const Real>, \
                                      const KeySet&, FieldWorkspace<Real>&, std::span<Real>, HashRoute);         \
    template void field_backward<Real>(const BasicStegoField<Real>&, FieldWorkspace<Real>&,                       \
                                       std::span<const Real>, MlpParams<Real>&);                                  \
    template void scatter_table_gradients<Real>(const BasicStegoField<Real>&, std::span<const Real>,              \
                                                const KeySet&, const FieldWorkspace<Real>&, FeatureTables<Real>&); \
    template std::array<Real, 3> field_query_2d<Real>(const BasicStegoField<Real>&, const std::array<Real, 2>&,   \
                                                      const KeySet&);                                            \
    template RadianceSample<Real> field_query_3d<Real>(const BasicStegoField<Real>&, const std::array<Real, 3>&,  \
                                                       const std::array<Real, 3>&, const KeySet&);               \
    template std::array<Real, 3> baseline_query_2d<Real>(const BasicStegoField<Real>&, const std::array<Real, 2>&); \
    template RadianceSample<Real> baseline_query_3d<Real>(const BasicStegoField<Real>&, const std::array<Real, 3>&, \
                                                          const std::array<Real, 3>&);

STEGOFIELD_INSTANTIATE_FIELD(float)
STEGOFIELD_INSTANTIATE_FIELD(double)

}  // namespace stegofield
