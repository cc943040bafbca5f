#include "stegofield/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "stegofield/random.hpp"

namespace stegofield {

MlpSpec MlpSpec::standard(int input, int hidden_width, int hidden_layers, int output) {
    MlpSpec spec;
    spec.widths.push_back(input);
    for (int i = 0; i < hidden_layers; ++i) spec.widths.push_back(hidden_width);
    spec.widths.push_back(output);
    spec.validate();
    return spec;
}

std::size_t MlpSpec::parameter_count() const noexcept {
    std::size_t n = 0;
    for (std::size_t i = 0; i + 1 < widths.size(); ++i)
        n += static_cast<std::size_t>(widths[i]) * static_cast<std::size_t>(widths[i + 1]) +
             static_cast<std::size_t>(widths[i + 1]);
    return n;
}

void MlpSpec::validate() const {
    if (widths.size() < 2) throw std::invalid_argument("an MLP needs at least input and output widths");
    for (int w : widths) {
        if (w < 1) throw std::invalid_argument("MLP widths must be >= 1");
    }
}

template <class Real>
MlpParams<Real>::MlpParams(MlpSpec spec) : spec_(std::move(spec)) {
    spec_.validate();
    std::size_t offset = 0;
    for (int l = 0; l < spec_.layer_count(); ++l) {
        offsets_.push_back(offset);
        const auto in = static_cast<std::size_t>(spec_.widths[static_cast<std::size_t>(l)]);
        const auto out = static_cast<std::size_t>(spec_.widths[static_cast<std::size_t>(l) + 1]);
        offset += in * out + out;
    }
    values_.assign(offset, Real(0));
}

template <class Real>
std::span<Real> MlpParams<Real>::weights(int layer) noexcept {
    const auto l = static_cast<std::size_t>(layer);
    return {values_.data() + offsets_[l], static_cast<std::size_t>(spec_.widths[l]) * spec_.widths[l + 1]};
}

template <class Real>
std::span<const Real> MlpParams<Real>::weights(int layer) const noexcept {
    const auto l = static_cast<std::size_t>(layer);
    return {values_.data() + offsets_[l], static_cast<std::size_t>(spec_.widths[l]) * spec_.widths[l + 1]};
}

template <class Real>
std::span<Real> MlpParams<Real>::bias(int layer) noexcept {
    const auto l = static_cast<std::size_t>(layer);
    const std::size_t n = static_cast<std::size_t>(spec_.widths[l]) * spec_.widths[l + 1];
    return {values_.data() + offsets_[l] + n, static_cast<std::size_t>(spec_.widths[l + 1])};
}

template <class Real>
std::span<const Real> MlpParams<Real>::bias(int layer) const noexcept {
    const auto l = static_cast<std::size_t>(layer);
    const std::size_t n = static_cast<std::size_t>(spec_.widths[l]) * spec_.widths[l + 1];
    return {values_.data() + offsets_[l] + n, static_cast<std::size_t>(spec_.widths[l + 1])};
}

template <class Real>
void MlpParams<Real>::zero() {
    std::fill(values_.begin(), values_.end(), Real(0));
}

template <class Real>
void MlpParams<Real>::initialize(std::uint64_t seed) {
    Rng rng(seed);
    zero();
    for (int l = 0; l < spec_.layer_count(); ++l) {
        const auto in = spec_.widths[static_cast<std::size_t>(l)];
        const auto out = spec_.widths[static_cast<std::size_t>(l) + 1];
        const double limit = std::sqrt(6.0 / static_cast<double>(in + out));
        for (Real& w : weights(l)) w = static_cast<Real>((2.0 * uniform01(rng) - 1.0) * limit);
    }
}

template class MlpParams<float>;
template class MlpParams<double>;

namespace {

template <class Real>
void transpose(const Real* src, std::size_t rows, std::size_t cols, Real* dst) {
    for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t c = 0; c < cols; ++c) dst[c * rows + r] = src[r * cols + c];
}

}  // namespace

template <class Real>
void mlp_forward_batch(const MlpParams<Real>& params, std::span<const Real> input, int batch, MlpTape<Real>& tape,
                       std::span<Real> output) {
    const MlpSpec& spec = params.spec();
    const auto b = static_cast<std::size_t>(batch);
    if (batch < 1) throw std::invalid_argument("batch must be >= 1");
    if (input.size() != b * static_cast<std::size_t>(spec.input_width()))
        throw std::invalid_argument("MLP input size mismatch");
    if (output.size() != b * static_cast<std::size_t>(spec.output_width()))
        throw std::invalid_argument("MLP output size mismatch");

    const int layers = spec.layer_count();
    tape.batch = batch;
    tape.activations.resize(static_cast<std::size_t>(layers) + 1);
    tape.activations[0].resize(input.size());
    transpose(input.data(), b, static_cast<std::size_t>(spec.input_width()), tape.activations[0].data());

    for (int l = 0; l < layers; ++l) {
        const auto in = static_cast<std::size_t>(spec.widths[static_cast<std::size_t>(l)]);
        const auto out = static_cast<std::size_t>(spec.widths[static_cast<std::size_t>(l) + 1]);
        const Real* a = tape.activations[static_cast<std::size_t>(l)].data();
        auto& z_store = tape.activations[static_cast<std::size_t>(l) + 1];
        z_store.resize(out * b);
        Real* z = z_store.data();
        const auto w = params.weights(l);
        const auto bias = params.bias(l);
        for (std::size_t j = 0; j < out; ++j) {
            Real* zj = z + j * b;
            std::fill(zj, zj + b, bias[j]);
            const Real* wj = w.data() + j * in;
            for (std::size_t k = 0; k < in; ++k) {
                const Real wk = wj[k];
                const Real* ak = a + k * b;
                for (std::size_t s = 0; s < b; ++s) zj[s] += wk * ak[s];
            }
        }
        if (l + 1 < layers) {
            for (std::size_t i = 0; i < out * b; ++i) z[i] = z[i] > Real(0) ? z[i] : Real(0);
        }
    }
    transpose(tape.activations.back().data(), static_cast<std::size_t>(spec.output_width()), b, output.data());
}

template <class Real>
void mlp_backward_batch(const MlpParams<Real>& params, MlpTape<Real>& tape, std::span<const Real> grad_output,
                        MlpParams<Real>& grads, std::span<Real> grad_input) {
    const MlpSpec& spec = params.spec();
    if (grads.spec() != spec) throw std::invalid_argument("gradient buffer shape mismatch");
    const auto b = static_cast<std::size_t>(tape.batch);
    const int layers = spec.layer_count();
    if (tape.activations.size() != static_cast<std::size_t>(layers) + 1)
        throw std::invalid_argument("tape does not match this network");
    if (grad_output.size() != b * static_cast<std::size_t>(spec.output_width()))
        throw std::invalid_argument("MLP gradient size mismatch");
    if (!grad_input.empty() && grad_input.size() != b * static_cast<std::size_t>(spec.input_width()))
        throw std::invalid_argument("MLP input-gradient size mismatch");

    // g holds dL/dz of the current layer, feature-major
    auto& g = tape.grad_a;
    auto& g_prev = tape.grad_b;
    g.resize(grad_output.size());
    transpose(grad_output.data(), b, static_cast<std::size_t>(spec.output_width()), g.data());

    for (int l = layers - 1; l >= 0; --l) {
        const auto in = static_cast<std::size_t>(spec.widths[static_cast<std::size_t>(l)]);
        const auto out = static_cast<std::size_t>(spec.widths[static_cast<std::size_t>(l) + 1]);
        const std::vector<Real>& a = tape.activations[static_cast<std::size_t>(l)];
        if (l + 1 < layers) {
            const std::vector<Real>& act = tape.activations[static_cast<std::size_t>(l) + 1];
            for (std::size_t i = 0; i < out * b; ++i)
                if (!(act[i] > Real(0))) g[i] = Real(0);
        }

        auto dw = grads.weights(l);
        auto db = grads.bias(l);
        for (std::size_t j = 0; j < out; ++j) {
            const Real* gj = g.data() + j * b;
            Real sum = 0;
            for (std::size_t s = 0; s < b; ++s) sum += gj[s];
            db[j] += sum;
        }
        tape.transposed_in.resize(in * b);
        tape.transposed_grad.resize(out * b);
        transpose(a.data(), in, b, tape.transposed_in.data());
        transpose(g.data(), out, b, tape.transposed_grad.data());
        for (std::size_t s = 0; s < b; ++s) {
            const Real* as = tape.transposed_in.data() + s * in;
            const Real* gs = tape.transposed_grad.data() + s * out;
            for (std::size_t j = 0; j < out; ++j) {
                const Real gj = gs[j];
                if (gj == Real(0)) continue;
                Real* row = dw.data() + j * in;
                for (std::size_t k = 0; k < in; ++k) row[k] += gj * as[k];
            }
        }

        if (l == 0 && grad_input.empty()) break;
        g_prev.assign(in * b, Real(0));
        const auto w = params.weights(l);
        for (std::size_t j = 0; j < out; ++j) {
            const Real* gj = g.data() + j * b;
            const Real* wj = w.data() + j * in;
            for (std::size_t k = 0; k < in; ++k) {
                const Real wk = wj[k];
                Real* gk = g_prev.data() + k * b;
                for (std::size_t s = 0; s < b; ++s) gk[s] += wk * gj[s];
            }
        }
        if (l == 0) {
            transpose(g_prev.data(), in, b, grad_input.data());
        } else {
            std::swap(g, g_prev);
        }
    }
}

template <class Real>
MlpForwardResult<Real> mlp_forward(const MlpParams<Real>& params, std::span<const Real> input) {
    MlpForwardResult<Real> result;
    result.output.resize(static_cast<std::size_t>(params.spec().output_width()));
    mlp_forward_batch<Real>(params, input, 1, result.tape, result.output);
    return result;
}

template <class Real>
MlpBackwardResult<Real> mlp_backward(const MlpParams<Real>& params, MlpTape<Real> tape,
                                     std::span<const Real> grad_output) {
    MlpBackwardResult<Real> result{MlpParams<Real>(params.spec()), {}};
    result.grad_input.resize(static_cast<std::size_t>(tape.batch) * params.spec().input_width());
    mlp_backward_batch<Real>(params, tape, grad_output, result.grads, result.grad_input);
    return result;
}

#define STEGOFIELD_INSTANTIATE_MLP(Real)                                                                          \
    template void mlp_forward_batch<Real>(const MlpParams<Real>&, std::span<const Real>, int, MlpTape<Real>&,    \
                                          std::span<Real>);                                                      \
    template void mlp_backward_batch<Real>(const MlpParams<Real>&, MlpTape<Real>&, std::span<const Real>,        \
                                           MlpParams<Real>&, std::span<Real>);                                   \
    template MlpForwardResult<Real> mlp_forward<Real>(const MlpParams<Real>&, std::span<const Real>);            \
    template MlpBackwardResult<Real> mlp_backward<Real>(const MlpParams<Real>&, MlpTape<Real>, std::span<const Real>);

STEGOFIELD_INSTANTIATE_MLP(float)
STEGOFIELD_INSTANTIATE_MLP(double)

}  // namespace stegofield
