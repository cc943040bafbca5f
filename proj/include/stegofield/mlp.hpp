#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace stegofield {

/// Layer widths from input to output. Hidden layers use ReLU; the last layer
/// is affine and its output activation belongs to the caller.
struct MlpSpec {
    std::vector<int> widths;

    static MlpSpec standard(int input, int hidden_width, int hidden_layers, int output);

    int layer_count() const noexcept { return static_cast<int>(widths.size()) - 1; }
    int input_width() const noexcept { return widths.front(); }
    int output_width() const noexcept { return widths.back(); }
    std::size_t parameter_count() const noexcept;
    void validate() const;

    friend bool operator==(const MlpSpec&, const MlpSpec&) = default;
};

/// Flat parameter block; per layer a row-major (out x in) matrix then the bias.
template <class Real>
class MlpParams {
public:
    MlpParams() = default;
    explicit MlpParams(MlpSpec spec);

    const MlpSpec& spec() const noexcept { return spec_; }

    std::span<Real> weights(int layer) noexcept;
    std::span<const Real> weights(int layer) const noexcept;
    std::span<Real> bias(int layer) noexcept;
    std::span<const Real> bias(int layer) const noexcept;

    std::span<Real> values() noexcept { return values_; }
    std::span<const Real> values() const noexcept { return values_; }

    void zero();
    /// Uniform Glorot weights, zero biases.
    void initialize(std::uint64_t seed);

    friend bool operator==(const MlpParams&, const MlpParams&) = default;

private:
    MlpSpec spec_;
    std::vector<Real> values_;
    std::vector<std::size_t> offsets_;  // weight offset per layer; bias follows
};

/// Activations of one batched forward pass, stored feature-major
/// (width x batch) so the inner loops run over the batch.
template <class Real>
struct MlpTape {
    int batch = 0;
    std::vector<std::vector<Real>> activations;  // [0] input, [i] output of layer i-1

    // scratch reused by backward
    std::vector<Real> grad_a, grad_b, transposed_in, transposed_grad;
};

/// input and output are sample-major (batch x width).
template <class Real>
void mlp_forward_batch(const MlpParams<Real>& params, std::span<const Real> input, int batch, MlpTape<Real>& tape,
                       std::span<Real> output);

/// Accumulates parameter gradients into `grads`; writes grad_input
/// (batch x input width) unless it is empty.
template <class Real>
void mlp_backward_batch(const MlpParams<Real>& params, MlpTape<Real>& tape, std::span<const Real> grad_output,
                        MlpParams<Real>& grads, std::span<Real> grad_input);

template <class Real>
struct MlpForwardResult {
    std::vector<Real> output;
    MlpTape<Real> tape;
};

template <class Real>
struct MlpBackwardResult {
    MlpParams<Real> grads;
    std::vector<Real> grad_input;
};

template <class Real>
MlpForwardResult<Real> mlp_forward(const MlpParams<Real>& params, std::span<const Real> input);

template <class Real>
MlpBackwardResult<Real> mlp_backward(const MlpParams<Real>& params, MlpTape<Real> tape,
                                     std::span<const Real> grad_output);

extern template class MlpParams<float>;
extern template class MlpParams<double>;

}  // namespace stegofield
