#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace stegofield {

struct AdamConfig {
    float learning_rate = 1e-2f;
    float beta1 = 0.9f;
    float beta2 = 0.999f;
    float epsilon = 1e-8f;
};

/// Moment buffers for one parameter block. The step counter lives in the
/// caller so several blocks can share one bias-correction schedule.
template <class Real>
struct AdamState {
    std::vector<Real> first_moment;
    std::vector<Real> second_moment;

    explicit AdamState(std::size_t n = 0) : first_moment(n, Real(0)), second_moment(n, Real(0)) {}
};

/// One bias-corrected Adam update of `params` for 1-based step `step`.
template <class Real>
void adam_update(std::span<Real> params, std::span<const Real> grads, AdamState<Real>& state, const AdamConfig& config,
                 std::int64_t step);

/// mean((pred - target)^2) and its gradient 2 (pred - target) / n.
template <class Real>
double mse_loss(std::span<const Real> pred, std::span<const Real> target, std::span<Real> gradient);

/// weight * mean(|features|); adds weight * sign / n into gradient when given.
template <class Real>
double sparsity_loss(std::span<const Real> features, double weight, std::span<Real> gradient);

}  // namespace stegofield
