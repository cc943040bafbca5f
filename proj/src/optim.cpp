#include "stegofield/optim.hpp"

#include <cmath>
#include <stdexcept>

namespace stegofield {

template <class Real>
void adam_update(std::span<Real> params, std::span<const Real> grads, AdamState<Real>& state, const AdamConfig& config,
                 std::int64_t step) {
    if (grads.size() != params.size() || state.first_moment.size() != params.size() ||
        state.second_moment.size() != params.size())
        throw std::invalid_argument("adam_update shape mismatch");
    if (step < 1) throw std::invalid_argument("adam step counter starts at 1");

    const double t = static_cast<double>(step);
    const Real correction1 = static_cast<Real>(1.0 - std::pow(static_cast<double>(config.beta1), t));
    const Real correction2 = static_cast<Real>(1.0 - std::pow(static_cast<double>(config.beta2), t));
    const Real beta1 = config.beta1, beta2 = config.beta2;
    const Real lr = config.learning_rate, eps = config.epsilon;

    Real* m = state.first_moment.data();
    Real* v = state.second_moment.data();
    for (std::size_t i = 0; i < params.size(); ++i) {
        const Real g = grads[i];
        m[i] = beta1 * m[i] + (Real(1) - beta1) * g;
        v[i] = beta2 * v[i] + (Real(1) - beta2) * g * g;
        const Real m_hat = m[i] / correction1;
        const Real v_hat = v[i] / correction2;
        params[i] -= lr * m_hat / (std::sqrt(v_hat) + eps);
    }
}

template <class Real>
double mse_loss(std::span<const Real> pred, std::span<const Real> target, std::span<Real> gradient) {
    if (pred.size() != target.size() || pred.empty()) throw std::invalid_argument("mse_loss shape mismatch");
    if (!gradient.empty() && gradient.size() != pred.size()) throw std::invalid_argument("mse_loss gradient size");
    const double n = static_cast<double>(pred.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const double diff = static_cast<double>(pred[i]) - static_cast<double>(target[i]);
        sum += diff * diff;
        if (!gradient.empty()) gradient[i] = static_cast<Real>(2.0 * diff / n);
    }
    return sum / n;
}

template <class Real>
double sparsity_loss(std::span<const Real> features, double weight, std::span<Real> gradient) {
    if (weight < 0) throw std::invalid_argument("sparsity weight must be >= 0");
    if (!gradient.empty() && gradient.size() != features.size())
        throw std::invalid_argument("sparsity_loss gradient size");
    if (features.empty() || weight == 0.0) return 0.0;
    const double n = static_cast<double>(features.size());
    const Real step = static_cast<Real>(weight / n);
    double sum = 0.0;
    for (std::size_t i = 0; i < features.size(); ++i) {
        const Real f = features[i];
        sum += std::abs(static_cast<double>(f));
        if (!gradient.empty()) {
            if (f > Real(0)) gradient[i] += step;
            else if (f < Real(0)) gradient[i] -= step;
        }
    }
    return weight * sum / n;
}

template void adam_update<float>(std::span<float>, std::span<const float>, AdamState<float>&, const AdamConfig&,
                                 std::int64_t);
template void adam_update<double>(std::span<double>, std::span<const double>, AdamState<double>&, const AdamConfig&,
                                  std::int64_t);
template double mse_loss<float>(std::span<const float>, std::span<const float>, std::span<float>);
template double mse_loss<double>(std::span<const double>, std::span<const double>, std::span<double>);
template double sparsity_loss<float>(std::span<const float>, double, std::span<float>);
template double sparsity_loss<double>(std::span<const double>, double, std::span<double>);

}  // namespace stegofield
