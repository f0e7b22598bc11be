#pragma once

#include "rnmt/model.hpp"

#include <cmath>

namespace rnmt {

/// Running accumulators of squared gradients and squared updates, one per
/// parameter tensor.
template <typename S>
struct AdadeltaState {
    ModelParams<S> grad_sq;
    ModelParams<S> delta_sq;
};

template <typename S>
AdadeltaState<S> make_adadelta_state(const ModelParams<S>& model) {
    return {zeros_like(model), zeros_like(model)};
}

template <typename S>
double global_norm(std::vector<TensorView<S>> views) {
    double sum_sq = 0.0;
    for (const auto& v : views) {
        for (Index k = 0; k < v.size(); ++k) {
            const double x = static_cast<double>(v.data[k]);
            sum_sq += x * x;
        }
    }
    return std::sqrt(sum_sq);
}

/// Scales the gradients so the global norm is at most max_norm; returns the
/// factor applied (1 when no clipping happened or max_norm <= 0).
template <typename S>
double clip_global_norm(ModelParams<S>& grad, double max_norm) {
    if (max_norm <= 0) return 1.0;
    const double norm = global_norm(tensor_views(grad));
    if (norm <= max_norm) return 1.0;
    const S factor = static_cast<S>(max_norm / norm);
    for (auto& v : tensor_views(grad)) {
        for (Index k = 0; k < v.size(); ++k) v.data[k] *= factor;
    }
    return static_cast<double>(factor);
}

/// One Adadelta step:
///   Eg2  <- rho Eg2 + (1-rho) g^2
///   dx   =  -sqrt(Edx2 + eps) / sqrt(Eg2 + eps) * g
///   Edx2 <- rho Edx2 + (1-rho) dx^2
///   p    <- p + dx
/// Gradients must already be clipped by the caller (see clip_global_norm).
template <typename S>
void adadelta_update(ModelParams<S>& params, ModelParams<S>& grads,
                     AdadeltaState<S>& state, double rho, double eps) {
    auto p_views = tensor_views(params);
    auto g_views = tensor_views(grads);
    auto eg_views = tensor_views(state.grad_sq);
    auto ed_views = tensor_views(state.delta_sq);
    const S r = static_cast<S>(rho);
    const S one_minus_r = static_cast<S>(1.0 - rho);
    const S e = static_cast<S>(eps);
    for (std::size_t t = 0; t < p_views.size(); ++t) {
        S* p = p_views[t].data;
        const S* g = g_views[t].data;
        S* eg = eg_views[t].data;
        S* ed = ed_views[t].data;
        for (Index k = 0; k < p_views[t].size(); ++k) {
            eg[k] = r * eg[k] + one_minus_r * g[k] * g[k];
            const S dx = -std::sqrt(ed[k] + e) / std::sqrt(eg[k] + e) * g[k];
            ed[k] = r * ed[k] + one_minus_r * dx * dx;
            p[k] += dx;
        }
    }
}

}  // namespace rnmt
