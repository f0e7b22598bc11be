#pragma once

#include "rnmt/loss.hpp"
#include "rnmt/model.hpp"
#include "rnmt/numerics.hpp"

namespace rnmt {

/// Random model (biases included, so the check does not sit at the zero
/// special point) and a random sentence pair of the given lengths. The
/// scale must be large enough that no gradient vanishes below the central
/// difference noise floor (~1e-9 at epsilon 1e-5), or the relative error
/// on that element measures noise rather than the backward pass.
inline ModelParams<double> random_check_model(const Dims& dims, const ContextMode& mode,
                                              std::uint64_t seed, double scale = 0.8) {
    ModelParams<double> model = make_model<double>(dims, mode);
    Rng rng(seed);
    for (auto& view : tensor_views(model)) {
        for (Index k = 0; k < view.size(); ++k) {
            view.data[k] = rng.uniform(-scale, scale);
        }
    }
    return model;
}

inline SentencePair random_check_pair(const Dims& dims, int src_len, int tgt_len,
                                      std::uint64_t seed) {
    Rng rng(seed);
    SentencePair pair;
    for (int i = 0; i < src_len; ++i) {
        pair.source.push_back(Vocabulary::kNumReserved +
                              static_cast<TokenId>(rng.below(
                                  static_cast<std::size_t>(dims.v_src - Vocabulary::kNumReserved))));
    }
    for (int i = 0; i < tgt_len; ++i) {
        pair.target.push_back(Vocabulary::kNumReserved +
                              static_cast<TokenId>(rng.below(
                                  static_cast<std::size_t>(dims.v_tgt - Vocabulary::kNumReserved))));
    }
    return pair;
}

/// Central-difference check of the full backward pass (double precision).
inline GradCheckReport full_model_grad_check(const Dims& dims, const ContextMode& mode,
                                             int src_len, int tgt_len, std::uint64_t seed,
                                             double epsilon = 1e-5, double tolerance = 1e-4,
                                             double scale = 0.8) {
    ModelParams<double> model = random_check_model(dims, mode, seed, scale);
    const SentencePair pair = random_check_pair(dims, src_len, tgt_len, seed + 1);

    ModelParams<double> grad = zeros_like(model);
    backward_batch(model, {pair}, grad);

    auto loss_fn = [&]() { return nll_loss(model, pair); };
    return grad_check(tensor_views(model), tensor_views(grad), loss_fn, epsilon,
                      tolerance);
}

}  // namespace rnmt
