#pragma once

#include "rnmt/corpus.hpp"
#include "rnmt/model.hpp"
#include "rnmt/vocab.hpp"

#include <cmath>
#include <vector>

namespace rnmt {

/// Everything one teacher-forced pass keeps for the backward pass.
template <typename S>
struct StepTrace {
    ContextOutput<S> ctx;
    DecoderStepCache<S> dec;
    ReadoutCache<S> readout;
};

template <typename S>
struct PairTrace {
    EncoderTrace<S> enc;
    std::vector<Vec<S>> states;  // states[0] = s_0, states[j+1] = state after step j
    std::vector<StepTrace<S>> steps;
    TokenIds inputs;   // BOS, y_1 .. y_m (token fed at each step)
    TokenIds targets;  // y_1 .. y_m, EOS (token predicted at each step)
    double loss = 0.0;
};

/// Teacher-forced negative log-likelihood of one pair, including the EOS
/// step. Loss is accumulated in double regardless of the tensor scalar.
template <typename S>
double forward_pair(const ModelParams<S>& model, const SentencePair& pair,
                    PairTrace<S>& trace) {
    if (pair.source.empty() || pair.target.empty()) {
        throw InvalidArgument("forward_pair: empty sentence");
    }
    check_token_ids(pair.target, model.decoder.vocab_size(), "target");

    encode_traced(model.encoder, pair.source, trace.enc);
    ContextProjections<S> pre;
    pre.compute(model, trace.enc.annotations);

    trace.inputs.clear();
    trace.inputs.push_back(Vocabulary::kBos);
    trace.inputs.insert(trace.inputs.end(), pair.target.begin(), pair.target.end());
    trace.targets = pair.target;
    trace.targets.push_back(Vocabulary::kEos);

    const std::size_t num_steps = trace.targets.size();
    trace.steps.assign(num_steps, {});
    trace.states.assign(num_steps + 1, {});

    DecoderState<S> state = init_decoder_state(model.decoder, trace.enc.annotations);
    trace.states[0] = state.s;

    double loss = 0.0;
    for (std::size_t j = 0; j < num_steps; ++j) {
        StepTrace<S>& st = trace.steps[j];
        st.ctx = model_context(model, pre, state.s, trace.enc.annotations);
        state = decoder_step_traced(model.decoder, state, trace.inputs[j],
                                    st.ctx.context, st.dec);
        Vec<S> logp = output_distribution_traced(model.decoder, trace.inputs[j], state,
                                                 st.ctx.context, st.readout);
        loss -= static_cast<double>(logp(trace.targets[j]));
        trace.states[j + 1] = state.s;
    }
    trace.loss = loss;
    return loss;
}

template <typename S>
double nll_loss(const ModelParams<S>& model, const SentencePair& pair) {
    PairTrace<S> trace;
    return forward_pair(model, pair, trace);
}

/// Exact reverse-mode pass over one pair; accumulates into grad (+=).
template <typename S>
void backward_pair(const ModelParams<S>& model, const SentencePair& pair,
                   const PairTrace<S>& trace, ModelParams<S>& grad) {
    const Index d_h = model.dims.d_h;
    const Index d_w = model.dims.d_w;
    const Index ctx_dim = model.dims.context_dim(model.mode.mechanism);
    const Index n = trace.enc.annotations.rows();

    Mat<S> d_annotations = Mat<S>::Zero(n, 2 * d_h);
    Vec<S> ds_carry = Vec<S>::Zero(d_h);

    for (std::size_t j = trace.steps.size(); j-- > 0;) {
        const StepTrace<S>& st = trace.steps[j];
        const Vec<S>& s_prev = trace.states[j];
        DecoderState<S> state_j;
        state_j.s = trace.states[j + 1];
        state_j.step = static_cast<int>(j) + 1;

        // d(-log p[target]) / d logits = probs - onehot(target)
        Vec<S> d_logits = st.readout.probs;
        d_logits(trace.targets[j]) -= S(1);

        Vec<S> ds_j = ds_carry;
        Vec<S> d_embed = Vec<S>::Zero(d_w);
        Vec<S> d_ctx = Vec<S>::Zero(ctx_dim);
        readout_backward(model.decoder, state_j, st.ctx.context, st.readout, d_logits,
                         grad.decoder.readout, ds_j, d_embed, d_ctx);

        Vec<S> d_input = Vec<S>::Zero(d_w + ctx_dim);
        ds_carry.setZero();
        decoder_step_backward(model.decoder, s_prev, st.dec, ds_j, grad.decoder.cell,
                              d_input, ds_carry);
        d_embed += d_input.head(d_w);
        d_ctx += d_input.tail(ctx_dim);
        grad.decoder.embed.row(trace.inputs[j]) += d_embed.transpose();

        model_context_backward(model, s_prev, trace.enc.annotations, st.ctx, d_ctx, grad,
                               ds_carry, d_annotations);
    }

    init_decoder_state_backward(model.decoder, trace.enc.annotations, trace.states[0],
                                ds_carry, grad.decoder.Winit, grad.decoder.binit,
                                d_annotations);
    encoder_backward(model.encoder, pair.source, trace.enc, d_annotations, grad.encoder);
}

/// Gradient of the mean per-sentence loss over a batch. Each pair's
/// gradient is computed into its own scratch and the per-pair results are
/// summed tensor-wise in batch order, then divided once; a duplicated pair
/// in a batch of two therefore yields exactly the batch-of-one gradients.
template <typename S>
double backward_batch(const ModelParams<S>& model, const std::vector<SentencePair>& batch,
                      ModelParams<S>& grad) {
    if (batch.empty()) throw InvalidArgument("backward_batch: empty batch");
    double total_loss = 0.0;
    auto grad_views = tensor_views(grad);
    ModelParams<S> pair_grad = zeros_like(grad);
    auto pair_views = tensor_views(pair_grad);
    for (std::size_t i = 0; i < batch.size(); ++i) {
        PairTrace<S> trace;
        const double loss = forward_pair(model, batch[i], trace);
        if (!std::isfinite(loss)) {
            throw NumericError("non-finite loss at batch pair " + std::to_string(i));
        }
        total_loss += loss;
        for (auto& view : pair_views) {
            std::fill(view.data, view.data + view.size(), S(0));
        }
        backward_pair(model, batch[i], trace, pair_grad);
        for (std::size_t t = 0; t < grad_views.size(); ++t) {
            for (Index k = 0; k < grad_views[t].size(); ++k) {
                grad_views[t].data[k] += pair_views[t].data[k];
            }
        }
    }
    const S scale = S(batch.size());
    for (auto& view : grad_views) {
        for (Index k = 0; k < view.size(); ++k) view.data[k] /= scale;
    }
    return total_loss / static_cast<double>(batch.size());
}

}  // namespace rnmt
