#pragma once

#include "rnmt/gru.hpp"
#include "rnmt/numerics.hpp"
#include "rnmt/types.hpp"

namespace rnmt {

/// Word readout: r = tanh(Ws s + Wy E_yprev + Wc ctx + b),
/// logits = Wout r + bout, distribution = log softmax of logits.
template <typename S>
struct ReadoutParams {
    Mat<S> Ws;    // d_r x d_h
    Mat<S> Wy;    // d_r x d_w
    Mat<S> Wc;    // d_r x context_dim
    Vec<S> b;     // d_r
    Mat<S> Wout;  // V_tgt x d_r
    Vec<S> bout;  // V_tgt
};

template <typename S>
struct DecoderParams {
    Mat<S> embed;       // V_tgt x d_w
    GruParams<S> cell;  // input d_w + context_dim
    Mat<S> Winit;       // d_h x d_h, s_0 map from the backward annotation half
    Vec<S> binit;       // d_h
    ReadoutParams<S> readout;

    Index d_w() const { return embed.cols(); }
    Index d_h() const { return cell.hidden_dim(); }
    Index context_dim() const { return cell.input_dim() - d_w(); }
    Index vocab_size() const { return embed.rows(); }
};

template <typename S>
struct DecoderState {
    Vec<S> s;
    int step = 0;
};

template <typename S>
Vec<S> embedding_of(const Mat<S>& table, TokenId id) {
    if (id < 0 || id >= table.rows()) {
        throw InvalidArgument("token id out of range: " + std::to_string(id));
    }
    return table.row(id).transpose();
}

/// s_0 = tanh(Winit hback_1 + binit) with hback_1 the backward half of the
/// first annotation row.
template <typename S>
DecoderState<S> init_decoder_state(const DecoderParams<S>& params,
                                   const Mat<S>& annotations) {
    if (annotations.rows() == 0) throw ShapeError("init_decoder_state: empty annotations");
    const Index d_h = params.d_h();
    Vec<S> hback = annotations.row(0).tail(d_h).transpose();
    DecoderState<S> state;
    state.s = (params.Winit * hback + params.binit).array().tanh().matrix();
    state.step = 0;
    return state;
}

template <typename S>
struct DecoderStepCache {
    Vec<S> input;  // [embedding ; context]
    GruStepCache<S> gru;
};

template <typename S>
DecoderState<S> decoder_step_traced(const DecoderParams<S>& params,
                                    const DecoderState<S>& prev, TokenId y_prev,
                                    const Vec<S>& context, DecoderStepCache<S>& cache) {
    if (context.size() != params.context_dim()) {
        throw ShapeError("decoder_step: context dimension mismatch");
    }
    cache.input.resize(params.cell.input_dim());
    cache.input.head(params.d_w()) = embedding_of(params.embed, y_prev);
    cache.input.tail(context.size()) = context;
    gru_forward(params.cell, cache.input, prev.s, cache.gru);
    DecoderState<S> next;
    next.s = cache.gru.h;
    next.step = prev.step + 1;
    return next;
}

template <typename S>
DecoderState<S> decoder_step(const DecoderParams<S>& params, const DecoderState<S>& prev,
                             TokenId y_prev, const Vec<S>& context) {
    DecoderStepCache<S> cache;
    return decoder_step_traced(params, prev, y_prev, context, cache);
}

template <typename S>
struct ReadoutCache {
    Vec<S> embed;   // E_yprev
    Vec<S> r_tanh;  // post-tanh readout
    Vec<S> probs;   // softmax of logits
};

template <typename S>
Vec<S> output_distribution_traced(const DecoderParams<S>& params, TokenId y_prev,
                                  const DecoderState<S>& state, const Vec<S>& context,
                                  ReadoutCache<S>& cache) {
    const ReadoutParams<S>& ro = params.readout;
    cache.embed = embedding_of(params.embed, y_prev);
    cache.r_tanh = (ro.Ws * state.s + ro.Wy * cache.embed + ro.Wc * context + ro.b)
                       .array()
                       .tanh()
                       .matrix();
    Vec<S> logits = ro.Wout * cache.r_tanh + ro.bout;
    Vec<S> logp = log_softmax(logits);
    cache.probs = logp.array().exp().matrix();
    return logp;
}

/// Log probabilities over the target vocabulary for the next word.
template <typename S>
Vec<S> output_distribution(const DecoderParams<S>& params, TokenId y_prev,
                           const DecoderState<S>& state, const Vec<S>& context) {
    ReadoutCache<S> cache;
    return output_distribution_traced(params, y_prev, state, context, cache);
}

/// Backward through the readout given the gradient on the logits.
/// Accumulates into grad, ds_acc, d_embed_acc, d_context_acc (+=).
template <typename S>
void readout_backward(const DecoderParams<S>& params, const DecoderState<S>& state,
                      const Vec<S>& context, const ReadoutCache<S>& cache,
                      const Vec<S>& d_logits, ReadoutParams<S>& grad, Vec<S>& ds_acc,
                      Vec<S>& d_embed_acc, Vec<S>& d_context_acc) {
    const ReadoutParams<S>& ro = params.readout;
    grad.Wout.noalias() += d_logits * cache.r_tanh.transpose();
    grad.bout += d_logits;
    Vec<S> dr = ro.Wout.transpose() * d_logits;
    Vec<S> dpre = (dr.array() * (S(1) - cache.r_tanh.array().square())).matrix();
    grad.Ws.noalias() += dpre * state.s.transpose();
    grad.Wy.noalias() += dpre * cache.embed.transpose();
    grad.Wc.noalias() += dpre * context.transpose();
    grad.b += dpre;
    ds_acc.noalias() += ro.Ws.transpose() * dpre;
    d_embed_acc.noalias() += ro.Wy.transpose() * dpre;
    d_context_acc.noalias() += ro.Wc.transpose() * dpre;
}

/// Backward through one decoder GRU step. d_input_acc must be sized
/// d_w + context_dim; the caller splits it afterwards.
template <typename S>
void decoder_step_backward(const DecoderParams<S>& params, const Vec<S>& s_prev,
                           const DecoderStepCache<S>& cache, const Vec<S>& ds,
                           GruParams<S>& cell_grad, Vec<S>& d_input_acc,
                           Vec<S>& ds_prev_acc) {
    gru_backward(params.cell, cache.input, s_prev, cache.gru, ds, cell_grad,
                 d_input_acc, ds_prev_acc);
}

/// Backward through the s_0 construction; accumulates the annotation-side
/// gradient into the backward half of the first annotation row.
template <typename S>
void init_decoder_state_backward(const DecoderParams<S>& params, const Mat<S>& annotations,
                                 const Vec<S>& s0, const Vec<S>& ds0, Mat<S>& decoder_grad_Winit,
                                 Vec<S>& decoder_grad_binit, Mat<S>& d_annotations_acc) {
    const Index d_h = params.d_h();
    Vec<S> hback = annotations.row(0).tail(d_h).transpose();
    Vec<S> dpre = (ds0.array() * (S(1) - s0.array().square())).matrix();
    decoder_grad_Winit.noalias() += dpre * hback.transpose();
    decoder_grad_binit += dpre;
    d_annotations_acc.row(0).tail(d_h) += (params.Winit.transpose() * dpre).transpose();
}

}  // namespace rnmt
