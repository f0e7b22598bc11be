#pragma once

#include "rnmt/gru.hpp"
#include "rnmt/numerics.hpp"
#include "rnmt/types.hpp"

#include <string>

namespace rnmt {

enum class Mechanism { Attention, Contexter };
enum class ContextPooling { MeanPooling, LastState };

struct ContextMode {
    Mechanism mechanism = Mechanism::Contexter;
    ContextPooling output = ContextPooling::LastState;  // ignored by attention
};

Mechanism parse_mechanism(const std::string& name);
std::string mechanism_name(Mechanism m);
ContextPooling parse_pooling(const std::string& name);
std::string pooling_name(ContextPooling p);

/// Additive scoring: e_i = v . tanh(Ws s_prev + Wh h_i).
template <typename S>
struct AttentionParams {
    Mat<S> Ws;  // d_a x d_h
    Mat<S> Wh;  // d_a x 2*d_h
    Vec<S> v;   // d_a

    Index d_a() const { return v.size(); }
};

/// Reread GRU over the annotations, seeded from the previous decoder state.
template <typename S>
struct ContexterParams {
    GruParams<S> cell;  // input 2*d_h, hidden d_h
    Mat<S> Winit;       // d_h x d_h, initial state map
    Vec<S> binit;       // d_h

    Index d_h() const { return cell.hidden_dim(); }
};

/// Gate activations of one contexter sweep, row t = source position t.
/// Strictly what the backward pass and the gate visualization consume.
template <typename S>
struct GateTrace {
    Mat<S> update;     // n x d_h, z_t
    Mat<S> reset;      // n x d_h, r_t
    Mat<S> hidden;     // n x d_h, c_t
    Mat<S> candidate;  // n x d_h, cbar_t
    Vec<S> initial;    // c_0

    Index length() const { return update.rows(); }
    Index d_h() const { return update.cols(); }
    bool empty() const { return update.size() == 0; }
};

/// Result of one context extraction. `weights`/`scores_tanh` are filled by
/// attention, `trace` by the contexter; exactly one side is present.
template <typename S>
struct ContextOutput {
    Vec<S> context;
    Vec<S> weights;      // attention: alpha over source positions
    Mat<S> scores_tanh;  // attention: d_a x n, tanh(Ws s_prev + Wh h_i)
    GateTrace<S> trace;  // contexter
};

/// Per-sentence precomputation shared by every target step: the annotation
/// projections do not depend on the decoder state.
template <typename S>
struct AttentionProjection {
    Mat<S> ph;  // d_a x n

    void compute(const AttentionParams<S>& params, const Mat<S>& annotations) {
        ph.noalias() = params.Wh * annotations.transpose();
    }
};

template <typename S>
struct ContexterProjection {
    Mat<S> inputs;  // 2*d_h x n, annotation rows as columns
    GruInputProjection<S> proj;

    void compute(const ContexterParams<S>& params, const Mat<S>& annotations) {
        inputs = annotations.transpose();
        proj.compute(params.cell, inputs);
    }
};

template <typename S>
ContextOutput<S> attention_context_projected(const AttentionParams<S>& params,
                                             const AttentionProjection<S>& pre,
                                             const Vec<S>& s_prev,
                                             const Mat<S>& annotations) {
    ContextOutput<S> out;
    Vec<S> q = params.Ws * s_prev;
    out.scores_tanh = (pre.ph.colwise() + q).array().tanh().matrix();
    Vec<S> scores = out.scores_tanh.transpose() * params.v;
    out.weights = softmax(scores);
    out.context = annotations.transpose() * out.weights;
    return out;
}

template <typename S>
ContextOutput<S> attention_context(const AttentionParams<S>& params, const Vec<S>& s_prev,
                                   const Mat<S>& annotations) {
    if (params.Ws.cols() != s_prev.size()) {
        throw ShapeError("attention: state dimension mismatch");
    }
    if (params.Wh.cols() != annotations.cols()) {
        throw ShapeError("attention: annotation dimension mismatch");
    }
    if (annotations.rows() == 0) throw ShapeError("attention: empty annotations");
    AttentionProjection<S> pre;
    pre.compute(params, annotations);
    return attention_context_projected(params, pre, s_prev, annotations);
}

/// Gradients of one attention call. Accumulates into grad, ds_prev_acc and
/// d_annotations_acc (+=).
template <typename S>
void attention_backward(const AttentionParams<S>& params, const Vec<S>& s_prev,
                        const Mat<S>& annotations, const ContextOutput<S>& out,
                        const Vec<S>& d_context, AttentionParams<S>& grad,
                        Vec<S>& ds_prev_acc, Mat<S>& d_annotations_acc) {
    if (out.weights.size() == 0 || out.scores_tanh.size() == 0) {
        throw StateError("attention_backward: forward intermediates missing");
    }
    const Vec<S>& alpha = out.weights;

    Vec<S> d_alpha = annotations * d_context;
    d_annotations_acc.noalias() += alpha * d_context.transpose();

    // softmax backward
    const S inner = alpha.dot(d_alpha);
    Vec<S> d_scores = (alpha.array() * (d_alpha.array() - inner)).matrix();

    grad.v.noalias() += out.scores_tanh * d_scores;
    Mat<S> d_pre = (params.v * d_scores.transpose()).array() *
                   (S(1) - out.scores_tanh.array().square());
    Vec<S> d_pre_sum = d_pre.rowwise().sum();
    grad.Ws.noalias() += d_pre_sum * s_prev.transpose();
    ds_prev_acc.noalias() += params.Ws.transpose() * d_pre_sum;
    grad.Wh.noalias() += d_pre * annotations;
    d_annotations_acc.noalias() += d_pre.transpose() * params.Wh;
}

template <typename S>
Vec<S> init_contexter_state(const ContexterParams<S>& params, const Vec<S>& s_prev) {
    if (params.Winit.cols() != s_prev.size()) {
        throw ShapeError("contexter: state dimension mismatch");
    }
    return (params.Winit * s_prev + params.binit).array().tanh().matrix();
}

template <typename S>
ContextOutput<S> contexter_context_projected(const ContexterParams<S>& params,
                                             const ContexterProjection<S>& pre,
                                             const Vec<S>& s_prev, const ContextMode& mode) {
    const Index n = pre.inputs.cols();
    const Index d_h = params.d_h();

    ContextOutput<S> out;
    GateTrace<S>& trace = out.trace;
    trace.update.resize(n, d_h);
    trace.reset.resize(n, d_h);
    trace.hidden.resize(n, d_h);
    trace.candidate.resize(n, d_h);
    trace.initial = init_contexter_state(params, s_prev);

    Vec<S> state = trace.initial;
    GruStepCache<S> step;
    for (Index t = 0; t < n; ++t) {
        gru_forward_projected(params.cell, pre.proj, t, state, step);
        trace.update.row(t) = step.z.transpose();
        trace.reset.row(t) = step.r.transpose();
        trace.candidate.row(t) = step.cbar.transpose();
        trace.hidden.row(t) = step.h.transpose();
        state = step.h;
    }

    if (mode.output == ContextPooling::MeanPooling) {
        out.context = trace.hidden.colwise().mean().transpose();
    } else {
        out.context = trace.hidden.row(n - 1).transpose();
    }
    return out;
}

template <typename S>
ContextOutput<S> contexter_context(const ContexterParams<S>& params, const Vec<S>& s_prev,
                                   const Mat<S>& annotations, const ContextMode& mode) {
    if (mode.mechanism != Mechanism::Contexter) {
        throw InvalidArgument("contexter_context: mode does not select the contexter");
    }
    if (params.cell.input_dim() != annotations.cols()) {
        throw ShapeError("contexter: annotation dimension mismatch");
    }
    if (annotations.rows() == 0) throw ShapeError("contexter: empty annotations");
    ContexterProjection<S> pre;
    pre.compute(params, annotations);
    return contexter_context_projected(params, pre, s_prev, mode);
}

/// BPTT through one contexter sweep. The per-step recurrent products are
/// sequential; the weight gradients are batched into a few matrix products
/// at the end. Accumulates into grad, ds_prev_acc, d_annotations_acc (+=).
template <typename S>
void contexter_backward(const ContexterParams<S>& params, const Vec<S>& s_prev,
                        const Mat<S>& annotations, const ContextOutput<S>& out,
                        const ContextMode& mode, const Vec<S>& d_context,
                        ContexterParams<S>& grad, Vec<S>& ds_prev_acc,
                        Mat<S>& d_annotations_acc) {
    const GateTrace<S>& trace = out.trace;
    if (trace.empty()) {
        throw StateError("contexter_backward: forward intermediates missing");
    }
    const Index n = trace.length();
    const Index d_h = trace.d_h();

    Mat<S> dz_pre(d_h, n), dr_pre(d_h, n), dh_pre(d_h, n);
    Mat<S> prev_states(d_h, n);   // column t = c_{t-1}
    Mat<S> reset_states(d_h, n);  // column t = r_t . c_{t-1}

    Vec<S> carry = Vec<S>::Zero(d_h);
    GruStepCache<S> step;
    GruStepGrad<S> g;
    for (Index t = n - 1; t >= 0; --t) {
        Vec<S> dh = carry;
        if (mode.output == ContextPooling::MeanPooling) {
            dh += d_context / S(n);
        } else if (t == n - 1) {
            dh += d_context;
        }
        const Vec<S> h_prev =
            (t > 0) ? Vec<S>(trace.hidden.row(t - 1).transpose()) : trace.initial;
        step.z = trace.update.row(t).transpose();
        step.r = trace.reset.row(t).transpose();
        step.cbar = trace.candidate.row(t).transpose();
        carry.setZero();
        gru_backward_gates(params.cell, h_prev, step, dh, g, carry);
        dz_pre.col(t) = g.dz_pre;
        dr_pre.col(t) = g.dr_pre;
        dh_pre.col(t) = g.dh_pre;
        prev_states.col(t) = h_prev;
        reset_states.col(t) = (step.r.array() * h_prev.array()).matrix();
    }

    GruParams<S>& cell_grad = grad.cell;
    cell_grad.Wz.noalias() += dz_pre * annotations;
    cell_grad.Wr.noalias() += dr_pre * annotations;
    cell_grad.Wh.noalias() += dh_pre * annotations;
    cell_grad.Uz.noalias() += dz_pre * prev_states.transpose();
    cell_grad.Ur.noalias() += dr_pre * prev_states.transpose();
    cell_grad.Uh.noalias() += dh_pre * reset_states.transpose();
    cell_grad.bz += dz_pre.rowwise().sum();
    cell_grad.br += dr_pre.rowwise().sum();
    cell_grad.bh += dh_pre.rowwise().sum();

    d_annotations_acc.noalias() += dz_pre.transpose() * params.cell.Wz;
    d_annotations_acc.noalias() += dr_pre.transpose() * params.cell.Wr;
    d_annotations_acc.noalias() += dh_pre.transpose() * params.cell.Wh;

    // carry now holds the gradient on c_0
    Vec<S> d_init_pre = (carry.array() * (S(1) - trace.initial.array().square())).matrix();
    grad.binit += d_init_pre;
    grad.Winit.noalias() += d_init_pre * s_prev.transpose();
    ds_prev_acc.noalias() += params.Winit.transpose() * d_init_pre;
}

}  // namespace rnmt
