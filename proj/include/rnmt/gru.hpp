#pragma once

#include "rnmt/numerics.hpp"
#include "rnmt/types.hpp"

namespace rnmt {

/// One GRU cell:
///   z = sigmoid(Wz x + Uz h_prev + bz)
///   r = sigmoid(Wr x + Ur h_prev + br)
///   cbar = tanh(Wh x + Uh (r . h_prev) + bh)
///   h = (1 - z) . h_prev + z . cbar
/// The update gate z admits new input; r blocks history in the candidate.
template <typename S>
struct GruParams {
    Mat<S> Wz, Wr, Wh;  // hidden x input
    Mat<S> Uz, Ur, Uh;  // hidden x hidden
    Vec<S> bz, br, bh;

    Index input_dim() const { return Wz.cols(); }
    Index hidden_dim() const { return Wz.rows(); }

    void resize(Index hidden, Index input) {
        Wz.resize(hidden, input);
        Wr.resize(hidden, input);
        Wh.resize(hidden, input);
        Uz.resize(hidden, hidden);
        Ur.resize(hidden, hidden);
        Uh.resize(hidden, hidden);
        bz.resize(hidden);
        br.resize(hidden);
        bh.resize(hidden);
    }

    void set_zero() {
        Wz.setZero(); Wr.setZero(); Wh.setZero();
        Uz.setZero(); Ur.setZero(); Uh.setZero();
        bz.setZero(); br.setZero(); bh.setZero();
    }
};

/// Per-step activations retained for the backward pass.
template <typename S>
struct GruStepCache {
    Vec<S> z, r, cbar, h;
};

/// Input projections Wz x + bz etc. do not depend on the recurrent state,
/// so callers that sweep one parameter set over many inputs (encoder over a
/// sentence, contexter over the annotations for every target step) can
/// precompute them once. Column t holds the projection of input t.
template <typename S>
struct GruInputProjection {
    Mat<S> pz, pr, ph;  // hidden x n, bias included

    void compute(const GruParams<S>& p, const Mat<S>& inputs_cols) {
        pz.noalias() = p.Wz * inputs_cols;
        pz.colwise() += p.bz;
        pr.noalias() = p.Wr * inputs_cols;
        pr.colwise() += p.br;
        ph.noalias() = p.Wh * inputs_cols;
        ph.colwise() += p.bh;
    }
};

template <typename S>
void gru_forward(const GruParams<S>& p, const Vec<S>& x, const Vec<S>& h_prev,
                 GruStepCache<S>& cache) {
    cache.z = sigmoid<S>(p.Wz * x + p.Uz * h_prev + p.bz);
    cache.r = sigmoid<S>(p.Wr * x + p.Ur * h_prev + p.br);
    cache.cbar = (p.Wh * x + p.Uh * (cache.r.array() * h_prev.array()).matrix() + p.bh)
                     .array()
                     .tanh()
                     .matrix();
    cache.h = ((S(1) - cache.z.array()) * h_prev.array() +
               cache.z.array() * cache.cbar.array())
                  .matrix();
}

/// Forward from precomputed input projections (column t of proj).
template <typename S>
void gru_forward_projected(const GruParams<S>& p, const GruInputProjection<S>& proj,
                           Index t, const Vec<S>& h_prev, GruStepCache<S>& cache) {
    cache.z = sigmoid<S>(Vec<S>(proj.pz.col(t) + p.Uz * h_prev));
    cache.r = sigmoid<S>(Vec<S>(proj.pr.col(t) + p.Ur * h_prev));
    cache.cbar = (proj.ph.col(t) + p.Uh * (cache.r.array() * h_prev.array()).matrix())
                     .array()
                     .tanh()
                     .matrix();
    cache.h = ((S(1) - cache.z.array()) * h_prev.array() +
               cache.z.array() * cache.cbar.array())
                  .matrix();
}

/// Pre-activation gate gradients of one step; the input/recurrent weight
/// gradients are rank-1 in these, so callers may either accumulate them
/// per step (gru_backward) or batch the outer products across steps.
template <typename S>
struct GruStepGrad {
    Vec<S> dz_pre, dr_pre, dh_pre;
};

/// The state-dependent part of the backward step: pre-activation gate
/// gradients plus the recurrent/candidate contributions to dh_prev (+=).
/// Weight outer products are left to the caller.
template <typename S>
void gru_backward_gates(const GruParams<S>& p, const Vec<S>& h_prev,
                        const GruStepCache<S>& cache, const Vec<S>& dh,
                        GruStepGrad<S>& g, Vec<S>& dh_prev_acc) {
    const auto z = cache.z.array();
    const auto r = cache.r.array();
    const auto cbar = cache.cbar.array();

    Vec<S> dz = (dh.array() * (cbar - h_prev.array())).matrix();
    Vec<S> dcbar = (dh.array() * z).matrix();
    dh_prev_acc.array() += dh.array() * (S(1) - z);

    g.dh_pre = (dcbar.array() * (S(1) - cbar.square())).matrix();
    Vec<S> drh = p.Uh.transpose() * g.dh_pre;  // d on (r . h_prev)
    Vec<S> dr = (drh.array() * h_prev.array()).matrix();
    dh_prev_acc.array() += drh.array() * r;

    g.dz_pre = (dz.array() * z * (S(1) - z)).matrix();
    g.dr_pre = (dr.array() * r * (S(1) - r)).matrix();

    dh_prev_acc.noalias() += p.Uz.transpose() * g.dz_pre;
    dh_prev_acc.noalias() += p.Ur.transpose() * g.dr_pre;
}

/// Full reverse-mode step. Accumulates parameter gradients into `grad`,
/// the input gradient into dx_acc and the carried state gradient into
/// dh_prev_acc (all +=).
template <typename S>
void gru_backward(const GruParams<S>& p, const Vec<S>& x, const Vec<S>& h_prev,
                  const GruStepCache<S>& cache, const Vec<S>& dh,
                  GruParams<S>& grad, Vec<S>& dx_acc, Vec<S>& dh_prev_acc) {
    GruStepGrad<S> g;
    gru_backward_gates(p, h_prev, cache, dh, g, dh_prev_acc);
    grad.Wz.noalias() += g.dz_pre * x.transpose();
    grad.Wr.noalias() += g.dr_pre * x.transpose();
    grad.Wh.noalias() += g.dh_pre * x.transpose();
    grad.Uz.noalias() += g.dz_pre * h_prev.transpose();
    grad.Ur.noalias() += g.dr_pre * h_prev.transpose();
    grad.Uh.noalias() += g.dh_pre * (cache.r.array() * h_prev.array()).matrix().transpose();
    grad.bz += g.dz_pre;
    grad.br += g.dr_pre;
    grad.bh += g.dh_pre;
    dx_acc.noalias() += p.Wz.transpose() * g.dz_pre;
    dx_acc.noalias() += p.Wr.transpose() * g.dr_pre;
    dx_acc.noalias() += p.Wh.transpose() * g.dh_pre;
}

}  // namespace rnmt
