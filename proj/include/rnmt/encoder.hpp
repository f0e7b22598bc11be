#pragma once

#include "rnmt/gru.hpp"
#include "rnmt/types.hpp"

#include <vector>

namespace rnmt {

template <typename S>
struct EncoderParams {
    Mat<S> embed;  // V_src x d_w, one row per token
    GruParams<S> fwd;
    GruParams<S> bwd;

    Index d_w() const { return embed.cols(); }
    Index d_h() const { return fwd.hidden_dim(); }
};

/// Everything the encoder backward pass needs. The bwd chain stores steps
/// in processing order: bwd[t] consumed source position n-1-t.
template <typename S>
struct EncoderTrace {
    Mat<S> embeds;  // d_w x n, column per source position
    std::vector<GruStepCache<S>> fwd;
    std::vector<GruStepCache<S>> bwd;
    Mat<S> annotations;  // n x 2*d_h, row i = [fwd_i ; bwd_i]
};

inline void check_token_ids(const TokenIds& ids, Index vocab_size, const char* side) {
    for (TokenId id : ids) {
        if (id < 0 || id >= vocab_size) {
            throw InvalidArgument(std::string(side) + " token id out of range: " +
                                  std::to_string(id));
        }
    }
}

/// Bidirectional pass producing the annotation matrix; both directions
/// start from a zero state.
template <typename S>
void encode_traced(const EncoderParams<S>& params, const TokenIds& source,
                   EncoderTrace<S>& trace) {
    if (source.empty()) throw ShapeError("encode: empty source sentence");
    check_token_ids(source, params.embed.rows(), "source");

    const Index n = static_cast<Index>(source.size());
    const Index d_h = params.d_h();

    trace.embeds.resize(params.d_w(), n);
    for (Index i = 0; i < n; ++i) {
        trace.embeds.col(i) = params.embed.row(source[static_cast<std::size_t>(i)]).transpose();
    }

    GruInputProjection<S> proj;
    proj.compute(params.fwd, trace.embeds);
    trace.fwd.assign(static_cast<std::size_t>(n), {});
    Vec<S> state = Vec<S>::Zero(d_h);
    for (Index i = 0; i < n; ++i) {
        gru_forward_projected(params.fwd, proj, i, state, trace.fwd[static_cast<std::size_t>(i)]);
        state = trace.fwd[static_cast<std::size_t>(i)].h;
    }

    proj.compute(params.bwd, trace.embeds);
    trace.bwd.assign(static_cast<std::size_t>(n), {});
    state = Vec<S>::Zero(d_h);
    for (Index t = 0; t < n; ++t) {
        gru_forward_projected(params.bwd, proj, n - 1 - t, state,
                              trace.bwd[static_cast<std::size_t>(t)]);
        state = trace.bwd[static_cast<std::size_t>(t)].h;
    }

    trace.annotations.resize(n, 2 * d_h);
    for (Index i = 0; i < n; ++i) {
        trace.annotations.row(i).head(d_h) = trace.fwd[static_cast<std::size_t>(i)].h.transpose();
        trace.annotations.row(i).tail(d_h) =
            trace.bwd[static_cast<std::size_t>(n - 1 - i)].h.transpose();
    }
}

template <typename S>
Mat<S> encode(const EncoderParams<S>& params, const TokenIds& source) {
    EncoderTrace<S> trace;
    encode_traced(params, source, trace);
    return trace.annotations;
}

/// Reverse pass for an upstream gradient on the annotation matrix.
/// Accumulates into grad (+=).
template <typename S>
void encoder_backward(const EncoderParams<S>& params, const TokenIds& source,
                      const EncoderTrace<S>& trace, const Mat<S>& d_annotations,
                      EncoderParams<S>& grad) {
    const Index n = static_cast<Index>(source.size());
    const Index d_h = params.d_h();
    const Vec<S> zero = Vec<S>::Zero(d_h);

    Mat<S> d_embeds = Mat<S>::Zero(params.d_w(), n);

    Vec<S> carry = Vec<S>::Zero(d_h);
    for (Index i = n - 1; i >= 0; --i) {
        Vec<S> dh = carry + d_annotations.row(i).head(d_h).transpose();
        const Vec<S>& h_prev = (i > 0) ? trace.fwd[static_cast<std::size_t>(i - 1)].h : zero;
        carry.setZero();
        Vec<S> dx = Vec<S>::Zero(params.d_w());
        gru_backward(params.fwd, Vec<S>(trace.embeds.col(i)), h_prev,
                     trace.fwd[static_cast<std::size_t>(i)], dh, grad.fwd, dx, carry);
        d_embeds.col(i) += dx;
    }

    carry.setZero();
    for (Index t = n - 1; t >= 0; --t) {
        const Index pos = n - 1 - t;  // source position consumed at chain step t
        Vec<S> dh = carry + d_annotations.row(pos).tail(d_h).transpose();
        const Vec<S>& h_prev = (t > 0) ? trace.bwd[static_cast<std::size_t>(t - 1)].h : zero;
        carry.setZero();
        Vec<S> dx = Vec<S>::Zero(params.d_w());
        gru_backward(params.bwd, Vec<S>(trace.embeds.col(pos)), h_prev,
                     trace.bwd[static_cast<std::size_t>(t)], dh, grad.bwd, dx, carry);
        d_embeds.col(pos) += dx;
    }

    for (Index i = 0; i < n; ++i) {
        grad.embed.row(source[static_cast<std::size_t>(i)]) += d_embeds.col(i).transpose();
    }
}

}  // namespace rnmt
