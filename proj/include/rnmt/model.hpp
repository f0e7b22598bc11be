#pragma once

#include "rnmt/context.hpp"
#include "rnmt/decoder.hpp"
#include "rnmt/encoder.hpp"
#include "rnmt/numerics.hpp"
#include "rnmt/types.hpp"

#include <vector>

namespace rnmt {

struct Dims {
    int d_w = 32;
    int d_h = 64;
    int d_a = 64;  // attention scoring width
    int d_r = 64;  // readout width
    int v_src = 0;
    int v_tgt = 0;

    int context_dim(Mechanism m) const {
        return m == Mechanism::Attention ? 2 * d_h : d_h;
    }
};

template <typename S>
struct ModelParams {
    Dims dims;
    ContextMode mode;
    EncoderParams<S> encoder;
    AttentionParams<S> attention;  // sized only for the attention mechanism
    ContexterParams<S> contexter;  // sized only for the contexter
    DecoderParams<S> decoder;
};

/// Allocates all tensors of the active mechanism with zero values.
template <typename S>
ModelParams<S> make_model(const Dims& dims, const ContextMode& mode) {
    if (dims.d_w < 1 || dims.d_h < 1 || dims.d_a < 1 || dims.d_r < 1 ||
        dims.v_src < 1 || dims.v_tgt < 1) {
        throw InvalidArgument("make_model: all dimensions must be positive");
    }
    ModelParams<S> m;
    m.dims = dims;
    m.mode = mode;

    m.encoder.embed = Mat<S>::Zero(dims.v_src, dims.d_w);
    m.encoder.fwd.resize(dims.d_h, dims.d_w);
    m.encoder.fwd.set_zero();
    m.encoder.bwd.resize(dims.d_h, dims.d_w);
    m.encoder.bwd.set_zero();

    if (mode.mechanism == Mechanism::Attention) {
        m.attention.Ws = Mat<S>::Zero(dims.d_a, dims.d_h);
        m.attention.Wh = Mat<S>::Zero(dims.d_a, 2 * dims.d_h);
        m.attention.v = Vec<S>::Zero(dims.d_a);
    } else {
        m.contexter.cell.resize(dims.d_h, 2 * dims.d_h);
        m.contexter.cell.set_zero();
        m.contexter.Winit = Mat<S>::Zero(dims.d_h, dims.d_h);
        m.contexter.binit = Vec<S>::Zero(dims.d_h);
    }

    const int ctx_dim = dims.context_dim(mode.mechanism);
    m.decoder.embed = Mat<S>::Zero(dims.v_tgt, dims.d_w);
    m.decoder.cell.resize(dims.d_h, dims.d_w + ctx_dim);
    m.decoder.cell.set_zero();
    m.decoder.Winit = Mat<S>::Zero(dims.d_h, dims.d_h);
    m.decoder.binit = Vec<S>::Zero(dims.d_h);
    m.decoder.readout.Ws = Mat<S>::Zero(dims.d_r, dims.d_h);
    m.decoder.readout.Wy = Mat<S>::Zero(dims.d_r, dims.d_w);
    m.decoder.readout.Wc = Mat<S>::Zero(dims.d_r, ctx_dim);
    m.decoder.readout.b = Vec<S>::Zero(dims.d_r);
    m.decoder.readout.Wout = Mat<S>::Zero(dims.v_tgt, dims.d_r);
    m.decoder.readout.bout = Vec<S>::Zero(dims.v_tgt);
    return m;
}

template <typename S>
ModelParams<S> zeros_like(const ModelParams<S>& m) {
    return make_model<S>(m.dims, m.mode);
}

namespace detail {

template <typename S>
void add_view(std::vector<TensorView<S>>& views, const std::string& name, Mat<S>& t) {
    views.push_back({name, t.data(), t.rows(), t.cols()});
}

template <typename S>
void add_view(std::vector<TensorView<S>>& views, const std::string& name, Vec<S>& t) {
    views.push_back({name, t.data(), t.size(), 1});
}

template <typename S>
void add_gru_views(std::vector<TensorView<S>>& views, const std::string& prefix,
                   GruParams<S>& g) {
    add_view(views, prefix + ".Wz", g.Wz);
    add_view(views, prefix + ".Wr", g.Wr);
    add_view(views, prefix + ".Wh", g.Wh);
    add_view(views, prefix + ".Uz", g.Uz);
    add_view(views, prefix + ".Ur", g.Ur);
    add_view(views, prefix + ".Uh", g.Uh);
    add_view(views, prefix + ".bz", g.bz);
    add_view(views, prefix + ".br", g.br);
    add_view(views, prefix + ".bh", g.bh);
}

}  // namespace detail

/// All trainable tensors of the active mechanism in a fixed order; this
/// order is also the checkpoint manifest order.
template <typename S>
std::vector<TensorView<S>> tensor_views(ModelParams<S>& m) {
    std::vector<TensorView<S>> views;
    detail::add_view(views, "enc.embed", m.encoder.embed);
    detail::add_gru_views(views, "enc.fwd", m.encoder.fwd);
    detail::add_gru_views(views, "enc.bwd", m.encoder.bwd);
    if (m.mode.mechanism == Mechanism::Attention) {
        detail::add_view(views, "attn.Ws", m.attention.Ws);
        detail::add_view(views, "attn.Wh", m.attention.Wh);
        detail::add_view(views, "attn.v", m.attention.v);
    } else {
        detail::add_gru_views(views, "ctx", m.contexter.cell);
        detail::add_view(views, "ctx.Winit", m.contexter.Winit);
        detail::add_view(views, "ctx.binit", m.contexter.binit);
    }
    detail::add_view(views, "dec.embed", m.decoder.embed);
    detail::add_gru_views(views, "dec", m.decoder.cell);
    detail::add_view(views, "dec.Winit", m.decoder.Winit);
    detail::add_view(views, "dec.binit", m.decoder.binit);
    detail::add_view(views, "dec.ro.Ws", m.decoder.readout.Ws);
    detail::add_view(views, "dec.ro.Wy", m.decoder.readout.Wy);
    detail::add_view(views, "dec.ro.Wc", m.decoder.readout.Wc);
    detail::add_view(views, "dec.ro.b", m.decoder.readout.b);
    detail::add_view(views, "dec.ro.Wout", m.decoder.readout.Wout);
    detail::add_view(views, "dec.ro.bout", m.decoder.readout.bout);
    return views;
}

/// Seeded uniform [-scale, scale] for weights and embeddings, zeros for
/// biases. Draw order is the tensor_views order.
template <typename S>
void init_params(ModelParams<S>& m, std::uint64_t seed, double scale = 0.08) {
    Rng rng(seed);
    auto fill = [&](Mat<S>& t) {
        for (Index c = 0; c < t.cols(); ++c) {
            for (Index r = 0; r < t.rows(); ++r) {
                t(r, c) = static_cast<S>(rng.uniform(-scale, scale));
            }
        }
    };
    auto fill_vec = [&](Vec<S>& t) {
        for (Index i = 0; i < t.size(); ++i) {
            t(i) = static_cast<S>(rng.uniform(-scale, scale));
        }
    };
    auto fill_gru = [&](GruParams<S>& g) {
        fill(g.Wz); fill(g.Wr); fill(g.Wh);
        fill(g.Uz); fill(g.Ur); fill(g.Uh);
        g.bz.setZero(); g.br.setZero(); g.bh.setZero();
    };

    fill(m.encoder.embed);
    fill_gru(m.encoder.fwd);
    fill_gru(m.encoder.bwd);
    if (m.mode.mechanism == Mechanism::Attention) {
        fill(m.attention.Ws);
        fill(m.attention.Wh);
        fill_vec(m.attention.v);  // scoring weights, not a bias
    } else {
        fill_gru(m.contexter.cell);
        fill(m.contexter.Winit);
        m.contexter.binit.setZero();
    }
    fill(m.decoder.embed);
    fill_gru(m.decoder.cell);
    fill(m.decoder.Winit);
    m.decoder.binit.setZero();
    fill(m.decoder.readout.Ws);
    fill(m.decoder.readout.Wy);
    fill(m.decoder.readout.Wc);
    m.decoder.readout.b.setZero();
    fill(m.decoder.readout.Wout);
    m.decoder.readout.bout.setZero();
}

template <typename T, typename S>
ModelParams<T> cast_model(const ModelParams<S>& m) {
    ModelParams<T> out = make_model<T>(m.dims, m.mode);
    auto src = tensor_views(const_cast<ModelParams<S>&>(m));
    auto dst = tensor_views(out);
    for (std::size_t i = 0; i < src.size(); ++i) {
        for (Index k = 0; k < src[i].size(); ++k) {
            dst[i].data[k] = static_cast<T>(src[i].data[k]);
        }
    }
    return out;
}

/// Per-sentence context precomputation for whichever mechanism is active.
template <typename S>
struct ContextProjections {
    AttentionProjection<S> attention;
    ContexterProjection<S> contexter;

    void compute(const ModelParams<S>& m, const Mat<S>& annotations) {
        if (m.mode.mechanism == Mechanism::Attention) {
            attention.compute(m.attention, annotations);
        } else {
            contexter.compute(m.contexter, annotations);
        }
    }
};

template <typename S>
ContextOutput<S> model_context(const ModelParams<S>& m, const ContextProjections<S>& pre,
                               const Vec<S>& s_prev, const Mat<S>& annotations) {
    if (m.mode.mechanism == Mechanism::Attention) {
        return attention_context_projected(m.attention, pre.attention, s_prev, annotations);
    }
    return contexter_context_projected(m.contexter, pre.contexter, s_prev, m.mode);
}

template <typename S>
void model_context_backward(const ModelParams<S>& m, const Vec<S>& s_prev,
                            const Mat<S>& annotations, const ContextOutput<S>& out,
                            const Vec<S>& d_context, ModelParams<S>& grad,
                            Vec<S>& ds_prev_acc, Mat<S>& d_annotations_acc) {
    if (m.mode.mechanism == Mechanism::Attention) {
        attention_backward(m.attention, s_prev, annotations, out, d_context,
                           grad.attention, ds_prev_acc, d_annotations_acc);
    } else {
        contexter_backward(m.contexter, s_prev, annotations, out, m.mode, d_context,
                           grad.contexter, ds_prev_acc, d_annotations_acc);
    }
}

}  // namespace rnmt
