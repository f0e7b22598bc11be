#pragma once

#include "rnmt/types.hpp"

#include <cmath>
#include <functional>
#include <sstream>
#include <vector>

namespace rnmt {

enum class Activation { Sigmoid, Tanh };

template <typename S>
Vec<S> sigmoid(const Vec<S>& v) {
    return (S(1) / (S(1) + (-v.array()).exp())).matrix();
}

template <typename S>
Vec<S> activation(Activation kind, const Vec<S>& v) {
    switch (kind) {
        case Activation::Sigmoid: return sigmoid(v);
        case Activation::Tanh: return v.array().tanh().matrix();
    }
    throw InvalidArgument("unknown activation kind");
}

/// Checked matrix product. Shapes are reported in the error because callers
/// assemble these from configuration, not literals.
template <typename S>
Mat<S> matmul(const Mat<S>& a, const Mat<S>& b) {
    if (a.cols() != b.rows()) {
        std::ostringstream oss;
        oss << "matmul: inner dimensions differ, " << a.rows() << "x" << a.cols()
            << " * " << b.rows() << "x" << b.cols();
        throw ShapeError(oss.str());
    }
    return a * b;
}

/// Softmax with max subtraction.
template <typename S>
Vec<S> softmax(const Vec<S>& v) {
    if (v.size() == 0) throw ShapeError("softmax: empty vector");
    Vec<S> e = (v.array() - v.maxCoeff()).exp().matrix();
    return e / e.sum();
}

/// log softmax = (v - max) - log(sum exp(v - max)); never exponentiates
/// anything above zero.
template <typename S>
Vec<S> log_softmax(const Vec<S>& v) {
    if (v.size() == 0) throw ShapeError("log_softmax: empty vector");
    Vec<S> shifted = (v.array() - v.maxCoeff()).matrix();
    S lse = std::log(shifted.array().exp().sum());
    return (shifted.array() - lse).matrix();
}

template <typename S>
bool all_finite(const Mat<S>& m) {
    return m.allFinite();
}

/// Flat view of one named parameter tensor in its own storage order.
/// grad_check and the optimizer only need flat element access, so a raw
/// pointer plus extent is enough; paired views (params/grads) must come
/// from identically shaped tensors so indices line up.
template <typename S>
struct TensorView {
    std::string name;
    S* data = nullptr;
    Index rows = 0;
    Index cols = 0;

    Index size() const { return rows * cols; }
};

struct GradCheckEntry {
    std::string name;
    double max_rel_err = 0.0;
    double max_abs_err = 0.0;
};

struct GradCheckReport {
    std::vector<GradCheckEntry> tensors;
    double tolerance = 0.0;
    bool pass = false;

    double max_rel_err() const {
        double m = 0.0;
        for (const auto& t : tensors) m = std::max(m, t.max_rel_err);
        return m;
    }
};

/// Central-difference gradient check. `params` are perturbed in place and
/// restored; `analytic` holds the precomputed gradients in matching order.
/// Relative error is |a-n| / max(|a|,|n|,1e-8).
inline GradCheckReport grad_check(const std::vector<TensorView<double>>& params,
                                  const std::vector<TensorView<double>>& analytic,
                                  const std::function<double()>& loss_fn,
                                  double epsilon, double tolerance) {
    if (epsilon <= 0) throw InvalidArgument("grad_check: epsilon must be positive");
    if (params.size() != analytic.size()) {
        throw ShapeError("grad_check: parameter and gradient tensor counts differ");
    }

    GradCheckReport report;
    report.tolerance = tolerance;
    report.pass = true;

    for (std::size_t t = 0; t < params.size(); ++t) {
        const TensorView<double>& p = params[t];
        const TensorView<double>& g = analytic[t];
        if (p.size() != g.size()) {
            throw ShapeError("grad_check: tensor '" + p.name + "' size mismatch");
        }

        GradCheckEntry entry;
        entry.name = p.name;
        for (Index i = 0; i < p.size(); ++i) {
            const double saved = p.data[i];
            p.data[i] = saved + epsilon;
            const double up = loss_fn();
            p.data[i] = saved - epsilon;
            const double down = loss_fn();
            p.data[i] = saved;
            if (!std::isfinite(up) || !std::isfinite(down)) {
                throw NumericError("grad_check: non-finite loss while perturbing '" +
                                   p.name + "'");
            }
            const double numeric = (up - down) / (2.0 * epsilon);
            const double analytic_val = g.data[i];
            const double abs_err = std::abs(analytic_val - numeric);
            const double rel_err =
                abs_err / std::max({std::abs(analytic_val), std::abs(numeric), 1e-8});
            entry.max_abs_err = std::max(entry.max_abs_err, abs_err);
            entry.max_rel_err = std::max(entry.max_rel_err, rel_err);
        }
        if (entry.max_rel_err >= tolerance) report.pass = false;
        report.tensors.push_back(std::move(entry));
    }
    return report;
}

}  // namespace rnmt
