#pragma once

#include "rnmt/loss.hpp"
#include "rnmt/model.hpp"
#include "rnmt/vocab.hpp"

#include <string>
#include <utility>
#include <vector>

namespace rnmt {

enum class GateKind { Update, Reset };
enum class HeatmapFormat { Csv, Pgm };

/// Gate activations averaged over hidden units: one row per target step,
/// one column per source position, entries in (0,1).
struct GateHeatmap {
    GateKind kind = GateKind::Update;
    Mat<double> values;
    std::vector<std::string> row_labels;  // target tokens, EOS included
    std::vector<std::string> col_labels;  // source tokens
};

/// Per-source-position means of the reset and update gates over hidden
/// units: the visualization metrics of the contexter sweep.
template <typename S>
std::pair<Vec<S>, Vec<S>> gate_averages(const GateTrace<S>& trace) {
    if (trace.empty()) throw StateError("gate_averages: empty trace");
    return {trace.reset.rowwise().mean(), trace.update.rowwise().mean()};
}

/// Teacher-forced gate heatmaps of one sentence pair; row j holds the gate
/// averages of the contexter sweep before emitting target token j.
template <typename S>
std::pair<GateHeatmap, GateHeatmap> collect_heatmaps(const ModelParams<S>& model,
                                                     const SentencePair& pair,
                                                     const Vocabulary& source_vocab,
                                                     const Vocabulary& target_vocab) {
    if (model.mode.mechanism != Mechanism::Contexter) {
        throw InvalidArgument("gate heatmaps require a contexter model");
    }
    PairTrace<S> trace;
    forward_pair(model, pair, trace);

    const Index m = static_cast<Index>(trace.steps.size());
    const Index n = static_cast<Index>(pair.source.size());

    GateHeatmap update, reset;
    update.kind = GateKind::Update;
    reset.kind = GateKind::Reset;
    update.values.resize(m, n);
    reset.values.resize(m, n);
    for (Index j = 0; j < m; ++j) {
        auto [r_avg, z_avg] = gate_averages(trace.steps[static_cast<std::size_t>(j)].ctx.trace);
        update.values.row(j) = z_avg.template cast<double>().transpose();
        reset.values.row(j) = r_avg.template cast<double>().transpose();
    }

    update.col_labels = source_vocab.decode(pair.source);
    update.row_labels = target_vocab.decode(trace.targets);
    reset.col_labels = update.col_labels;
    reset.row_labels = update.row_labels;
    return {std::move(update), std::move(reset)};
}

/// CSV: header row of source tokens, one data row per target token, six
/// decimal digits. PGM: plain P2, 256 levels, round-half-up of value*255.
void export_heatmap(const GateHeatmap& heatmap, const std::string& path,
                    HeatmapFormat format);

/// Reads back what export_heatmap wrote in CSV form (kind is not encoded).
GateHeatmap parse_heatmap_csv(const std::string& path);

/// Pearson correlation between two equally shaped heatmaps, for the
/// reset-versus-update comparison.
double heatmap_correlation(const GateHeatmap& a, const GateHeatmap& b);

}  // namespace rnmt
