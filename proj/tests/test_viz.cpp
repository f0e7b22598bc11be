#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "rnmt/gradcheck.hpp"
#include "rnmt/viz.hpp"

#include <filesystem>
#include <cmath>
#include <fstream>
#include <unistd.h>

using namespace rnmt;

namespace {

struct TempDir {
    std::filesystem::path path;
    TempDir() {
        path = std::filesystem::temp_directory_path() /
               ("rnmt_viz_test_" + std::to_string(::getpid()));
        std::filesystem::create_directories(path);
    }
    ~TempDir() { std::filesystem::remove_all(path); }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

GateTrace<double> random_trace(Rng& rng, Index n, Index d_h) {
    GateTrace<double> trace;
    trace.update.resize(n, d_h);
    trace.reset.resize(n, d_h);
    trace.hidden.resize(n, d_h);
    trace.candidate.resize(n, d_h);
    trace.initial = Vec<double>::Zero(d_h);
    for (Index r = 0; r < n; ++r) {
        for (Index c = 0; c < d_h; ++c) {
            trace.update(r, c) = rng.uniform(0.01, 0.99);
            trace.reset(r, c) = rng.uniform(0.01, 0.99);
            trace.hidden(r, c) = rng.uniform(-0.9, 0.9);
            trace.candidate(r, c) = rng.uniform(-0.9, 0.9);
        }
    }
    return trace;
}

}  // namespace

TEST_CASE("gate averages are per-position row means") {
    Rng rng(1);
    GateTrace<double> trace = random_trace(rng, 3, 4);
    auto [reset_avg, update_avg] = gate_averages(trace);
    REQUIRE(reset_avg.size() == 3);
    for (Index t = 0; t < 3; ++t) {
        double rsum = 0.0, zsum = 0.0;
        for (Index k = 0; k < 4; ++k) {
            rsum += trace.reset(t, k);
            zsum += trace.update(t, k);
        }
        CHECK(reset_avg(t) == doctest::Approx(rsum / 4.0).epsilon(1e-12));
        CHECK(update_avg(t) == doctest::Approx(zsum / 4.0).epsilon(1e-12));
        CHECK(reset_avg(t) > 0.0);
        CHECK(reset_avg(t) < 1.0);
    }
}

TEST_CASE("gate averages with one hidden unit are the gate values") {
    Rng rng(2);
    GateTrace<double> trace = random_trace(rng, 5, 1);
    auto [reset_avg, update_avg] = gate_averages(trace);
    for (Index t = 0; t < 5; ++t) {
        CHECK(reset_avg(t) == trace.reset(t, 0));
        CHECK(update_avg(t) == trace.update(t, 0));
    }
}

TEST_CASE("gate averaging commutes with trace averaging") {
    Rng rng(3);
    GateTrace<double> a = random_trace(rng, 4, 6);
    GateTrace<double> b = random_trace(rng, 4, 6);
    GateTrace<double> mixed = a;
    mixed.update = 0.5 * (a.update + b.update);
    mixed.reset = 0.5 * (a.reset + b.reset);
    auto [mr, mz] = gate_averages(mixed);
    auto [ar, az] = gate_averages(a);
    auto [br, bz] = gate_averages(b);
    CHECK((mr - 0.5 * (ar + br)).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((mz - 0.5 * (az + bz)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("zero-parameter model yields constant 0.5 heatmaps of the right shape") {
    Dims dims;
    dims.d_w = 4;
    dims.d_h = 5;
    dims.d_a = 5;
    dims.d_r = 5;
    dims.v_src = dims.v_tgt = 10;
    auto model = make_model<float>(dims, {Mechanism::Contexter, ContextPooling::LastState});
    auto src_vocab = Vocabulary::from_tokens({"s1", "s2", "s3", "s4", "s5", "s6"});
    auto tgt_vocab = Vocabulary::from_tokens({"t1", "t2", "t3", "t4", "t5", "t6"});
    SentencePair pair;
    pair.source = {4, 5, 6, 7};
    pair.target = {4, 5};

    auto [update, reset] = collect_heatmaps(model, pair, src_vocab, tgt_vocab);
    CHECK(update.values.rows() == 3);  // target length including EOS
    CHECK(update.values.cols() == 4);
    CHECK((update.values.array() == 0.5).all());
    CHECK((reset.values.array() == 0.5).all());
    REQUIRE(update.row_labels.size() == 3);
    CHECK(update.row_labels[2] == "<eos>");
    CHECK(update.col_labels == std::vector<std::string>{"s1", "s2", "s3", "s4"});

    auto attn = make_model<float>(dims, {Mechanism::Attention, ContextPooling::LastState});
    CHECK_THROWS_AS(collect_heatmaps(attn, pair, src_vocab, tgt_vocab), InvalidArgument);
}

TEST_CASE("random-model heatmaps stay strictly inside (0,1)") {
    Dims dims;
    dims.d_w = 4;
    dims.d_h = 6;
    dims.d_a = 6;
    dims.d_r = 6;
    dims.v_src = dims.v_tgt = 12;
    auto dmodel = random_check_model(dims, {Mechanism::Contexter, ContextPooling::MeanPooling},
                                     5, 0.5);
    auto model = cast_model<float>(dmodel);
    auto vocab = Vocabulary::from_tokens({"a", "b", "c", "d", "e", "f", "g", "h"});
    SentencePair pair;
    pair.source = {4, 8, 6, 5, 9};
    pair.target = {7, 4, 10};
    auto [update, reset] = collect_heatmaps(model, pair, vocab, vocab);
    CHECK((update.values.array() > 0.0).all());
    CHECK((update.values.array() < 1.0).all());
    CHECK((reset.values.array() > 0.0).all());
    CHECK((reset.values.array() < 1.0).all());

    CHECK(heatmap_correlation(update, update) == doctest::Approx(1.0).epsilon(1e-12));
    const double c = heatmap_correlation(reset, update);
    CHECK(c >= -1.0);
    CHECK(c <= 1.0);
}

TEST_CASE("PGM export quantizes with round-half-up") {
    TempDir tmp;
    GateHeatmap hm;
    hm.values = Mat<double>::Constant(2, 3, 0.5);
    hm.row_labels = {"r1", "r2"};
    hm.col_labels = {"c1", "c2", "c3"};
    export_heatmap(hm, tmp.file("flat.pgm"), HeatmapFormat::Pgm);

    std::ifstream in(tmp.file("flat.pgm"));
    std::string magic;
    int w, h, depth;
    in >> magic >> w >> h >> depth;
    CHECK(magic == "P2");
    CHECK(w == 3);
    CHECK(h == 2);
    CHECK(depth == 255);
    for (int i = 0; i < 6; ++i) {
        int px;
        in >> px;
        CHECK(px == 128);  // 0.5 * 255 = 127.5 rounds up
    }

    GateHeatmap tiny;
    tiny.values = Mat<double>::Constant(1, 1, 1.0);
    tiny.row_labels = {"r"};
    tiny.col_labels = {"c"};
    export_heatmap(tiny, tmp.file("tiny.pgm"), HeatmapFormat::Pgm);
    std::ifstream tin(tmp.file("tiny.pgm"));
    int px;
    tin >> magic >> w >> h >> depth >> px;
    CHECK(w == 1);
    CHECK(h == 1);
    CHECK(px == 255);
}

TEST_CASE("PGM round-trips within one quantization level") {
    TempDir tmp;
    Rng rng(4);
    GateHeatmap hm;
    hm.values.resize(4, 5);
    for (Index r = 0; r < 4; ++r) {
        for (Index c = 0; c < 5; ++c) hm.values(r, c) = rng.uniform(0.0, 1.0);
    }
    hm.row_labels = {"a", "b", "c", "d"};
    hm.col_labels = {"1", "2", "3", "4", "5"};
    export_heatmap(hm, tmp.file("rt.pgm"), HeatmapFormat::Pgm);
    std::ifstream in(tmp.file("rt.pgm"));
    std::string magic;
    int w, h, depth;
    in >> magic >> w >> h >> depth;
    REQUIRE(w == 5);
    REQUIRE(h == 4);
    for (Index r = 0; r < 4; ++r) {
        for (Index c = 0; c < 5; ++c) {
            int px;
            in >> px;
            CHECK(std::abs(hm.values(r, c) - px / 255.0) <= 1.0 / 255.0);
        }
    }
}

TEST_CASE("CSV export round-trips values and labels") {
    TempDir tmp;
    Rng rng(9);
    GateHeatmap hm;
    hm.values.resize(3, 2);
    for (Index r = 0; r < 3; ++r) {
        for (Index c = 0; c < 2; ++c) hm.values(r, c) = rng.uniform(0.001, 0.999);
    }
    hm.row_labels = {"der", "hund", "<eos>"};
    hm.col_labels = {"the", "dog"};
    export_heatmap(hm, tmp.file("hm.csv"), HeatmapFormat::Csv);
    GateHeatmap back = parse_heatmap_csv(tmp.file("hm.csv"));
    CHECK(back.row_labels == hm.row_labels);
    CHECK(back.col_labels == hm.col_labels);
    REQUIRE(back.values.rows() == 3);
    REQUIRE(back.values.cols() == 2);
    CHECK((back.values - hm.values).cwiseAbs().maxCoeff() < 1e-6);
}
