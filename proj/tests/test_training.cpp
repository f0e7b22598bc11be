#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "rnmt/adadelta.hpp"
#include "rnmt/checkpoint.hpp"
#include "rnmt/gradcheck.hpp"
#include "rnmt/loss.hpp"
#include "rnmt/trainer.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <unistd.h>

using namespace rnmt;

namespace {

struct TempDir {
    std::filesystem::path path;
    TempDir() {
        path = std::filesystem::temp_directory_path() /
               ("rnmt_training_test_" + std::to_string(::getpid()));
        std::filesystem::create_directories(path);
    }
    ~TempDir() { std::filesystem::remove_all(path); }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

Dims tiny_dims(int vocab = 20) {
    Dims dims;
    dims.d_w = 8;
    dims.d_h = 12;
    dims.d_a = 12;
    dims.d_r = 12;
    dims.v_src = vocab;
    dims.v_tgt = vocab;
    return dims;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

}  // namespace

TEST_CASE("zero-parameter loss is exactly steps * log(V)") {
    Dims dims = tiny_dims(20);
    auto model = make_model<double>(dims, {Mechanism::Contexter, ContextPooling::LastState});
    SentencePair pair;
    pair.source = {4, 5, 6};
    pair.target = {7, 8, 9};  // 3 tokens + EOS = 4 steps
    const double loss = nll_loss(model, pair);
    CHECK(loss == 4.0 * std::log(20.0));
    CHECK(loss >= 0.0);

    pair.target = {7};  // 2 steps
    CHECK(nll_loss(model, pair) == 2.0 * std::log(20.0));

    auto attn = make_model<double>(dims, {Mechanism::Attention, ContextPooling::LastState});
    pair.target = {7, 8, 9};
    CHECK(nll_loss(attn, pair) == 4.0 * std::log(20.0));
}

TEST_CASE("loss composes the per-step public operations") {
    Dims dims = tiny_dims(15);
    for (Mechanism mech : {Mechanism::Attention, Mechanism::Contexter}) {
        ContextMode mode{mech, ContextPooling::MeanPooling};
        auto model = random_check_model(dims, mode, 77, 0.4);
        SentencePair pair;
        pair.source = {4, 9, 6, 12};
        pair.target = {5, 11, 7};

        Mat<double> annotations = encode(model.encoder, pair.source);
        DecoderState<double> state = init_decoder_state(model.decoder, annotations);
        TokenIds inputs{Vocabulary::kBos, 5, 11, 7};
        TokenIds targets{5, 11, 7, Vocabulary::kEos};
        double expected = 0.0;
        for (std::size_t j = 0; j < targets.size(); ++j) {
            ContextOutput<double> ctx =
                mech == Mechanism::Attention
                    ? attention_context(model.attention, state.s, annotations)
                    : contexter_context(model.contexter, state.s, annotations, mode);
            state = decoder_step(model.decoder, state, inputs[j], ctx.context);
            Vec<double> logp =
                output_distribution(model.decoder, inputs[j], state, ctx.context);
            expected -= logp(targets[j]);
        }
        CHECK(nll_loss(model, pair) == doctest::Approx(expected).epsilon(1e-12));
    }
}

TEST_CASE("full-model gradient check passes for all four configurations") {
    Dims dims = tiny_dims(20);
    auto run = [&](Mechanism mech, ContextPooling pooling, int src_len) {
        auto report = full_model_grad_check(dims, {mech, pooling}, src_len, 5,
                                            /*seed=*/4, 1e-5, 1e-4);
        INFO("mechanism " << mechanism_name(mech) << " pooling " << pooling_name(pooling)
                          << " src_len " << src_len << " max rel "
                          << report.max_rel_err());
        CHECK(report.pass);
    };
    run(Mechanism::Attention, ContextPooling::LastState, 5);
    run(Mechanism::Contexter, ContextPooling::MeanPooling, 5);
    run(Mechanism::Contexter, ContextPooling::LastState, 5);
    run(Mechanism::Contexter, ContextPooling::LastState, 1);
}

TEST_CASE("a duplicated pair in a batch of two gives the batch-of-one gradients") {
    Dims dims = tiny_dims(12);
    ContextMode mode{Mechanism::Contexter, ContextPooling::LastState};
    auto model = random_check_model(dims, mode, 5, 0.3);
    SentencePair pair;
    pair.source = {4, 5, 6, 7};
    pair.target = {8, 9};

    ModelParams<double> g1 = zeros_like(model);
    backward_batch(model, {pair}, g1);
    ModelParams<double> g2 = zeros_like(model);
    backward_batch(model, {pair, pair}, g2);

    auto v1 = tensor_views(g1);
    auto v2 = tensor_views(g2);
    double worst = 0.0;
    bool any_nonzero = false;
    for (std::size_t t = 0; t < v1.size(); ++t) {
        for (Index k = 0; k < v1[t].size(); ++k) {
            worst = std::max(worst, std::abs(v1[t].data[k] - v2[t].data[k]));
            if (v1[t].data[k] != 0.0) any_nonzero = true;
        }
    }
    CHECK(worst == 0.0);
    CHECK(any_nonzero);

    CHECK_THROWS_AS(backward_batch(model, {}, g1), InvalidArgument);
}

TEST_CASE("adadelta: zero gradient leaves parameters unchanged, accumulators decay") {
    Dims dims = tiny_dims(8);
    ContextMode mode{Mechanism::Contexter, ContextPooling::LastState};
    auto model = make_model<float>(dims, mode);
    init_params(model, 3);
    auto state = make_adadelta_state(model);
    // seed the accumulators with one nonzero update
    ModelParams<float> grad = zeros_like(model);
    tensor_views(grad)[0].data[0] = 0.5f;
    adadelta_update(model, grad, state, 0.95, 1e-6);
    const float accum_before = tensor_views(state.grad_sq)[0].data[0];
    CHECK(accum_before > 0.0f);

    auto params_before = tensor_views(model);
    std::vector<float> saved;
    for (auto& v : params_before) {
        for (Index k = 0; k < v.size(); ++k) saved.push_back(v.data[k]);
    }
    ModelParams<float> zero_grad = zeros_like(model);
    adadelta_update(model, zero_grad, state, 0.95, 1e-6);
    std::size_t idx = 0;
    for (auto& v : tensor_views(model)) {
        for (Index k = 0; k < v.size(); ++k) CHECK(v.data[k] == saved[idx++]);
    }
    CHECK(tensor_views(state.grad_sq)[0].data[0] ==
          doctest::Approx(0.95f * accum_before).epsilon(1e-6));
}

TEST_CASE("adadelta first step follows the closed form") {
    Dims dims = tiny_dims(8);
    ContextMode mode{Mechanism::Contexter, ContextPooling::LastState};
    auto model = make_model<double>(dims, mode);
    auto state = make_adadelta_state(model);
    ModelParams<double> grad = zeros_like(model);
    const double g = 0.37;
    tensor_views(grad)[1].data[5] = g;

    const double rho = 0.95, eps = 1e-6;
    adadelta_update(model, grad, state, rho, eps);
    const double expected = -std::sqrt(eps) / std::sqrt((1.0 - rho) * g * g + eps) * g;
    CHECK(tensor_views(model)[1].data[5] == doctest::Approx(expected).epsilon(1e-12));
    // untouched parameters stay at zero
    CHECK(tensor_views(model)[1].data[6] == 0.0);
}

TEST_CASE("global norm clipping scales exactly to the cap") {
    Dims dims = tiny_dims(8);
    ContextMode mode{Mechanism::Contexter, ContextPooling::LastState};
    ModelParams<double> grad = zeros_like(make_model<double>(dims, mode));
    tensor_views(grad)[0].data[0] = 6.0;
    tensor_views(grad)[0].data[1] = 8.0;  // norm 10
    const double factor = clip_global_norm(grad, 1.0);
    CHECK(factor == doctest::Approx(0.1).epsilon(1e-12));
    CHECK(tensor_views(grad)[0].data[0] == doctest::Approx(0.6).epsilon(1e-12));
    CHECK(global_norm(tensor_views(grad)) == doctest::Approx(1.0).epsilon(1e-12));

    // below the cap: untouched
    ModelParams<double> small = zeros_like(grad);
    tensor_views(small)[0].data[0] = 0.5;
    CHECK(clip_global_norm(small, 1.0) == 1.0);
    CHECK(tensor_views(small)[0].data[0] == 0.5);
}

TEST_CASE("loss decreases strictly over the first 20 updates on a frozen batch") {
    SyntheticTaskSpec spec;
    spec.task = SyntheticTask::Copy;
    spec.alphabet_size = 12;
    spec.min_len = 2;
    spec.max_len = 6;
    spec.sample_count = 8;

    for (Mechanism mech : {Mechanism::Attention, Mechanism::Contexter}) {
        for (std::uint64_t seed : {0ULL, 1ULL, 2ULL}) {
            spec.seed = seed;
            Corpus corpus = gen_synthetic(spec);
            Dims dims;
            dims.d_w = 32;
            dims.d_h = 64;
            dims.d_a = 64;
            dims.d_r = 64;
            dims.v_src = corpus.source_vocab.size();
            dims.v_tgt = corpus.target_vocab.size();
            ContextMode mode{mech, ContextPooling::LastState};
            auto model = make_model<float>(dims, mode);
            init_params(model, seed);
            auto state = make_adadelta_state(model);

            double prev = std::numeric_limits<double>::infinity();
            for (int update = 0; update < 20; ++update) {
                ModelParams<float> grad = zeros_like(model);
                const double loss = backward_batch(model, corpus.pairs, grad);
                INFO("mechanism " << mechanism_name(mech) << " seed " << seed
                                  << " update " << update);
                CHECK(loss < prev);
                prev = loss;
                clip_global_norm(grad, 1.0);
                adadelta_update(model, grad, state, 0.95, 1e-6);
            }
        }
    }
}

TEST_CASE("initialization is uniform in [-0.08, 0.08] with zero biases") {
    Dims dims = tiny_dims(30);
    for (Mechanism mech : {Mechanism::Attention, Mechanism::Contexter}) {
        auto model = make_model<float>(dims, {mech, ContextPooling::LastState});
        init_params(model, 123);
        for (const auto& v : tensor_views(model)) {
            const std::string leaf = v.name.substr(v.name.rfind('.') + 1);
            const bool is_bias = !leaf.empty() && leaf[0] == 'b';
            float lo = 0.0f, hi = 0.0f;
            bool all_zero = true;
            for (Index k = 0; k < v.size(); ++k) {
                lo = std::min(lo, v.data[k]);
                hi = std::max(hi, v.data[k]);
                if (v.data[k] != 0.0f) all_zero = false;
            }
            INFO("tensor " << v.name);
            if (is_bias) {
                CHECK(all_zero);
            } else {
                CHECK(lo >= -0.08f);
                CHECK(hi <= 0.08f);
                CHECK_FALSE(all_zero);
            }
        }
        // deterministic
        auto again = make_model<float>(dims, {mech, ContextPooling::LastState});
        init_params(again, 123);
        auto va = tensor_views(model);
        auto vb = tensor_views(again);
        for (std::size_t t = 0; t < va.size(); ++t) {
            for (Index k = 0; k < va[t].size(); ++k) {
                CHECK(va[t].data[k] == vb[t].data[k]);
            }
        }
    }
}

TEST_CASE("checkpoint save/load round-trips bit-exactly") {
    TempDir tmp;
    Dims dims = tiny_dims(9);
    for (bool with_optimizer : {false, true}) {
        Checkpoint ckpt;
        ckpt.model = make_model<float>(dims, {Mechanism::Contexter, ContextPooling::MeanPooling});
        init_params(ckpt.model, 9);
        ckpt.source_vocab = Vocabulary::from_tokens({"ein", "zwei", "drei", "vier", "f\xc3\xbcnf"});
        ckpt.target_vocab = Vocabulary::from_tokens({"one", "two", "three", "four", "five"});
        ckpt.best_score = 12.345678901234567;
        if (with_optimizer) {
            auto state = make_adadelta_state(ckpt.model);
            tensor_views(state.grad_sq)[2].data[3] = 0.25f;
            ckpt.optimizer = std::move(state);
        }

        const std::string path = tmp.file(with_optimizer ? "opt.ckpt" : "plain.ckpt");
        save_checkpoint(ckpt, path);
        Checkpoint loaded = load_checkpoint(path);

        CHECK(loaded.model.mode.mechanism == Mechanism::Contexter);
        CHECK(loaded.model.mode.output == ContextPooling::MeanPooling);
        CHECK(loaded.best_score == ckpt.best_score);
        CHECK(loaded.source_vocab.corpus_tokens() == ckpt.source_vocab.corpus_tokens());
        CHECK(loaded.target_vocab.corpus_tokens() == ckpt.target_vocab.corpus_tokens());
        CHECK(loaded.optimizer.has_value() == with_optimizer);

        auto va = tensor_views(ckpt.model);
        auto vb = tensor_views(loaded.model);
        REQUIRE(va.size() == vb.size());
        for (std::size_t t = 0; t < va.size(); ++t) {
            for (Index k = 0; k < va[t].size(); ++k) {
                CHECK(va[t].data[k] == vb[t].data[k]);
            }
        }
        if (with_optimizer) {
            CHECK(tensor_views(loaded.optimizer->grad_sq)[2].data[3] == 0.25f);
        }

        // saving the loaded checkpoint reproduces the file byte for byte
        const std::string path2 = tmp.file("again.ckpt");
        save_checkpoint(loaded, path2);
        CHECK(read_file(path) == read_file(path2));
    }
}

TEST_CASE("corrupted checkpoints are rejected") {
    TempDir tmp;
    Dims dims = tiny_dims(9);
    Checkpoint ckpt;
    ckpt.model = make_model<float>(dims, {Mechanism::Contexter, ContextPooling::LastState});
    init_params(ckpt.model, 1);
    ckpt.source_vocab = Vocabulary::from_tokens({"a", "b", "c", "d", "e"});
    ckpt.target_vocab = ckpt.source_vocab;
    const std::string path = tmp.file("model.ckpt");
    save_checkpoint(ckpt, path);

    std::string bytes = read_file(path);

    {  // truncation
        std::ofstream out(tmp.file("short.ckpt"), std::ios::binary);
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size() / 2));
    }
    CHECK_THROWS_AS(load_checkpoint(tmp.file("short.ckpt")), FormatError);

    {  // wrong magic
        std::string bad = bytes;
        bad[0] = 'X';
        std::ofstream out(tmp.file("magic.ckpt"), std::ios::binary);
        out.write(bad.data(), static_cast<std::streamsize>(bad.size()));
    }
    CHECK_THROWS_AS(load_checkpoint(tmp.file("magic.ckpt")), FormatError);

    {  // unsupported version
        std::string bad = bytes;
        const std::string needle = "format_version=1";
        bad.replace(bad.find(needle), needle.size(), "format_version=9");
        std::ofstream out(tmp.file("version.ckpt"), std::ios::binary);
        out.write(bad.data(), static_cast<std::streamsize>(bad.size()));
    }
    CHECK_THROWS_AS(load_checkpoint(tmp.file("version.ckpt")), FormatError);

    {  // trailing garbage
        std::string bad = bytes + "zz";
        std::ofstream out(tmp.file("trailing.ckpt"), std::ios::binary);
        out.write(bad.data(), static_cast<std::streamsize>(bad.size()));
    }
    CHECK_THROWS_AS(load_checkpoint(tmp.file("trailing.ckpt")), FormatError);

    CHECK_THROWS_AS(load_checkpoint(tmp.file("missing.ckpt")), IoError);
}

TEST_CASE("a non-finite loss is a numeric error naming the pair") {
    Dims dims = tiny_dims(10);
    ContextMode mode{Mechanism::Contexter, ContextPooling::LastState};
    auto model = random_check_model(dims, mode, 1, 0.3);
    model.decoder.readout.bout(0) = std::numeric_limits<double>::quiet_NaN();
    SentencePair pair;
    pair.source = {4, 5};
    pair.target = {6};
    ModelParams<double> grad = zeros_like(model);
    try {
        backward_batch(model, {pair, pair}, grad);
        CHECK(false);
    } catch (const NumericError& e) {
        CHECK(std::string(e.what()).find("pair 0") != std::string::npos);
    }
}

TEST_CASE("training memorizes a single pair") {
    SyntheticTaskSpec spec;
    spec.task = SyntheticTask::Copy;
    spec.alphabet_size = 10;
    spec.min_len = 5;
    spec.max_len = 5;
    spec.sample_count = 1;
    spec.seed = 2;
    Corpus corpus = gen_synthetic(spec);

    TrainConfig config;
    config.batch_size = 1;
    config.max_epochs = 200;  // one pair -> one update per epoch
    config.validate_every = 200;
    config.seed = 0;
    config.dims.d_w = 32;
    config.dims.d_h = 64;
    config.dims.d_a = 64;
    config.dims.d_r = 64;

    ContextMode mode{Mechanism::Contexter, ContextPooling::LastState};
    Dims dims = config.dims;
    dims.v_src = corpus.source_vocab.size();
    dims.v_tgt = corpus.target_vocab.size();
    auto initial = make_model<float>(dims, mode);
    init_params(initial, config.seed, config.init_scale);
    const double initial_loss = nll_loss(initial, corpus.pairs[0]);

    Checkpoint ckpt = train(config, corpus, corpus, mode);
    const double final_loss = nll_loss(ckpt.model, corpus.pairs[0]);
    CHECK(final_loss < 0.01 * initial_loss);
}

TEST_CASE("training is deterministic and rejects empty corpora") {
    SyntheticTaskSpec spec;
    spec.task = SyntheticTask::Copy;
    spec.alphabet_size = 8;
    spec.min_len = 2;
    spec.max_len = 5;
    spec.sample_count = 12;
    spec.seed = 7;
    Corpus corpus = gen_synthetic(spec);

    TrainConfig config;
    config.batch_size = 4;
    config.max_epochs = 2;
    config.seed = 5;
    config.dims.d_w = 8;
    config.dims.d_h = 12;
    config.dims.d_a = 12;
    config.dims.d_r = 12;

    TempDir tmp;
    ContextMode mode{Mechanism::Contexter, ContextPooling::LastState};
    Checkpoint a = train(config, corpus, corpus, mode);
    save_checkpoint(a, tmp.file("a.ckpt"));
    Checkpoint b = train(config, corpus, corpus, mode);
    save_checkpoint(b, tmp.file("b.ckpt"));
    CHECK(read_file(tmp.file("a.ckpt")) == read_file(tmp.file("b.ckpt")));

    Corpus empty;
    CHECK_THROWS_AS(train(config, empty, corpus, mode), InvalidArgument);
    CHECK_THROWS_AS(train(config, corpus, empty, mode), InvalidArgument);
}
