#include "rnmt/trainer.hpp"

#include "rnmt/adadelta.hpp"
#include "rnmt/beam.hpp"
#include "rnmt/bleu.hpp"
#include "rnmt/loss.hpp"

#include <cstdio>
#include <numeric>

namespace rnmt {

std::vector<std::string> reference_lines(const Corpus& corpus) {
    std::vector<std::string> lines;
    lines.reserve(corpus.size());
    for (const auto& pair : corpus.pairs) {
        lines.push_back(join_tokens(corpus.target_vocab.decode(pair.target)));
    }
    return lines;
}

Checkpoint train(const TrainConfig& config, const Corpus& train_corpus,
                 const Corpus& dev_corpus, const ContextMode& mode) {
    if (train_corpus.empty()) throw InvalidArgument("train: empty training corpus");
    if (dev_corpus.empty()) throw InvalidArgument("train: empty development corpus");
    if (config.batch_size < 1) throw InvalidArgument("train: batch size must be >= 1");
    if (config.max_epochs < 1) throw InvalidArgument("train: max_epochs must be >= 1");

    Corpus filtered = filter_max_len(train_corpus, config.max_len);
    if (filtered.empty()) {
        throw InvalidArgument("train: no pairs shorter than the length limit");
    }

    Dims dims = config.dims;
    dims.v_src = train_corpus.source_vocab.size();
    dims.v_tgt = train_corpus.target_vocab.size();

    ModelParams<float> model = make_model<float>(dims, mode);
    init_params(model, config.seed, config.init_scale);
    AdadeltaState<float> opt = make_adadelta_state(model);

    const auto dev_refs = reference_lines(dev_corpus);

    ModelParams<float> best_model = model;
    double best_bleu = -1.0;
    auto validate = [&](int epoch) {
        auto hyps = translate_corpus(model, dev_corpus, /*beam_width=*/1);
        const double bleu = bleu4(hyps, dev_refs).bleu;
        const bool improved = bleu > best_bleu;
        if (improved) {
            best_bleu = bleu;
            best_model = model;
        }
        if (config.verbose) {
            std::printf("epoch %d dev-bleu %.2f%s\n", epoch, bleu, improved ? " *" : "");
            std::fflush(stdout);
        }
    };

    Rng shuffle_rng(config.seed);
    std::vector<std::size_t> order(filtered.size());
    std::iota(order.begin(), order.end(), std::size_t{0});

    ModelParams<float> grad = zeros_like(model);
    for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
        shuffle_rng.shuffle(order);
        double epoch_loss = 0.0;
        std::size_t batches = 0;
        for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
            const std::size_t end =
                std::min(order.size(), start + static_cast<std::size_t>(config.batch_size));
            std::vector<SentencePair> batch;
            batch.reserve(end - start);
            for (std::size_t i = start; i < end; ++i) {
                batch.push_back(filtered.pairs[order[i]]);
            }
            grad = zeros_like(model);
            epoch_loss += backward_batch(model, batch, grad);
            ++batches;
            clip_global_norm(grad, config.clip_norm);
            adadelta_update(model, grad, opt, config.rho, config.epsilon);
        }
        if (config.verbose) {
            std::printf("epoch %d mean-batch-loss %.4f\n", epoch,
                        epoch_loss / static_cast<double>(batches));
            std::fflush(stdout);
        }
        if (epoch % config.validate_every == 0 || epoch == config.max_epochs) {
            validate(epoch);
        }
    }

    Checkpoint ckpt;
    ckpt.model = std::move(best_model);
    ckpt.source_vocab = train_corpus.source_vocab;
    ckpt.target_vocab = train_corpus.target_vocab;
    ckpt.best_score = best_bleu;
    if (config.keep_optimizer) ckpt.optimizer = std::move(opt);
    return ckpt;
}

}  // namespace rnmt
