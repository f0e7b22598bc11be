#pragma once

#include "rnmt/checkpoint.hpp"
#include "rnmt/corpus.hpp"
#include "rnmt/model.hpp"

namespace rnmt {

struct TrainConfig {
    int batch_size = 80;
    int max_len = 50;  // training pairs longer than this on either side are dropped
    int max_epochs = 10;
    std::uint64_t seed = 0;
    double rho = 0.95;        // Adadelta decay
    double epsilon = 1e-6;    // Adadelta epsilon
    double clip_norm = 1.0;   // global gradient norm cap, <= 0 disables
    int validate_every = 1;   // epochs between dev validations
    double init_scale = 0.08;
    Dims dims;                // v_src / v_tgt are taken from the corpus vocabularies
    bool keep_optimizer = false;
    bool verbose = false;
};

/// Seeded-shuffled minibatch training with Adadelta; greedy-decode BLEU on
/// the development set at the configured cadence, best-BLEU parameters
/// retained. Deterministic for a fixed config.
Checkpoint train(const TrainConfig& config, const Corpus& train_corpus,
                 const Corpus& dev_corpus, const ContextMode& mode);

/// Reference lines of a corpus (targets rendered back to token text).
std::vector<std::string> reference_lines(const Corpus& corpus);

}  // namespace rnmt
