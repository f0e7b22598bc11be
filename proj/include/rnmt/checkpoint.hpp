#pragma once

#include "rnmt/adadelta.hpp"
#include "rnmt/model.hpp"
#include "rnmt/vocab.hpp"

#include <optional>
#include <string>

namespace rnmt {

/// Trained model plus everything needed to use or resume it. Stored in a
/// bit-exact binary format:
///   - ASCII magic "RNMT1\n"
///   - UTF-8 header of key=value lines (dimensions, mechanism, tensor
///     manifest as name:rows:cols entries, vocabulary section lengths)
///     terminated by a blank line
///   - both vocabularies, one non-reserved token per line
///   - tensor data in manifest order, row-major little-endian float32
struct Checkpoint {
    int format_version = 1;
    ModelParams<float> model;
    Vocabulary source_vocab;
    Vocabulary target_vocab;
    std::optional<AdadeltaState<float>> optimizer;
    double best_score = 0.0;  // best development BLEU seen while training
};

void save_checkpoint(const Checkpoint& ckpt, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace rnmt
