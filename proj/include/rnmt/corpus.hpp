#pragma once

#include "rnmt/types.hpp"
#include "rnmt/vocab.hpp"

#include <string>
#include <vector>

namespace rnmt {

/// Surface token ids only: no BOS on either side, no trailing EOS. The
/// modeled target sequence (loss, decoding) appends EOS internally.
struct SentencePair {
    TokenIds source;
    TokenIds target;
};

struct Corpus {
    std::vector<SentencePair> pairs;
    Vocabulary source_vocab;
    Vocabulary target_vocab;

    std::size_t size() const { return pairs.size(); }
    bool empty() const { return pairs.empty(); }
};

enum class SyntheticTask { Copy, Reverse, SortDigits, LongAgreement };

SyntheticTask parse_task(const std::string& name);
std::string task_name(SyntheticTask task);

struct SyntheticTaskSpec {
    SyntheticTask task = SyntheticTask::Copy;
    int alphabet_size = 20;
    int min_len = 2;
    int max_len = 10;
    int sample_count = 1000;
    std::uint64_t seed = 0;
};

struct LengthBuckets {
    std::vector<int> boundaries;  // ascending; a final unbounded bucket is implicit
    std::vector<std::vector<SentencePair>> buckets;  // boundaries.size() + 1 groups
};

/// Line-aligned source/target text files -> id corpus. Vocabularies are
/// built from the same files unless given.
Corpus load_corpus(const std::string& source_path, const std::string& target_path,
                   const Vocabulary& source_vocab, const Vocabulary& target_vocab);

/// Synthetic parallel data; bit-identical for a fixed spec.
/// Tokens are decimal symbol indices. Tasks:
///   copy           target = source
///   reverse        target = reversed source
///   sort-digits    target = source symbols sorted ascending
///   long-agreement source = marker + fillers, target = fillers + marker;
///                  the marker must survive min_len..max_len filler tokens.
Corpus gen_synthetic(const SyntheticTaskSpec& spec);

/// Writes a corpus back to text (one sentence per line, space separated).
void save_corpus_text(const Corpus& corpus, const std::string& source_path,
                      const std::string& target_path);

/// Table-style long-sentence construction: neighbors (2k, 2k+1) merged by
/// concatenation on both sides; an odd trailing pair is kept as is.
Corpus concat_pairs(const Corpus& corpus);
std::vector<std::string> concat_lines(const std::vector<std::string>& lines);

/// Routes each pair by source length to the first bucket whose boundary is
/// >= the length; lengths beyond the last boundary go to the final bucket.
LengthBuckets bucket_by_length(const Corpus& corpus, const std::vector<int>& boundaries);

/// Keeps pairs with both sides at most max_len tokens.
Corpus filter_max_len(const Corpus& corpus, int max_len);

}  // namespace rnmt
