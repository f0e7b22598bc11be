#include "rnmt/corpus.hpp"

#include <algorithm>
#include <sstream>

namespace rnmt {

SyntheticTask parse_task(const std::string& name) {
    if (name == "copy") return SyntheticTask::Copy;
    if (name == "reverse") return SyntheticTask::Reverse;
    if (name == "sort-digits") return SyntheticTask::SortDigits;
    if (name == "long-agreement") return SyntheticTask::LongAgreement;
    throw InvalidArgument("unknown synthetic task: " + name);
}

std::string task_name(SyntheticTask task) {
    switch (task) {
        case SyntheticTask::Copy: return "copy";
        case SyntheticTask::Reverse: return "reverse";
        case SyntheticTask::SortDigits: return "sort-digits";
        case SyntheticTask::LongAgreement: return "long-agreement";
    }
    return "?";
}

Corpus load_corpus(const std::string& source_path, const std::string& target_path,
                   const Vocabulary& source_vocab, const Vocabulary& target_vocab) {
    auto src_lines = read_lines(source_path);
    auto tgt_lines = read_lines(target_path);
    if (src_lines.size() != tgt_lines.size()) {
        std::ostringstream oss;
        oss << "corpus files not aligned: " << source_path << " has "
            << src_lines.size() << " lines, " << target_path << " has "
            << tgt_lines.size();
        throw InvalidArgument(oss.str());
    }
    Corpus corpus;
    corpus.source_vocab = source_vocab;
    corpus.target_vocab = target_vocab;
    for (std::size_t i = 0; i < src_lines.size(); ++i) {
        SentencePair pair;
        pair.source = source_vocab.encode(split_tokens(src_lines[i]));
        pair.target = target_vocab.encode(split_tokens(tgt_lines[i]));
        if (pair.source.empty() || pair.target.empty()) {
            throw InvalidArgument("empty sentence at line " + std::to_string(i + 1));
        }
        corpus.pairs.push_back(std::move(pair));
    }
    return corpus;
}

namespace {

std::vector<std::string> symbol_table(int alphabet_size) {
    std::vector<std::string> symbols;
    symbols.reserve(static_cast<std::size_t>(alphabet_size));
    for (int i = 0; i < alphabet_size; ++i) symbols.push_back(std::to_string(i));
    return symbols;
}

}  // namespace

Corpus gen_synthetic(const SyntheticTaskSpec& spec) {
    if (spec.alphabet_size < 2) throw InvalidArgument("alphabet size must be >= 2");
    if (spec.min_len < 1 || spec.max_len < spec.min_len) {
        throw InvalidArgument("invalid length range");
    }

    auto symbols = symbol_table(spec.alphabet_size);
    Vocabulary vocab = Vocabulary::from_tokens(symbols);

    Corpus corpus;
    corpus.source_vocab = vocab;
    corpus.target_vocab = vocab;

    Rng rng(spec.seed);
    const int span = spec.max_len - spec.min_len + 1;
    for (int k = 0; k < spec.sample_count; ++k) {
        const int len = spec.min_len + static_cast<int>(rng.below(static_cast<std::size_t>(span)));
        TokenIds body(static_cast<std::size_t>(len));
        for (auto& id : body) {
            id = Vocabulary::kNumReserved +
                 static_cast<TokenId>(rng.below(static_cast<std::size_t>(spec.alphabet_size)));
        }

        SentencePair pair;
        switch (spec.task) {
            case SyntheticTask::Copy:
                pair.source = body;
                pair.target = body;
                break;
            case SyntheticTask::Reverse:
                pair.source = body;
                pair.target = TokenIds(body.rbegin(), body.rend());
                break;
            case SyntheticTask::SortDigits:
                pair.source = body;
                pair.target = body;
                std::sort(pair.target.begin(), pair.target.end());
                break;
            case SyntheticTask::LongAgreement: {
                // body is the filler run; the leading marker must be recalled
                // as the final target token after the whole run.
                TokenId marker =
                    Vocabulary::kNumReserved +
                    static_cast<TokenId>(rng.below(static_cast<std::size_t>(spec.alphabet_size)));
                pair.source.push_back(marker);
                pair.source.insert(pair.source.end(), body.begin(), body.end());
                pair.target = body;
                pair.target.push_back(marker);
                break;
            }
        }
        corpus.pairs.push_back(std::move(pair));
    }
    return corpus;
}

void save_corpus_text(const Corpus& corpus, const std::string& source_path,
                      const std::string& target_path) {
    std::vector<std::string> src_lines, tgt_lines;
    src_lines.reserve(corpus.size());
    tgt_lines.reserve(corpus.size());
    for (const auto& pair : corpus.pairs) {
        src_lines.push_back(join_tokens(corpus.source_vocab.decode(pair.source)));
        tgt_lines.push_back(join_tokens(corpus.target_vocab.decode(pair.target)));
    }
    write_lines(source_path, src_lines);
    write_lines(target_path, tgt_lines);
}

Corpus concat_pairs(const Corpus& corpus) {
    Corpus out;
    out.source_vocab = corpus.source_vocab;
    out.target_vocab = corpus.target_vocab;
    const auto& pairs = corpus.pairs;
    for (std::size_t i = 0; i + 1 < pairs.size(); i += 2) {
        SentencePair merged = pairs[i];
        merged.source.insert(merged.source.end(), pairs[i + 1].source.begin(),
                             pairs[i + 1].source.end());
        merged.target.insert(merged.target.end(), pairs[i + 1].target.begin(),
                             pairs[i + 1].target.end());
        out.pairs.push_back(std::move(merged));
    }
    if (pairs.size() % 2 == 1) out.pairs.push_back(pairs.back());
    return out;
}

std::vector<std::string> concat_lines(const std::vector<std::string>& lines) {
    std::vector<std::string> out;
    for (std::size_t i = 0; i + 1 < lines.size(); i += 2) {
        out.push_back(lines[i] + " " + lines[i + 1]);
    }
    if (lines.size() % 2 == 1) out.push_back(lines.back());
    return out;
}

LengthBuckets bucket_by_length(const Corpus& corpus, const std::vector<int>& boundaries) {
    for (std::size_t i = 1; i < boundaries.size(); ++i) {
        if (boundaries[i] <= boundaries[i - 1]) {
            throw InvalidArgument("bucket boundaries must be strictly ascending");
        }
    }
    LengthBuckets result;
    result.boundaries = boundaries;
    result.buckets.assign(boundaries.size() + 1, {});
    for (const auto& pair : corpus.pairs) {
        const int len = static_cast<int>(pair.source.size());
        std::size_t b = 0;
        while (b < boundaries.size() && len > boundaries[b]) ++b;
        result.buckets[b].push_back(pair);
    }
    return result;
}

Corpus filter_max_len(const Corpus& corpus, int max_len) {
    if (max_len < 1) throw InvalidArgument("max_len must be >= 1");
    Corpus out;
    out.source_vocab = corpus.source_vocab;
    out.target_vocab = corpus.target_vocab;
    for (const auto& pair : corpus.pairs) {
        if (pair.source.size() <= static_cast<std::size_t>(max_len) &&
            pair.target.size() <= static_cast<std::size_t>(max_len)) {
            out.pairs.push_back(pair);
        }
    }
    return out;
}

}  // namespace rnmt
