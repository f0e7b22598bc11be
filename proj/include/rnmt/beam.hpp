#pragma once

#include "rnmt/corpus.hpp"
#include "rnmt/loss.hpp"
#include "rnmt/model.hpp"
#include "rnmt/vocab.hpp"

#include <algorithm>
#include <thread>
#include <vector>

namespace rnmt {

/// A partial or complete translation. `tokens` is the surface sequence:
/// BOS is never included and EOS is consumed by the finished flag.
template <typename S>
struct Hypothesis {
    TokenIds tokens;
    double log_prob = 0.0;
    bool finished = false;
    Vec<S> state;          // decoder state after the last step
    TokenId y_prev = Vocabulary::kBos;
    int emissions = 0;     // steps taken, EOS included when finished

    double score(bool length_normalize) const {
        if (!length_normalize) return log_prob;
        return log_prob / static_cast<double>(std::max(emissions, 1));
    }
};

/// Standard beam search over the full vocabulary. Hypotheses that emit EOS
/// retire; anything still active at max_len retires without the EOS term.
/// Expansion ranks by cumulative log probability; the final ranking divides
/// by emitted length when length_normalize is set.
template <typename S>
std::vector<Hypothesis<S>> beam_search(const ModelParams<S>& model, const TokenIds& source,
                                       int beam_width, int max_len,
                                       bool length_normalize = true) {
    if (beam_width < 1) throw InvalidArgument("beam_search: beam width must be >= 1");
    if (source.empty()) throw InvalidArgument("beam_search: empty source");
    if (max_len < 1) throw InvalidArgument("beam_search: max_len must be >= 1");

    EncoderTrace<S> enc;
    encode_traced(model.encoder, source, enc);
    ContextProjections<S> pre;
    pre.compute(model, enc.annotations);

    std::vector<Hypothesis<S>> active(1);
    active[0].state = init_decoder_state(model.decoder, enc.annotations).s;
    std::vector<Hypothesis<S>> finished;

    struct Candidate {
        std::size_t parent;
        TokenId token;
        double log_prob;
    };

    for (int step = 0; step < max_len && !active.empty(); ++step) {
        std::vector<Vec<S>> new_states(active.size());
        std::vector<Candidate> candidates;
        candidates.reserve(active.size() * static_cast<std::size_t>(model.dims.v_tgt));
        for (std::size_t a = 0; a < active.size(); ++a) {
            const Hypothesis<S>& hyp = active[a];
            ContextOutput<S> ctx = model_context(model, pre, hyp.state, enc.annotations);
            DecoderState<S> prev{hyp.state, hyp.emissions};
            DecoderStepCache<S> cache;
            DecoderState<S> next =
                decoder_step_traced(model.decoder, prev, hyp.y_prev, ctx.context, cache);
            ReadoutCache<S> rcache;
            Vec<S> logp = output_distribution_traced(model.decoder, hyp.y_prev, next,
                                                     ctx.context, rcache);
            new_states[a] = next.s;
            for (TokenId tok = 0; tok < model.dims.v_tgt; ++tok) {
                candidates.push_back(
                    {a, tok, hyp.log_prob + static_cast<double>(logp(tok))});
            }
        }

        // Candidates are enumerated parent-major then by token id, so a
        // stable sort implements the deterministic tie-break.
        const std::size_t keep =
            std::min<std::size_t>(candidates.size(), static_cast<std::size_t>(beam_width));
        std::stable_sort(candidates.begin(), candidates.end(),
                         [](const Candidate& x, const Candidate& y) {
                             return x.log_prob > y.log_prob;
                         });
        candidates.resize(keep);

        std::vector<Hypothesis<S>> next_active;
        next_active.reserve(keep);
        for (const Candidate& c : candidates) {
            Hypothesis<S> hyp = active[c.parent];
            hyp.state = new_states[c.parent];
            hyp.log_prob = c.log_prob;
            hyp.emissions += 1;
            if (c.token == Vocabulary::kEos) {
                hyp.finished = true;
                finished.push_back(std::move(hyp));
            } else {
                hyp.tokens.push_back(c.token);
                hyp.y_prev = c.token;
                if (step + 1 == max_len) {
                    finished.push_back(std::move(hyp));  // length cap, no EOS term
                } else {
                    next_active.push_back(std::move(hyp));
                }
            }
        }
        active = std::move(next_active);
    }

    std::stable_sort(finished.begin(), finished.end(),
                     [&](const Hypothesis<S>& a, const Hypothesis<S>& b) {
                         return a.score(length_normalize) > b.score(length_normalize);
                     });
    if (finished.size() > static_cast<std::size_t>(beam_width)) {
        finished.resize(static_cast<std::size_t>(beam_width));
    }
    return finished;
}

inline int default_max_len(std::size_t source_len) {
    return 2 * static_cast<int>(source_len) + 10;
}

/// Best-hypothesis translation of every source sentence, rendered as token
/// text (UNK printed literally). Sentences decode independently; `threads`
/// > 1 splits them over worker threads with outputs written by index, so
/// the result does not depend on the thread count.
template <typename S>
std::vector<std::string> translate_corpus(const ModelParams<S>& model,
                                          const std::vector<TokenIds>& sources,
                                          const Vocabulary& target_vocab, int beam_width,
                                          bool length_normalize = true, int threads = 1) {
    std::vector<std::string> lines(sources.size());
    auto translate_range = [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            auto hyps = beam_search(model, sources[i], beam_width,
                                    default_max_len(sources[i].size()), length_normalize);
            TokenIds best = hyps.empty() ? TokenIds{} : hyps.front().tokens;
            lines[i] = join_tokens(target_vocab.decode(best));
        }
    };
    if (threads <= 1 || sources.size() < 2) {
        translate_range(0, sources.size());
        return lines;
    }
    const std::size_t workers =
        std::min<std::size_t>(static_cast<std::size_t>(threads), sources.size());
    std::vector<std::thread> pool;
    const std::size_t chunk = (sources.size() + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w) {
        const std::size_t begin = w * chunk;
        const std::size_t end = std::min(sources.size(), begin + chunk);
        if (begin >= end) break;
        pool.emplace_back(translate_range, begin, end);
    }
    for (auto& t : pool) t.join();
    return lines;
}

template <typename S>
std::vector<std::string> translate_corpus(const ModelParams<S>& model, const Corpus& corpus,
                                          int beam_width, bool length_normalize = true,
                                          int threads = 1) {
    std::vector<TokenIds> sources;
    sources.reserve(corpus.size());
    for (const auto& pair : corpus.pairs) sources.push_back(pair.source);
    return translate_corpus(model, sources, corpus.target_vocab, beam_width,
                            length_normalize, threads);
}

}  // namespace rnmt
