#pragma once

#include "rnmt/types.hpp"

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace rnmt {

/// Corpus-level case-insensitive BLEU-4. No smoothing: any zero n-gram
/// precision zeroes the score.
struct BleuReport {
    double bleu = 0.0;  // [0, 100]
    std::array<double, 4> precisions{0.0, 0.0, 0.0, 0.0};
    double brevity_penalty = 0.0;
    std::size_t hyp_length = 0;
    std::size_t ref_length = 0;
};

BleuReport bleu4(const std::vector<std::string>& hypotheses,
                 const std::vector<std::string>& references);

/// Position-wise exact match fraction, micro-averaged over tokens with
/// per-line denominator max(|hyp|, |ref|).
double token_accuracy(const std::vector<std::string>& hypotheses,
                      const std::vector<std::string>& references);

/// Fraction of lines whose final token matches the reference's final token.
double final_token_accuracy(const std::vector<std::string>& hypotheses,
                            const std::vector<std::string>& references);

struct SignificanceReport {
    double score_a = 0.0;  // corpus BLEU of system A
    double score_b = 0.0;
    int resamples = 0;
    double wins_a = 0.0;  // ties count half
    double p_value = 0.0;  // 1 - wins_a / resamples
};

/// Paired bootstrap over sentences: resamples indices with replacement and
/// recomputes corpus BLEU for both systems each time. Deterministic per
/// seed; each resample draws from its own counter-derived stream.
SignificanceReport paired_bootstrap(const std::vector<std::string>& hyp_a,
                                    const std::vector<std::string>& hyp_b,
                                    const std::vector<std::string>& references,
                                    int resamples, std::uint64_t seed);

struct BucketScore {
    int boundary = 0;  // inclusive upper bound on source length; 0 = unbounded
    std::size_t size = 0;
    bool present = false;  // empty buckets are reported absent, not zero
    BleuReport bleu;
    double token_acc = 0.0;
    double final_token_acc = 0.0;
};

/// Scores each source-length group independently. Lines are routed to the
/// first bucket whose boundary is >= the source token count; lengths past
/// the last boundary land in a final unbounded bucket.
std::vector<BucketScore> bucketed_report(const std::vector<std::string>& hypotheses,
                                         const std::vector<std::string>& references,
                                         const std::vector<std::string>& source_lines,
                                         const std::vector<int>& boundaries);

}  // namespace rnmt
