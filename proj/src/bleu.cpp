#include "rnmt/bleu.hpp"

#include "rnmt/vocab.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <unordered_map>

namespace rnmt {

namespace {

constexpr int kMaxOrder = 4;

std::vector<std::string> folded_tokens(const std::string& line) {
    auto tokens = split_tokens(line);
    for (auto& tok : tokens) {
        for (char& c : tok) {
            c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        }
    }
    return tokens;
}

/// Clipped n-gram matches and totals of one sentence pair, plus lengths;
/// corpus statistics are sums of these, which is what the bootstrap
/// resampling exploits.
struct LineStats {
    std::array<std::int64_t, kMaxOrder> match{0, 0, 0, 0};
    std::array<std::int64_t, kMaxOrder> total{0, 0, 0, 0};
    std::int64_t hyp_len = 0;
    std::int64_t ref_len = 0;

    LineStats& operator+=(const LineStats& o) {
        for (int n = 0; n < kMaxOrder; ++n) {
            match[n] += o.match[n];
            total[n] += o.total[n];
        }
        hyp_len += o.hyp_len;
        ref_len += o.ref_len;
        return *this;
    }
};

using NgramCounts = std::unordered_map<std::string, std::int64_t>;

NgramCounts count_ngrams(const std::vector<std::string>& tokens, int order) {
    NgramCounts counts;
    if (static_cast<int>(tokens.size()) < order) return counts;
    for (std::size_t i = 0; i + order <= tokens.size(); ++i) {
        std::string key = tokens[i];
        for (int k = 1; k < order; ++k) {
            key += '\x1f';
            key += tokens[i + k];
        }
        counts[key] += 1;
    }
    return counts;
}

LineStats line_stats(const std::string& hyp_line, const std::string& ref_line) {
    LineStats stats;
    auto hyp = folded_tokens(hyp_line);
    auto ref = folded_tokens(ref_line);
    stats.hyp_len = static_cast<std::int64_t>(hyp.size());
    stats.ref_len = static_cast<std::int64_t>(ref.size());
    for (int n = 1; n <= kMaxOrder; ++n) {
        auto hyp_counts = count_ngrams(hyp, n);
        auto ref_counts = count_ngrams(ref, n);
        std::int64_t total = 0, match = 0;
        for (const auto& [key, count] : hyp_counts) {
            total += count;
            auto it = ref_counts.find(key);
            if (it != ref_counts.end()) match += std::min(count, it->second);
        }
        stats.total[n - 1] = total;
        stats.match[n - 1] = match;
    }
    return stats;
}

BleuReport report_from_stats(const LineStats& stats) {
    BleuReport report;
    report.hyp_length = static_cast<std::size_t>(stats.hyp_len);
    report.ref_length = static_cast<std::size_t>(stats.ref_len);
    // Orders the hypothesis corpus has no n-grams for (every line shorter
    // than n) carry no evidence and drop out of the geometric mean; an
    // order with n-grams but zero matches still zeroes the score.
    bool any_zero = false;
    int effective_orders = 0;
    double log_sum = 0.0;
    for (int n = 0; n < kMaxOrder; ++n) {
        if (stats.total[n] == 0) {
            report.precisions[static_cast<std::size_t>(n)] = 0.0;
            continue;
        }
        const double p =
            static_cast<double>(stats.match[n]) / static_cast<double>(stats.total[n]);
        report.precisions[static_cast<std::size_t>(n)] = p;
        ++effective_orders;
        if (p <= 0.0) {
            any_zero = true;
        } else {
            log_sum += std::log(p);
        }
    }
    if (stats.hyp_len == 0 || effective_orders == 0) {
        report.brevity_penalty = 0.0;
        report.bleu = 0.0;
        return report;
    }
    report.brevity_penalty =
        stats.hyp_len < stats.ref_len
            ? std::exp(1.0 - static_cast<double>(stats.ref_len) /
                                 static_cast<double>(stats.hyp_len))
            : 1.0;
    report.bleu = any_zero ? 0.0
                           : 100.0 * report.brevity_penalty *
                                 std::exp(log_sum / effective_orders);
    return report;
}

std::vector<LineStats> all_line_stats(const std::vector<std::string>& hyps,
                                      const std::vector<std::string>& refs) {
    if (hyps.size() != refs.size()) {
        throw InvalidArgument("hypothesis/reference line counts differ: " +
                              std::to_string(hyps.size()) + " vs " +
                              std::to_string(refs.size()));
    }
    std::vector<LineStats> stats;
    stats.reserve(hyps.size());
    for (std::size_t i = 0; i < hyps.size(); ++i) {
        stats.push_back(line_stats(hyps[i], refs[i]));
    }
    return stats;
}

double bleu_of_sample(const std::vector<LineStats>& stats,
                      const std::vector<std::size_t>& indices) {
    LineStats sum;
    for (std::size_t i : indices) sum += stats[i];
    return report_from_stats(sum).bleu;
}

std::uint64_t mix64(std::uint64_t a, std::uint64_t b) {
    std::uint64_t x = a + 0x9e3779b97f4a7c15ULL * (b + 1);
    x ^= x >> 30;
    x *= 0xbf58476d1ce4e5b9ULL;
    x ^= x >> 27;
    x *= 0x94d049bb133111ebULL;
    x ^= x >> 31;
    return x;
}

}  // namespace

BleuReport bleu4(const std::vector<std::string>& hypotheses,
                 const std::vector<std::string>& references) {
    LineStats sum;
    for (const auto& stats : all_line_stats(hypotheses, references)) sum += stats;
    return report_from_stats(sum);
}

double token_accuracy(const std::vector<std::string>& hypotheses,
                      const std::vector<std::string>& references) {
    if (hypotheses.size() != references.size()) {
        throw InvalidArgument("hypothesis/reference line counts differ");
    }
    std::int64_t matches = 0, total = 0;
    for (std::size_t i = 0; i < hypotheses.size(); ++i) {
        auto hyp = split_tokens(hypotheses[i]);
        auto ref = split_tokens(references[i]);
        const std::size_t common = std::min(hyp.size(), ref.size());
        for (std::size_t k = 0; k < common; ++k) {
            if (hyp[k] == ref[k]) ++matches;
        }
        total += static_cast<std::int64_t>(std::max(hyp.size(), ref.size()));
    }
    return total == 0 ? 0.0 : static_cast<double>(matches) / static_cast<double>(total);
}

double final_token_accuracy(const std::vector<std::string>& hypotheses,
                            const std::vector<std::string>& references) {
    if (hypotheses.size() != references.size()) {
        throw InvalidArgument("hypothesis/reference line counts differ");
    }
    if (hypotheses.empty()) return 0.0;
    std::size_t matches = 0;
    for (std::size_t i = 0; i < hypotheses.size(); ++i) {
        auto hyp = split_tokens(hypotheses[i]);
        auto ref = split_tokens(references[i]);
        if (!hyp.empty() && !ref.empty() && hyp.back() == ref.back()) ++matches;
    }
    return static_cast<double>(matches) / static_cast<double>(hypotheses.size());
}

SignificanceReport paired_bootstrap(const std::vector<std::string>& hyp_a,
                                    const std::vector<std::string>& hyp_b,
                                    const std::vector<std::string>& references,
                                    int resamples, std::uint64_t seed) {
    if (resamples < 1) throw InvalidArgument("paired_bootstrap: resamples must be >= 1");
    auto stats_a = all_line_stats(hyp_a, references);
    auto stats_b = all_line_stats(hyp_b, references);
    if (hyp_a.size() != hyp_b.size()) {
        throw InvalidArgument("paired_bootstrap: system line counts differ");
    }
    const std::size_t n = references.size();
    if (n == 0) throw InvalidArgument("paired_bootstrap: empty corpus");

    SignificanceReport report;
    report.resamples = resamples;
    {
        LineStats sum_a, sum_b;
        for (const auto& s : stats_a) sum_a += s;
        for (const auto& s : stats_b) sum_b += s;
        report.score_a = report_from_stats(sum_a).bleu;
        report.score_b = report_from_stats(sum_b).bleu;
    }

    std::vector<std::size_t> indices(n);
    for (int rep = 0; rep < resamples; ++rep) {
        Rng rng(mix64(seed, static_cast<std::uint64_t>(rep)));
        for (auto& idx : indices) idx = rng.below(n);
        const double a = bleu_of_sample(stats_a, indices);
        const double b = bleu_of_sample(stats_b, indices);
        if (a > b) {
            report.wins_a += 1.0;
        } else if (a == b) {
            report.wins_a += 0.5;
        }
    }
    report.p_value = 1.0 - report.wins_a / static_cast<double>(resamples);
    return report;
}

std::vector<BucketScore> bucketed_report(const std::vector<std::string>& hypotheses,
                                         const std::vector<std::string>& references,
                                         const std::vector<std::string>& source_lines,
                                         const std::vector<int>& boundaries) {
    if (hypotheses.size() != references.size() ||
        hypotheses.size() != source_lines.size()) {
        throw InvalidArgument("bucketed_report: line counts differ");
    }
    for (std::size_t i = 1; i < boundaries.size(); ++i) {
        if (boundaries[i] <= boundaries[i - 1]) {
            throw InvalidArgument("bucket boundaries must be strictly ascending");
        }
    }

    const std::size_t num_buckets = boundaries.size() + 1;
    std::vector<std::vector<std::size_t>> members(num_buckets);
    for (std::size_t i = 0; i < source_lines.size(); ++i) {
        const int len = static_cast<int>(split_tokens(source_lines[i]).size());
        std::size_t b = 0;
        while (b < boundaries.size() && len > boundaries[b]) ++b;
        members[b].push_back(i);
    }

    std::vector<BucketScore> scores;
    scores.reserve(num_buckets);
    for (std::size_t b = 0; b < num_buckets; ++b) {
        BucketScore score;
        score.boundary = b < boundaries.size() ? boundaries[b] : 0;
        score.size = members[b].size();
        if (!members[b].empty()) {
            std::vector<std::string> hyp_sub, ref_sub;
            hyp_sub.reserve(members[b].size());
            ref_sub.reserve(members[b].size());
            for (std::size_t i : members[b]) {
                hyp_sub.push_back(hypotheses[i]);
                ref_sub.push_back(references[i]);
            }
            score.present = true;
            score.bleu = bleu4(hyp_sub, ref_sub);
            score.token_acc = token_accuracy(hyp_sub, ref_sub);
            score.final_token_acc = final_token_accuracy(hyp_sub, ref_sub);
        }
        scores.push_back(std::move(score));
    }
    return scores;
}

}  // namespace rnmt
