#include "rnmt/beam.hpp"
#include "rnmt/bleu.hpp"
#include "rnmt/checkpoint.hpp"
#include "rnmt/corpus.hpp"
#include "rnmt/gradcheck.hpp"
#include "rnmt/trainer.hpp"
#include "rnmt/viz.hpp"
#include "rnmt/vocab.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

namespace {

using namespace rnmt;

std::vector<int> parse_boundaries(const std::string& text) {
    std::vector<int> out;
    std::string cell;
    std::istringstream in(text);
    while (std::getline(in, cell, ',')) {
        if (cell.empty()) continue;
        out.push_back(std::stoi(cell));
    }
    return out;
}

std::vector<TokenIds> encode_lines(const std::vector<std::string>& lines,
                                   const Vocabulary& vocab) {
    std::vector<TokenIds> out;
    out.reserve(lines.size());
    for (std::size_t i = 0; i < lines.size(); ++i) {
        TokenIds ids = vocab.encode(split_tokens(lines[i]));
        if (ids.empty()) {
            throw InvalidArgument("empty source sentence at line " + std::to_string(i + 1));
        }
        out.push_back(std::move(ids));
    }
    return out;
}

void print_bleu_block(const BleuReport& report, const std::string& prefix = "") {
    std::printf("%sbleu=%.4f\n", prefix.c_str(), report.bleu);
    for (int n = 0; n < 4; ++n) {
        std::printf("%sprecision%d=%.6f\n", prefix.c_str(), n + 1,
                    report.precisions[static_cast<std::size_t>(n)]);
    }
    std::printf("%sbrevity_penalty=%.6f\n", prefix.c_str(), report.brevity_penalty);
    std::printf("%shyp_length=%zu\n", prefix.c_str(), report.hyp_length);
    std::printf("%sref_length=%zu\n", prefix.c_str(), report.ref_length);
}

struct TrainCli {
    std::string train_src, train_tgt, dev_src, dev_tgt, out;
    std::string mechanism = "contexter";
    std::string output_mode = "last-state";
    std::string profile = "desk";
    int d_w = -1, d_h = -1, d_a = -1, d_r = -1;
    int vocab_size = -1;
    int epochs = 10;
    int batch = -1;
    int max_len = 50;
    std::uint64_t seed = 0;
    double rho = 0.95;
    double adadelta_eps = 1e-6;
    double clip = 1.0;
    int validate_every = 1;
    double init_scale = 0.08;
    bool save_optimizer = false;
    bool quiet = false;
};

int run_train(const TrainCli& cli) {
    // Profile defaults; explicit flags win.
    const bool paper = cli.profile == "paper";
    TrainConfig config;
    config.dims.d_w = cli.d_w > 0 ? cli.d_w : (paper ? 620 : 32);
    config.dims.d_h = cli.d_h > 0 ? cli.d_h : (paper ? 1000 : 64);
    config.dims.d_a = cli.d_a > 0 ? cli.d_a : config.dims.d_h;
    config.dims.d_r = cli.d_r > 0 ? cli.d_r : config.dims.d_h;
    const int vocab_size = cli.vocab_size > 0 ? cli.vocab_size : (paper ? 30000 : 1000);
    config.batch_size = cli.batch > 0 ? cli.batch : 80;
    config.max_len = cli.max_len;
    config.max_epochs = cli.epochs;
    config.seed = cli.seed;
    config.rho = cli.rho;
    config.epsilon = cli.adadelta_eps;
    config.clip_norm = cli.clip;
    config.validate_every = cli.validate_every;
    config.init_scale = cli.init_scale;
    config.keep_optimizer = cli.save_optimizer;
    config.verbose = !cli.quiet;

    ContextMode mode;
    mode.mechanism = parse_mechanism(cli.mechanism);
    mode.output = parse_pooling(cli.output_mode);

    auto src_vocab = Vocabulary::build_from_file(cli.train_src,
                                                 static_cast<std::size_t>(vocab_size));
    auto tgt_vocab = Vocabulary::build_from_file(cli.train_tgt,
                                                 static_cast<std::size_t>(vocab_size));
    Corpus train_corpus = load_corpus(cli.train_src, cli.train_tgt, src_vocab, tgt_vocab);
    Corpus dev_corpus = load_corpus(cli.dev_src, cli.dev_tgt, src_vocab, tgt_vocab);

    Checkpoint ckpt = train(config, train_corpus, dev_corpus, mode);
    save_checkpoint(ckpt, cli.out);
    std::printf("best_dev_bleu=%.4f\n", ckpt.best_score);
    std::printf("checkpoint=%s\n", cli.out.c_str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"rnmt - a desk-scale recurrent NMT laboratory"};
    app.require_subcommand(1);
    app.set_config("--config", "",
                   "flat key=value config file; keys are <subcommand>.<flag> entries");
    app.failure_message(CLI::FailureMessage::help);

    // build-vocab
    auto* sc_vocab = app.add_subcommand("build-vocab", "build a frequency vocabulary");
    std::string bv_input, bv_output;
    int bv_max = 1000;
    sc_vocab->add_option("--input", bv_input, "token text file")->required();
    sc_vocab->add_option("--output", bv_output, "vocabulary file to write")->required();
    sc_vocab->add_option("--max-size", bv_max, "non-reserved vocabulary size cap");

    // synth
    auto* sc_synth = app.add_subcommand("synth", "generate a synthetic parallel corpus");
    std::string sy_task = "copy", sy_src, sy_tgt;
    int sy_count = 1000, sy_alphabet = 20, sy_min = 2, sy_max = 10;
    std::uint64_t sy_seed = 0;
    sc_synth->add_option("--task", sy_task, "copy|reverse|sort-digits|long-agreement");
    sc_synth->add_option("--count", sy_count, "number of pairs");
    sc_synth->add_option("--alphabet", sy_alphabet, "alphabet size");
    sc_synth->add_option("--min-len", sy_min, "minimum body length");
    sc_synth->add_option("--max-len", sy_max, "maximum body length");
    sc_synth->add_option("--seed", sy_seed, "random seed");
    sc_synth->add_option("--out-src", sy_src, "source file to write")->required();
    sc_synth->add_option("--out-tgt", sy_tgt, "target file to write")->required();

    // concat
    auto* sc_concat = app.add_subcommand("concat",
                                         "merge neighboring sentence pairs (long-sentence set)");
    std::string cc_in_src, cc_in_tgt, cc_out_src, cc_out_tgt;
    sc_concat->add_option("--in-src", cc_in_src)->required();
    sc_concat->add_option("--in-tgt", cc_in_tgt)->required();
    sc_concat->add_option("--out-src", cc_out_src)->required();
    sc_concat->add_option("--out-tgt", cc_out_tgt)->required();

    // train
    auto* sc_train = app.add_subcommand("train", "train a model");
    TrainCli tr;
    sc_train->add_option("--train-src", tr.train_src)->required();
    sc_train->add_option("--train-tgt", tr.train_tgt)->required();
    sc_train->add_option("--dev-src", tr.dev_src)->required();
    sc_train->add_option("--dev-tgt", tr.dev_tgt)->required();
    sc_train->add_option("--out", tr.out, "checkpoint path")->required();
    sc_train->add_option("--mechanism", tr.mechanism, "attention|contexter");
    sc_train->add_option("--output-mode", tr.output_mode, "mean-pooling|last-state");
    sc_train->add_option("--profile", tr.profile, "desk|paper dimension profile");
    sc_train->add_option("--d-w", tr.d_w, "embedding width");
    sc_train->add_option("--d-h", tr.d_h, "hidden width");
    sc_train->add_option("--d-a", tr.d_a, "attention scoring width");
    sc_train->add_option("--d-r", tr.d_r, "readout width");
    sc_train->add_option("--vocab-size", tr.vocab_size, "vocabulary cap");
    sc_train->add_option("--epochs", tr.epochs);
    sc_train->add_option("--batch", tr.batch);
    sc_train->add_option("--max-len", tr.max_len, "training length cap");
    sc_train->add_option("--seed", tr.seed);
    sc_train->add_option("--rho", tr.rho, "Adadelta decay");
    sc_train->add_option("--adadelta-eps", tr.adadelta_eps);
    sc_train->add_option("--clip", tr.clip, "global gradient norm cap");
    sc_train->add_option("--validate-every", tr.validate_every, "epochs between validations");
    sc_train->add_option("--init-scale", tr.init_scale);
    sc_train->add_flag("--save-optimizer", tr.save_optimizer);
    sc_train->add_flag("--quiet", tr.quiet);

    // translate
    auto* sc_translate = app.add_subcommand("translate", "beam-search decode a source file");
    std::string ts_ckpt, ts_src, ts_out;
    int ts_beam = 10, ts_threads = 1;
    bool ts_no_norm = false;
    sc_translate->add_option("--ckpt", ts_ckpt)->required();
    sc_translate->add_option("--src", ts_src)->required();
    sc_translate->add_option("--out", ts_out)->required();
    sc_translate->add_option("--beam", ts_beam, "beam width");
    sc_translate->add_flag("--no-length-norm", ts_no_norm,
                           "rank final hypotheses by unnormalized score");
    sc_translate->add_option("--threads", ts_threads, "decoding threads");

    // score
    auto* sc_score = app.add_subcommand("score", "BLEU-4 and token accuracy");
    std::string sr_hyp, sr_ref;
    sc_score->add_option("--hyp", sr_hyp)->required();
    sc_score->add_option("--ref", sr_ref)->required();

    // bucket-score
    auto* sc_bucket = app.add_subcommand("bucket-score", "per-length-bucket scores");
    std::string bk_hyp, bk_ref, bk_src, bk_bounds = "10,20,30,40,50";
    sc_bucket->add_option("--hyp", bk_hyp)->required();
    sc_bucket->add_option("--ref", bk_ref)->required();
    sc_bucket->add_option("--src", bk_src, "source file (bucketing is by source length)")
        ->required();
    sc_bucket->add_option("--boundaries", bk_bounds, "comma-separated ascending bounds");

    // signif
    auto* sc_signif = app.add_subcommand("signif", "paired bootstrap significance");
    std::string sg_a, sg_b, sg_ref;
    int sg_resamples = 1000;
    std::uint64_t sg_seed = 0;
    sc_signif->add_option("--hyp-a", sg_a)->required();
    sc_signif->add_option("--hyp-b", sg_b)->required();
    sc_signif->add_option("--ref", sg_ref)->required();
    sc_signif->add_option("--resamples", sg_resamples);
    sc_signif->add_option("--seed", sg_seed);

    // gradcheck
    auto* sc_grad = app.add_subcommand("gradcheck", "finite-difference check of the backward pass");
    std::string gc_mechanism = "contexter", gc_mode = "last-state";
    int gc_dw = 8, gc_dh = 12, gc_vocab = 20, gc_src_len = 5, gc_tgt_len = 5;
    std::uint64_t gc_seed = 4;
    double gc_epsilon = 1e-5, gc_tolerance = 1e-4, gc_scale = 0.8;
    bool gc_verbose = false;
    sc_grad->add_option("--mechanism", gc_mechanism, "attention|contexter");
    sc_grad->add_option("--output-mode", gc_mode, "mean-pooling|last-state");
    sc_grad->add_option("--d-w", gc_dw);
    sc_grad->add_option("--d-h", gc_dh);
    sc_grad->add_option("--vocab", gc_vocab, "vocabulary size (both sides)");
    sc_grad->add_option("--src-len", gc_src_len);
    sc_grad->add_option("--tgt-len", gc_tgt_len);
    sc_grad->add_option("--seed", gc_seed);
    sc_grad->add_option("--epsilon", gc_epsilon, "finite-difference step");
    sc_grad->add_option("--scale", gc_scale, "random parameter scale");
    sc_grad->add_option("--tolerance", gc_tolerance, "max relative error");
    sc_grad->add_flag("--per-tensor", gc_verbose, "print every tensor's errors");

    // viz
    auto* sc_viz = app.add_subcommand("viz", "export contexter gate heatmaps");
    std::string vz_ckpt, vz_src, vz_tgt, vz_prefix = "heatmap", vz_format = "csv";
    int vz_line = 1;
    sc_viz->add_option("--ckpt", vz_ckpt)->required();
    sc_viz->add_option("--src", vz_src)->required();
    sc_viz->add_option("--tgt", vz_tgt)->required();
    sc_viz->add_option("--line", vz_line, "1-based sentence index");
    sc_viz->add_option("--out-prefix", vz_prefix, "output path prefix");
    sc_viz->add_option("--format", vz_format, "csv|pgm|both");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        if (*sc_vocab) {
            auto vocab = Vocabulary::build_from_file(bv_input,
                                                     static_cast<std::size_t>(bv_max));
            if (vocab.size() == Vocabulary::kNumReserved) {
                std::fprintf(stderr, "warning: no corpus tokens, writing reserved-only vocabulary\n");
            }
            vocab.save(bv_output);
            std::printf("tokens=%d\n", vocab.size() - Vocabulary::kNumReserved);
        } else if (*sc_synth) {
            SyntheticTaskSpec spec;
            spec.task = parse_task(sy_task);
            spec.sample_count = sy_count;
            spec.alphabet_size = sy_alphabet;
            spec.min_len = sy_min;
            spec.max_len = sy_max;
            spec.seed = sy_seed;
            Corpus corpus = gen_synthetic(spec);
            save_corpus_text(corpus, sy_src, sy_tgt);
            std::printf("pairs=%zu\n", corpus.size());
        } else if (*sc_concat) {
            auto src = read_lines(cc_in_src);
            auto tgt = read_lines(cc_in_tgt);
            if (src.size() != tgt.size()) {
                throw InvalidArgument("concat: input files are not line-aligned");
            }
            write_lines(cc_out_src, concat_lines(src));
            write_lines(cc_out_tgt, concat_lines(tgt));
            std::printf("pairs=%zu\n", concat_lines(src).size());
        } else if (*sc_train) {
            return run_train(tr);
        } else if (*sc_translate) {
            Checkpoint ckpt = load_checkpoint(ts_ckpt);
            auto sources = encode_lines(read_lines(ts_src), ckpt.source_vocab);
            auto lines = translate_corpus(ckpt.model, sources, ckpt.target_vocab, ts_beam,
                                          !ts_no_norm, ts_threads);
            write_lines(ts_out, lines);
            std::printf("sentences=%zu\n", lines.size());
        } else if (*sc_score) {
            auto hyp = read_lines(sr_hyp);
            auto ref = read_lines(sr_ref);
            print_bleu_block(bleu4(hyp, ref));
            std::printf("token_accuracy=%.6f\n", token_accuracy(hyp, ref));
            std::printf("final_token_accuracy=%.6f\n", final_token_accuracy(hyp, ref));
        } else if (*sc_bucket) {
            auto hyp = read_lines(bk_hyp);
            auto ref = read_lines(bk_ref);
            auto src = read_lines(bk_src);
            auto boundaries = parse_boundaries(bk_bounds);
            auto buckets = bucketed_report(hyp, ref, src, boundaries);
            for (std::size_t b = 0; b < buckets.size(); ++b) {
                const auto& score = buckets[b];
                std::string prefix = "bucket" + std::to_string(b + 1) + ".";
                if (score.boundary > 0) {
                    std::printf("%smax_source_len=%d\n", prefix.c_str(), score.boundary);
                } else {
                    std::printf("%smax_source_len=inf\n", prefix.c_str());
                }
                std::printf("%ssize=%zu\n", prefix.c_str(), score.size);
                if (!score.present) continue;  // empty buckets carry no scores
                print_bleu_block(score.bleu, prefix);
                std::printf("%stoken_accuracy=%.6f\n", prefix.c_str(), score.token_acc);
                std::printf("%sfinal_token_accuracy=%.6f\n", prefix.c_str(),
                            score.final_token_acc);
            }
        } else if (*sc_signif) {
            auto report = paired_bootstrap(read_lines(sg_a), read_lines(sg_b),
                                           read_lines(sg_ref), sg_resamples, sg_seed);
            std::printf("score_a=%.4f\n", report.score_a);
            std::printf("score_b=%.4f\n", report.score_b);
            std::printf("resamples=%d\n", report.resamples);
            std::printf("wins_a=%.1f\n", report.wins_a);
            std::printf("p_value=%.6f\n", report.p_value);
        } else if (*sc_grad) {
            Dims dims;
            dims.d_w = gc_dw;
            dims.d_h = gc_dh;
            dims.d_a = gc_dh;
            dims.d_r = gc_dh;
            dims.v_src = gc_vocab;
            dims.v_tgt = gc_vocab;
            ContextMode mode;
            mode.mechanism = parse_mechanism(gc_mechanism);
            mode.output = parse_pooling(gc_mode);
            auto report = full_model_grad_check(dims, mode, gc_src_len, gc_tgt_len,
                                                gc_seed, gc_epsilon, gc_tolerance,
                                                gc_scale);
            if (gc_verbose) {
                for (const auto& t : report.tensors) {
                    std::printf("tensor=%s rel_err=%.3e abs_err=%.3e\n", t.name.c_str(),
                                t.max_rel_err, t.max_abs_err);
                }
            }
            std::printf("max_rel_err=%.3e\n", report.max_rel_err());
            std::printf("tolerance=%.3e\n", report.tolerance);
            std::printf("pass=%d\n", report.pass ? 1 : 0);
            if (!report.pass) return 2;
        } else if (*sc_viz) {
            Checkpoint ckpt = load_checkpoint(vz_ckpt);
            auto src_lines = read_lines(vz_src);
            auto tgt_lines = read_lines(vz_tgt);
            if (src_lines.size() != tgt_lines.size()) {
                throw InvalidArgument("viz: input files are not line-aligned");
            }
            if (vz_line < 1 || static_cast<std::size_t>(vz_line) > src_lines.size()) {
                throw InvalidArgument("viz: line index out of range");
            }
            SentencePair pair;
            pair.source = ckpt.source_vocab.encode(
                split_tokens(src_lines[static_cast<std::size_t>(vz_line - 1)]));
            pair.target = ckpt.target_vocab.encode(
                split_tokens(tgt_lines[static_cast<std::size_t>(vz_line - 1)]));
            auto [update, reset] =
                collect_heatmaps(ckpt.model, pair, ckpt.source_vocab, ckpt.target_vocab);
            const bool csv = vz_format == "csv" || vz_format == "both";
            const bool pgm = vz_format == "pgm" || vz_format == "both";
            if (!csv && !pgm) throw InvalidArgument("viz: unknown format " + vz_format);
            if (csv) {
                export_heatmap(update, vz_prefix + "_update.csv", HeatmapFormat::Csv);
                export_heatmap(reset, vz_prefix + "_reset.csv", HeatmapFormat::Csv);
            }
            if (pgm) {
                export_heatmap(update, vz_prefix + "_update.pgm", HeatmapFormat::Pgm);
                export_heatmap(reset, vz_prefix + "_reset.pgm", HeatmapFormat::Pgm);
            }
            std::printf("rows=%td cols=%td\n", update.values.rows(), update.values.cols());
            std::printf("reset_update_correlation=%.6f\n",
                        heatmap_correlation(reset, update));
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 0;
}
