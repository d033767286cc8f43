#pragma once

// Command-line entry points. Subcommands:
//   train      fit a model on a pool-tsv dataset, write a checkpoint
//   eval       rank an evaluation set, print P@1 / MRR / MAP
//   score      score one question/answer pair
//   attend     export attention weights for a dataset slice
//   gradcheck  finite-difference check of all four architectures
// Exit codes: 0 success, 1 usage error, 2 data/model error.

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "apnet/attention_export.hpp"
#include "apnet/checkpoint.hpp"
#include "apnet/dataset.hpp"
#include "apnet/eval.hpp"
#include "apnet/model_gradcheck.hpp"
#include "apnet/train.hpp"

namespace apnet {

namespace cli_detail {

inline std::string fixed6(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return buf;
}

struct TrainArgs {
    std::string model = "ap-cnn";
    std::size_t dim = 100;
    std::size_t filters = 400;
    std::size_t hidden = 141;
    std::size_t window = 3;
    double margin = 0.5;
    double lr = 1.1;
    std::size_t epochs = 20;
    std::size_t batch = 20;
    std::size_t neg = 50;
    std::uint64_t seed = 1;
    std::string embeddings;
    bool freeze_embeddings = true;
    bool lowercase = false;
    std::string data;
    std::string dev;
    std::string out;
    std::string resume;
};

inline EmbeddingTable load_embedding_file(const std::string& path, std::uint64_t seed) {
    // sniff the format: text files start with "count dim\n" followed by a
    // token line; binary files carry raw float32 after the header
    if (path.size() > 4 && path.compare(path.size() - 4, 4, ".bin") == 0)
        return load_word2vec_binary(path, seed);
    return load_word2vec_text(path, seed);
}

inline int cmd_train(const TrainArgs& args, std::ostream& out) {
    TrainingConfig cfg;
    cfg.model_kind = model_kind_from_string(args.model);
    cfg.dim = args.dim;
    cfg.filters = is_cnn(cfg.model_kind) ? args.filters : 0;
    cfg.hidden = is_cnn(cfg.model_kind) ? 0 : args.hidden;
    cfg.window = is_cnn(cfg.model_kind) ? args.window : 1;
    cfg.minibatch_size = args.batch;
    cfg.margin = args.margin;
    cfg.initial_lr = args.lr;
    cfg.epochs = args.epochs;
    cfg.neg_sample_count = args.neg;
    cfg.seed = args.seed;
    cfg.embeddings_trainable = !args.freeze_embeddings;
    cfg.lowercase = args.lowercase;

    const std::vector<QAExample> data =
        load_dataset(args.data, DatasetMode::training, cfg.lowercase);
    validate_training_data(data);
    std::optional<std::vector<QAExample>> dev;
    if (!args.dev.empty()) dev = load_dataset(args.dev, DatasetMode::evaluation, cfg.lowercase);

    TrainState state;
    if (!args.resume.empty()) {
        Checkpoint ckpt = checkpoint_load(args.resume);
        state.config = ckpt.config;
        state.model = std::move(ckpt.model);
        state.rng = rng_from_state(ckpt.rng_state);
        state.epochs_done = ckpt.epoch;
        state.config.epochs = cfg.epochs;  // extended budget comes from the flags
        out << "resumed from " << args.resume << " at epoch " << state.epochs_done << "\n";
    } else {
        EmbeddingTable emb;
        if (!args.embeddings.empty()) {
            emb = load_embedding_file(args.embeddings, cfg.seed);
            if (emb.dim != cfg.dim)
                throw DataError("embedding file dim " + std::to_string(emb.dim) +
                                " != --dim " + std::to_string(cfg.dim));
            // corpus tokens missing from the file get seeded random vectors
            EmbeddingTable merged = build_vocab(corpus_tokens(data), &emb, cfg.dim, cfg.seed);
            emb = std::move(merged);
        } else {
            emb = build_vocab(corpus_tokens(data), nullptr, cfg.dim, cfg.seed);
        }
        state = init_training(cfg, std::move(emb));
    }

    std::size_t best_epoch = 0;
    double best_dev_p1 = -1.0;
    std::optional<Checkpoint> best_ckpt;
    run_epochs(state, data, state.config.epochs, [&](const EpochStats& s, const Model& m) {
        out << "epoch " << s.epoch << " loss " << fixed6(s.mean_loss) << " lr "
            << fixed6(s.learning_rate);
        if (dev) {
            const auto pools = rank_all(m, *dev);
            const double p1 = precision_at_1(pools);
            out << " dev_p@1 " << fixed6(p1) << " dev_map " << fixed6(mean_average_precision(pools))
                << " dev_mrr " << fixed6(mean_reciprocal_rank(pools));
            if (p1 > best_dev_p1) {
                best_dev_p1 = p1;
                best_epoch = s.epoch;
                best_ckpt = Checkpoint{state.config, m, s.epoch, std::string()};
            }
        }
        out << "\n";
    });

    if (!args.out.empty()) {
        Checkpoint final{state.config, state.model, state.epochs_done,
                         rng_state_string(state.rng)};
        checkpoint_save(args.out, final);
        out << "saved " << args.out << "\n";
        if (best_ckpt) {
            checkpoint_save(args.out + ".best", *best_ckpt);
            out << "best epoch " << best_epoch << " dev_p@1 " << fixed6(best_dev_p1) << " saved "
                << args.out << ".best\n";
        }
    }
    return 0;
}

inline int cmd_eval(const std::string& ckpt_path, const std::string& data_path,
                    const std::vector<std::size_t>& buckets, std::ostream& out) {
    Checkpoint ckpt = checkpoint_load(ckpt_path);
    const auto data = load_dataset(data_path, DatasetMode::evaluation, ckpt.config.lowercase);
    const auto pools = rank_all(ckpt.model, data);
    out << "model " << to_string(ckpt.config.model_kind) << "\n";
    out << "questions " << pools.size() << "\n";
    out << "P@1 " << fixed6(precision_at_1(pools)) << "\n";
    out << "MRR " << fixed6(mean_reciprocal_rank(pools)) << "\n";
    out << "MAP " << fixed6(mean_average_precision(pools)) << "\n";
    if (!buckets.empty()) {
        for (const auto& b : accuracy_by_answer_length(pools, data, buckets))
            out << "len<=" << b.max_length << " P@1 " << fixed6(b.accuracy) << " n="
                << b.question_count << "\n";
    }
    return 0;
}

inline int cmd_score(const std::string& ckpt_path, const std::string& question,
                     const std::string& answer, std::ostream& out) {
    Checkpoint ckpt = checkpoint_load(ckpt_path);
    std::vector<std::string> q = split_tokens(question);
    std::vector<std::string> a = split_tokens(answer);
    if (q.empty() || a.empty()) throw DataError("question and answer must be nonempty");
    if (ckpt.config.lowercase) {
        ascii_lowercase(q);
        ascii_lowercase(a);
    }
    out << "score " << fixed6(score_pair(ckpt.model, q, a).score) << "\n";
    return 0;
}

inline int cmd_attend(const std::string& ckpt_path, const std::string& data_path,
                      const std::string& out_path, std::size_t limit, std::ostream& out) {
    Checkpoint ckpt = checkpoint_load(ckpt_path);
    auto data = load_dataset(data_path, DatasetMode::evaluation, ckpt.config.lowercase);
    if (limit > 0 && data.size() > limit) data.resize(limit);
    export_attention(ckpt.model, data, out_path);
    std::size_t pairs = 0;
    for (const auto& ex : data) pairs += ex.candidates.size();
    out << "wrote " << pairs << " attention records to " << out_path << "\n";
    return 0;
}

inline int cmd_gradcheck(std::uint64_t seed, double step, std::ostream& out) {
    constexpr double tol = 1e-4;
    bool all_ok = true;
    for (ModelKind kind : {ModelKind::qa_cnn, ModelKind::ap_cnn, ModelKind::qa_bilstm,
                           ModelKind::ap_bilstm}) {
        const GradCheckReport r = model_grad_check(kind, seed, step);
        char err[32];
        std::snprintf(err, sizeof(err), "%.3e", r.max_relative_error);
        out << "gradcheck " << to_string(kind) << " max_rel_err " << err << " worst "
            << (r.worst_parameter.empty() ? "-" : r.worst_parameter) << " "
            << (r.ok(tol) ? "PASS" : "FAIL") << "\n";
        if (r.failed) out << "  " << r.failure_detail << "\n";
        all_ok = all_ok && r.ok(tol);
    }
    if (!all_ok) throw DataError("gradient check failed");
    return 0;
}

}  // namespace cli_detail

inline int run_cli(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
    CLI::App app{"answer-selection training and evaluation"};
    app.require_subcommand(1);

    cli_detail::TrainArgs ta;
    auto* train_cmd = app.add_subcommand("train", "train a model");
    train_cmd->add_option("--model", ta.model, "qa-cnn | ap-cnn | qa-bilstm | ap-bilstm");
    train_cmd->add_option("--dim", ta.dim, "word embedding size");
    train_cmd->add_option("--filters", ta.filters, "conv filter count (cnn models)");
    train_cmd->add_option("--hidden", ta.hidden, "lstm hidden size (bilstm models)");
    train_cmd->add_option("--window", ta.window, "context window size (cnn models)");
    train_cmd->add_option("--margin", ta.margin, "hinge-loss margin");
    train_cmd->add_option("--lr", ta.lr, "initial learning rate");
    train_cmd->add_option("--epochs", ta.epochs, "epoch budget");
    train_cmd->add_option("--batch", ta.batch, "minibatch size (questions)");
    train_cmd->add_option("--neg", ta.neg, "negatives sampled per question");
    train_cmd->add_option("--seed", ta.seed, "rng seed");
    train_cmd->add_option("--embeddings", ta.embeddings, "pretrained word2vec file (.bin or text)");
    train_cmd->add_flag("--freeze-embeddings,!--no-freeze-embeddings", ta.freeze_embeddings,
                        "keep embeddings fixed during training (default on)");
    train_cmd->add_flag("--lowercase", ta.lowercase, "lowercase tokens at ingestion");
    train_cmd->add_option("--data", ta.data, "training pool-tsv")->required();
    train_cmd->add_option("--dev", ta.dev, "dev pool-tsv for per-epoch metrics");
    train_cmd->add_option("--out", ta.out, "checkpoint output path");
    train_cmd->add_option("--resume", ta.resume, "checkpoint to resume from");

    std::string eval_ckpt, eval_data;
    std::vector<std::size_t> buckets;
    auto* eval_cmd = app.add_subcommand("eval", "evaluate a checkpoint");
    eval_cmd->add_option("--checkpoint", eval_ckpt)->required();
    eval_cmd->add_option("--data", eval_data)->required();
    eval_cmd->add_option("--length-buckets", buckets, "answer-length bucket edges");

    std::string score_ckpt, score_q, score_a;
    auto* score_cmd = app.add_subcommand("score", "score one question/answer pair");
    score_cmd->add_option("--checkpoint", score_ckpt)->required();
    score_cmd->add_option("--question", score_q)->required();
    score_cmd->add_option("--answer", score_a)->required();

    std::string attend_ckpt, attend_data, attend_out;
    std::size_t attend_limit = 0;
    auto* attend_cmd = app.add_subcommand("attend", "export attention weights");
    attend_cmd->add_option("--checkpoint", attend_ckpt)->required();
    attend_cmd->add_option("--data", attend_data)->required();
    attend_cmd->add_option("--out", attend_out)->required();
    attend_cmd->add_option("--limit", attend_limit, "only the first N questions (0 = all)");

    std::uint64_t gc_seed = 12345;
    double gc_step = 1e-5;
    auto* gc_cmd = app.add_subcommand("gradcheck", "finite-difference gradient verification");
    gc_cmd->add_option("--seed", gc_seed);
    gc_cmd->add_option("--step", gc_step, "finite-difference step");

    std::vector<const char*> argv;
    argv.push_back("apnet");
    for (const auto& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 1;
    }

    try {
        if (*train_cmd) return cli_detail::cmd_train(ta, out);
        if (*eval_cmd) return cli_detail::cmd_eval(eval_ckpt, eval_data, buckets, out);
        if (*score_cmd) return cli_detail::cmd_score(score_ckpt, score_q, score_a, out);
        if (*attend_cmd)
            return cli_detail::cmd_attend(attend_ckpt, attend_data, attend_out, attend_limit, out);
        if (*gc_cmd) return cli_detail::cmd_gradcheck(gc_seed, gc_step, out);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    }
    return 1;
}

}  // namespace apnet
