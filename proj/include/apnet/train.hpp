#pragma once

// Pairwise hinge-loss training. Per epoch the questions are shuffled
// (seeded); each minibatch builds one (q, a+, a-) triple per question, where
// a- is the hardest of up to `neg_sample_count` negatives sampled without
// replacement and scored with the current pre-update parameters. The SGD
// update uses the gradient of the minibatch-mean loss at learning rate
// lambda / epoch. The whole loop is a deterministic function of
// (config, dataset order, seed).

#include <cstdint>
#include <functional>
#include <numeric>
#include <string>
#include <vector>

#include "apnet/dataset.hpp"
#include "apnet/eval.hpp"
#include "apnet/model.hpp"
#include "apnet/rng.hpp"

namespace apnet {

struct TrainingConfig {
    ModelKind model_kind = ModelKind::ap_cnn;
    std::size_t dim = 100;            // word embedding size d
    std::size_t filters = 0;          // conv filter count c (cnn kinds)
    std::size_t hidden = 0;           // lstm hidden size H (bilstm kinds)
    std::size_t window = 3;           // context window k
    std::size_t minibatch_size = 20;
    double margin = 0.5;
    double initial_lr = 1.1;
    std::size_t epochs = 20;
    std::size_t neg_sample_count = 50;
    std::uint64_t seed = 1;
    bool embeddings_trainable = false;
    bool lowercase = false;

    void validate() const {
        if (margin <= 0.0) throw std::invalid_argument("config: margin must be positive");
        if (initial_lr <= 0.0) throw std::invalid_argument("config: lr must be positive");
        if (neg_sample_count < 1)
            throw std::invalid_argument("config: neg_sample_count must be >= 1");
        if (dim < 1 || minibatch_size < 1)
            throw std::invalid_argument("config: dims must be >= 1");
        if (is_cnn(model_kind) ? filters < 1 : hidden < 1)
            throw std::invalid_argument("config: encoder size must be >= 1");
        if (window < 1) throw std::invalid_argument("config: window must be >= 1");
    }

    std::size_t channels() const { return is_cnn(model_kind) ? filters : 2 * hidden; }
};

inline double hinge_loss(double s_pos, double s_neg, double margin) {
    if (margin <= 0.0) throw std::invalid_argument("hinge_loss: margin must be positive");
    const double v = margin - s_pos + s_neg;
    return v > 0.0 ? v : 0.0;
}

// Learning-rate schedule: lambda_t = lambda / t for epoch t >= 1.
inline double epoch_lr(double initial_lr, std::size_t epoch) {
    if (epoch < 1) throw std::invalid_argument("epoch_lr: epoch must be >= 1");
    return initial_lr / static_cast<double>(epoch);
}

// p <- p - lr * g for every registered parameter with a gradient entry.
inline void sgd_step(const std::vector<ParamView>& params, const Gradients& grads, double lr) {
    if (lr <= 0.0) throw std::invalid_argument("sgd_step: lr must be positive");
    for (const auto& view : params) {
        auto it = grads.find(view.name);
        if (it == grads.end()) continue;
        const Mat& g = it->second;
        if (!view.value->same_shape(g))
            throw std::invalid_argument("sgd_step: gradient shape " + g.shape_str() + " != " +
                                        view.value->shape_str() + " for " + view.name);
        for (std::size_t i = 0; i < g.data.size(); ++i) view.value->data[i] -= lr * g.data[i];
    }
}

// Samples min(n, pool size) negatives without replacement, scores each with
// the current model and returns the highest-scoring one; score ties break
// toward the lower candidate id.
inline const Candidate* sample_hardest_negative(const Model& model,
                                                const std::vector<std::string>& question,
                                                const std::vector<const Candidate*>& negatives,
                                                std::size_t n, Rng& rng,
                                                const std::string& question_id = "") {
    if (negatives.empty())
        throw DataError("no negative candidates for question '" + question_id + "'");
    std::vector<std::size_t> order(negatives.size());
    std::iota(order.begin(), order.end(), 0);
    const std::size_t take = std::min(n, negatives.size());
    // partial Fisher-Yates: the first `take` slots become the sample
    for (std::size_t i = 0; i < take; ++i)
        std::swap(order[i], order[i + rand_index(rng, order.size() - i)]);
    const Candidate* best = nullptr;
    double best_score = 0.0;
    for (std::size_t i = 0; i < take; ++i) {
        const Candidate* cand = negatives[order[i]];
        const double s = score_pair(model, question, cand->tokens).score;
        if (!best || s > best_score || (s == best_score && cand->id < best->id)) {
            best = cand;
            best_score = s;
        }
    }
    return best;
}

struct EpochStats {
    std::size_t epoch = 0;
    double mean_loss = 0.0;
    double learning_rate = 0.0;
};

// After-epoch hook (metrics, logging, snapshots). Must not touch the
// training RNG or parameters, or determinism and resume equivalence break.
using EpochCallback = std::function<void(const EpochStats&, const Model&)>;

struct TrainState {
    TrainingConfig config;
    Model model;
    Rng rng;
    std::size_t epochs_done = 0;
    std::vector<EpochStats> history;
};

inline void validate_training_data(const std::vector<QAExample>& data) {
    if (data.empty()) throw DataError("training data is empty");
    for (const auto& ex : data) {
        if (!ex.has_positive())
            throw DataError("question '" + ex.question_id + "' has no positive candidate");
        bool has_negative = false;
        for (const auto& c : ex.candidates) has_negative |= c.label == 0;
        if (!has_negative)
            throw DataError("question '" + ex.question_id + "' has no negative candidate");
    }
}

inline TrainState init_training(const TrainingConfig& config, EmbeddingTable embeddings) {
    config.validate();
    if (embeddings.dim != config.dim)
        throw DataError("embedding dim " + std::to_string(embeddings.dim) +
                        " does not match configured dim " + std::to_string(config.dim));
    TrainState state;
    state.config = config;
    state.rng = Rng(config.seed);
    embeddings.trainable = config.embeddings_trainable;
    state.model = init_model(config.model_kind, std::move(embeddings), config.filters,
                             config.hidden, config.window, state.rng);
    return state;
}

// Runs epochs epochs_done+1 .. target_epochs in place.
inline void run_epochs(TrainState& state, const std::vector<QAExample>& data,
                       std::size_t target_epochs, const EpochCallback& after_epoch = {}) {
    validate_training_data(data);
    const TrainingConfig& cfg = state.config;
    std::vector<ParamView> params = state.model.params();

    for (std::size_t epoch = state.epochs_done + 1; epoch <= target_epochs; ++epoch) {
        const double lr = epoch_lr(cfg.initial_lr, epoch);
        std::vector<std::size_t> order(data.size());
        std::iota(order.begin(), order.end(), 0);
        std::shuffle(order.begin(), order.end(), state.rng);

        double loss_sum = 0.0;
        for (std::size_t start = 0; start < order.size(); start += cfg.minibatch_size) {
            const std::size_t batch = std::min(cfg.minibatch_size, order.size() - start);
            const double scale = 1.0 / static_cast<double>(batch);
            Gradients grads;
            for (std::size_t b = 0; b < batch; ++b) {
                const QAExample& ex = data[order[start + b]];
                std::vector<const Candidate*> positives, negatives;
                for (const auto& c : ex.candidates)
                    (c.label == 1 ? positives : negatives).push_back(&c);
                const Candidate* pos = positives[rand_index(state.rng, positives.size())];
                const Candidate* neg =
                    sample_hardest_negative(state.model, ex.question, negatives,
                                            cfg.neg_sample_count, state.rng, ex.question_id);
                PairCache fwd_pos = forward_pair(state.model, ex.question, pos->tokens);
                PairCache fwd_neg = forward_pair(state.model, ex.question, neg->tokens);
                const double loss = hinge_loss(fwd_pos.score, fwd_neg.score, cfg.margin);
                loss_sum += loss;
                if (loss > 0.0) {
                    backward_pair(state.model, fwd_pos, -scale, grads);
                    backward_pair(state.model, fwd_neg, scale, grads);
                }
            }
            if (!grads.empty()) sgd_step(params, grads, lr);
        }

        EpochStats stats{epoch, loss_sum / static_cast<double>(data.size()), lr};
        state.history.push_back(stats);
        state.epochs_done = epoch;
        if (after_epoch) after_epoch(stats, state.model);
    }
}

}  // namespace apnet
