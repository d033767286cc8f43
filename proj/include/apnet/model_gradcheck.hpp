#pragma once

// Full-model gradient verification at toy dimensions: a hinge objective over
// one (q, a+, a-) triple, analytic gradients from the backward pass, checked
// coordinate by coordinate against central finite differences. The margin is
// set above 2 so the hinge stays active for any score pair (scores live in
// [-1, 1]) and the objective is smooth at the evaluation point.

#include <cstdint>
#include <string>
#include <vector>

#include "apnet/grad_check.hpp"
#include "apnet/model.hpp"
#include "apnet/train.hpp"

namespace apnet {

struct ToyGradCheckSetup {
    std::size_t dim = 4;       // word embedding size
    std::size_t q_len = 5;     // question tokens
    std::size_t a_len = 7;     // answer tokens
    std::size_t filters = 6;   // cnn channels
    std::size_t window = 3;
    std::size_t hidden = 3;    // bilstm hidden size (channels 2H)
    double margin = 2.5;
    bool train_embeddings = true;
};

inline GradCheckReport model_grad_check(ModelKind kind, std::uint64_t seed, double step = 1e-5,
                                        const ToyGradCheckSetup& setup = {}) {
    // small vocabulary; question and answers overlap so embedding gradients
    // accumulate across sequences
    std::vector<std::string> vocab_stream;
    for (int i = 0; i < 12; ++i) vocab_stream.push_back("tok" + std::to_string(i));
    EmbeddingTable emb = build_vocab(vocab_stream, nullptr, setup.dim, seed);
    emb.trainable = setup.train_embeddings;

    Rng rng(seed + 1);
    Model model = init_model(kind, std::move(emb), setup.filters, setup.hidden, setup.window, rng);

    auto tokens_at = [&](std::size_t count, std::size_t stride, std::size_t phase) {
        std::vector<std::string> out;
        for (std::size_t t = 0; t < count; ++t)
            out.push_back(vocab_stream[(phase + t * stride) % vocab_stream.size()]);
        return out;
    };
    const std::vector<std::string> q = tokens_at(setup.q_len, 1, 0);
    const std::vector<std::string> a_pos = tokens_at(setup.a_len, 2, 3);
    const std::vector<std::string> a_neg = tokens_at(setup.a_len, 3, 1);

    const auto loss_fn = [&]() {
        const double s_pos = score_pair(model, q, a_pos).score;
        const double s_neg = score_pair(model, q, a_neg).score;
        return hinge_loss(s_pos, s_neg, setup.margin);
    };

    Gradients analytic;
    {
        PairCache pos = forward_pair(model, q, a_pos);
        PairCache neg = forward_pair(model, q, a_neg);
        // active hinge: dL/ds_pos = -1, dL/ds_neg = +1
        backward_pair(model, pos, -1.0, analytic);
        backward_pair(model, neg, 1.0, analytic);
    }

    return grad_check(loss_fn, model.params(), analytic, step);
}

}  // namespace apnet
