#pragma once

// The four answer-selection architectures. All share the pipeline
// embed -> encode -> pool -> cosine; they differ in the encoder (windowed
// convolution vs bidirectional LSTM) and the pooling head (plain max+tanh
// vs attentive pooling). One parameter set encodes both question and answer.

#include <optional>
#include <string>
#include <vector>

#include "apnet/conv.hpp"
#include "apnet/embedding.hpp"
#include "apnet/lstm.hpp"
#include "apnet/pooling.hpp"

namespace apnet {

enum class ModelKind { qa_cnn, ap_cnn, qa_bilstm, ap_bilstm };

inline bool is_attentive(ModelKind k) {
    return k == ModelKind::ap_cnn || k == ModelKind::ap_bilstm;
}

inline bool is_cnn(ModelKind k) { return k == ModelKind::qa_cnn || k == ModelKind::ap_cnn; }

inline std::string to_string(ModelKind k) {
    switch (k) {
        case ModelKind::qa_cnn: return "qa-cnn";
        case ModelKind::ap_cnn: return "ap-cnn";
        case ModelKind::qa_bilstm: return "qa-bilstm";
        case ModelKind::ap_bilstm: return "ap-bilstm";
    }
    return "?";
}

inline ModelKind model_kind_from_string(const std::string& s) {
    if (s == "qa-cnn") return ModelKind::qa_cnn;
    if (s == "ap-cnn") return ModelKind::ap_cnn;
    if (s == "qa-bilstm") return ModelKind::qa_bilstm;
    if (s == "ap-bilstm") return ModelKind::ap_bilstm;
    throw DataError("unknown model kind: " + s +
                    " (expected qa-cnn, ap-cnn, qa-bilstm or ap-bilstm)");
}

struct Model {
    ModelKind kind = ModelKind::qa_cnn;
    EmbeddingTable embeddings;
    std::optional<ConvParams> conv;
    std::optional<BiLstmParams> lstm;
    std::optional<AttentionParams> attention;

    std::size_t channels() const { return conv ? conv->filters : 2 * lstm->hidden; }
    std::size_t window() const { return conv ? conv->window : 1; }

    // Trainable parameters; embedding matrix included only when unfrozen.
    std::vector<ParamView> params() {
        std::vector<ParamView> v;
        if (embeddings.trainable) v.push_back({"embed.w0", &embeddings.w0});
        if (conv) {
            auto c = conv->views();
            v.insert(v.end(), c.begin(), c.end());
        }
        if (lstm) {
            auto l = lstm->views();
            v.insert(v.end(), l.begin(), l.end());
        }
        if (attention) {
            auto a = attention->views();
            v.insert(v.end(), a.begin(), a.end());
        }
        return v;
    }

    // Everything persisted in a checkpoint, embeddings always included.
    std::vector<ParamView> all_params() {
        std::vector<ParamView> v{{"embed.w0", &embeddings.w0}};
        if (conv) {
            auto c = conv->views();
            v.insert(v.end(), c.begin(), c.end());
        }
        if (lstm) {
            auto l = lstm->views();
            v.insert(v.end(), l.begin(), l.end());
        }
        if (attention) {
            auto a = attention->views();
            v.insert(v.end(), a.begin(), a.end());
        }
        return v;
    }
};

// Draw order is fixed: encoder parameters first (conv w1, or lstm gates in
// fwd i,f,o,m then bwd i,f,o,m order), then the attention bilinear form.
inline Model init_model(ModelKind kind, EmbeddingTable embeddings, std::size_t filters,
                        std::size_t hidden, std::size_t window, Rng& rng) {
    Model m;
    m.kind = kind;
    m.embeddings = std::move(embeddings);
    if (is_cnn(kind)) {
        if (filters == 0) throw std::invalid_argument("init_model: cnn needs filters >= 1");
        m.conv = init_conv(filters, m.embeddings.dim, window, rng);
    } else {
        if (hidden == 0) throw std::invalid_argument("init_model: bilstm needs hidden >= 1");
        m.lstm = init_bilstm(hidden, m.embeddings.dim, rng);
    }
    if (is_attentive(kind)) {
        AttentionParams att;
        att.u = init_uniform(m.channels(), m.channels(), rng);
        m.attention = att;
    }
    return m;
}

// Forward cache for one (q, a) pair; everything the backward pass needs.
struct PairCache {
    std::vector<std::size_t> q_idx, a_idx;
    Mat q_emb, a_emb;
    Mat zq, za;              // cnn context matrices
    BiLstmCache q_lstm, a_lstm;
    Mat q_enc, a_enc;        // c x M, c x L
    AttentionCache att;
    Vec r_q, r_a;
    double score = 0.0;
    std::optional<AttentionTrace> trace;
};

inline PairCache forward_pair(const Model& model, const std::vector<std::string>& q_tokens,
                              const std::vector<std::string>& a_tokens) {
    if (q_tokens.empty() || a_tokens.empty())
        throw std::invalid_argument("forward_pair: empty token sequence");
    PairCache c;
    c.q_idx = lookup_indices(model.embeddings, q_tokens);
    c.a_idx = lookup_indices(model.embeddings, a_tokens);
    c.q_emb = lookup_sequence(model.embeddings, q_tokens);
    c.a_emb = lookup_sequence(model.embeddings, a_tokens);

    if (model.conv) {
        c.zq = build_context_matrix(c.q_emb, model.conv->window);
        c.za = build_context_matrix(c.a_emb, model.conv->window);
        c.q_enc = conv_forward(c.zq, *model.conv);
        c.a_enc = conv_forward(c.za, *model.conv);
    } else {
        c.q_enc = bilstm_forward(c.q_emb, *model.lstm, &c.q_lstm);
        c.a_enc = bilstm_forward(c.a_emb, *model.lstm, &c.a_lstm);
    }

    if (model.attention) {
        AttentionPoolResult pooled = attention_pool(c.q_enc, c.a_enc, *model.attention, &c.att);
        c.r_q = std::move(pooled.r_q);
        c.r_a = std::move(pooled.r_a);
        c.trace = std::move(pooled.trace);
    } else {
        c.r_q = maxpool_tanh(c.q_enc);
        c.r_a = maxpool_tanh(c.a_enc);
    }
    c.score = cosine_score(c.r_q, c.r_a);
    return c;
}

// Accumulates d(d_score * score)/d(params) into grads. Embedding gradients
// are emitted only when the table is trainable.
inline void backward_pair(const Model& model, const PairCache& c, double d_score,
                          Gradients& grads) {
    Vec d_rq, d_ra;
    cosine_backward(c.r_q, c.r_a, c.score, d_score, d_rq, d_ra);

    Mat d_qenc(c.q_enc.rows, c.q_enc.cols);
    Mat d_aenc(c.a_enc.rows, c.a_enc.cols);
    if (model.attention) {
        attention_pool_backward(c.q_enc, c.a_enc, *model.attention, c.att, d_rq, d_ra, d_qenc,
                                d_aenc, grads);
    } else {
        maxpool_tanh_backward(c.q_enc, c.r_q, d_rq, d_qenc);
        maxpool_tanh_backward(c.a_enc, c.r_a, d_ra, d_aenc);
    }

    Mat d_qemb(c.q_emb.rows, c.q_emb.cols);
    Mat d_aemb(c.a_emb.rows, c.a_emb.cols);
    if (model.conv) {
        const Mat d_zq = conv_backward(c.zq, *model.conv, d_qenc, grads);
        const Mat d_za = conv_backward(c.za, *model.conv, d_aenc, grads);
        context_matrix_backward(d_zq, model.embeddings.dim, model.conv->window, d_qemb);
        context_matrix_backward(d_za, model.embeddings.dim, model.conv->window, d_aemb);
    } else {
        bilstm_backward(c.q_emb, *model.lstm, c.q_lstm, d_qenc, grads, d_qemb);
        bilstm_backward(c.a_emb, *model.lstm, c.a_lstm, d_aenc, grads, d_aemb);
    }

    if (model.embeddings.trainable) {
        Mat& dw0 = grads.try_emplace("embed.w0", Mat(model.embeddings.w0.rows,
                                                     model.embeddings.w0.cols))
                       .first->second;
        for (std::size_t t = 0; t < c.q_idx.size(); ++t)
            for (std::size_t i = 0; i < d_qemb.rows; ++i) dw0(i, c.q_idx[t]) += d_qemb(i, t);
        for (std::size_t t = 0; t < c.a_idx.size(); ++t)
            for (std::size_t i = 0; i < d_aemb.rows; ++i) dw0(i, c.a_idx[t]) += d_aemb(i, t);
    }
}

struct ScoreResult {
    double score = 0.0;
    std::optional<AttentionTrace> trace;
};

inline ScoreResult score_pair(const Model& model, const std::vector<std::string>& q_tokens,
                              const std::vector<std::string>& a_tokens) {
    PairCache c = forward_pair(model, q_tokens, a_tokens);
    return {c.score, std::move(c.trace)};
}

}  // namespace apnet
