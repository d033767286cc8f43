#pragma once

// Small synthetic answer-selection corpus used by the training tests and the
// acceptance suite.  Twenty questions, ten candidates each.  The positive
// candidate repeats two of the question's three content tokens; the nine
// negatives are the positives of other questions and share no content token
// with the question.  A model that learns to align matching tokens can rank
// every pool perfectly, which makes the corpus a good end-to-end probe.

#include <cstdio>
#include <string>
#include <vector>

#include "apnet/dataset.hpp"

namespace apnet_test {

inline std::string toy_content_token(std::size_t question, std::size_t slot) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "t%02zux%zu", question, slot);
    return buf;
}

inline std::vector<std::string> toy_positive_tokens(std::size_t question) {
    std::vector<std::string> tokens = {"it", "is", toy_content_token(question, 0),
                                       toy_content_token(question, 1), "indeed"};
    for (std::size_t extra = 0; extra < question % 3; ++extra)
        tokens.push_back("indeed");  // vary answer lengths across questions
    return tokens;
}

inline std::vector<apnet::QAExample> make_toy_corpus() {
    constexpr std::size_t kQuestions = 20;
    constexpr std::size_t kPoolSize = 10;
    std::vector<apnet::QAExample> corpus;
    corpus.reserve(kQuestions);
    for (std::size_t q = 0; q < kQuestions; ++q) {
        apnet::QAExample example;
        char qid[16];
        std::snprintf(qid, sizeof qid, "q%02zu", q);
        example.question_id = qid;
        example.question = {"what", "about", toy_content_token(q, 0),
                            toy_content_token(q, 1), toy_content_token(q, 2)};
        const std::size_t positive_slot = (q * 3) % kPoolSize;
        for (std::size_t slot = 0; slot < kPoolSize; ++slot) {
            apnet::Candidate cand;
            char cid[16];
            std::snprintf(cid, sizeof cid, "c%zu", slot);
            cand.id = cid;
            if (slot == positive_slot) {
                cand.label = 1;
                cand.tokens = toy_positive_tokens(q);
            } else {
                cand.label = 0;
                const std::size_t offset = slot < positive_slot ? slot + 1 : slot;
                cand.tokens = toy_positive_tokens((q + offset) % kQuestions);
            }
            example.candidates.push_back(std::move(cand));
        }
        corpus.push_back(std::move(example));
    }
    return corpus;
}

// Fixture for the end-to-end learnability check.  Differs from the corpus
// above in two ways that matter for optimization at the stock learning rate:
// candidates within a pool share no tokens at all (each answer carries its own
// filler token, so candidate encodings decorrelate and cosine gaps can open),
// and there are 60 questions, giving three minibatch updates per epoch at the
// default minibatch size of 20.
inline std::vector<std::string> learnable_positive_tokens(std::size_t question) {
    char filler[16];
    std::snprintf(filler, sizeof filler, "u%02zu", question);
    std::vector<std::string> tokens = {filler, toy_content_token(question, 0),
                                       toy_content_token(question, 1)};
    for (std::size_t extra = 0; extra < question % 3; ++extra) tokens.push_back(filler);
    return tokens;
}

inline std::vector<apnet::QAExample> make_learnable_corpus() {
    constexpr std::size_t kQuestions = 60;
    constexpr std::size_t kPoolSize = 6;
    std::vector<apnet::QAExample> corpus;
    corpus.reserve(kQuestions);
    for (std::size_t q = 0; q < kQuestions; ++q) {
        apnet::QAExample example;
        char qid[16];
        std::snprintf(qid, sizeof qid, "q%02zu", q);
        example.question_id = qid;
        example.question = {toy_content_token(q, 0), toy_content_token(q, 1),
                            toy_content_token(q, 2)};
        const std::size_t positive_slot = (q * 3) % kPoolSize;
        for (std::size_t slot = 0; slot < kPoolSize; ++slot) {
            apnet::Candidate cand;
            char cid[16];
            std::snprintf(cid, sizeof cid, "c%zu", slot);
            cand.id = cid;
            if (slot == positive_slot) {
                cand.label = 1;
                cand.tokens = learnable_positive_tokens(q);
            } else {
                cand.label = 0;
                const std::size_t offset = slot < positive_slot ? slot + 1 : slot;
                cand.tokens = learnable_positive_tokens((q + offset) % kQuestions);
            }
            example.candidates.push_back(std::move(cand));
        }
        corpus.push_back(std::move(example));
    }
    return corpus;
}

// Synthetic stand-in for pretrained word vectors, covering every token of the
// given corpus.  Entries are uniform in [-1, 1]: roughly the scale of real
// word2vec vectors, and much larger than the [-0.1, 0.1] fallback used for
// unknown tokens.  The model is trained with embeddings frozen, so this scale
// decides the signal size flowing through the encoder; at the fallback scale
// the encoder bias gradient from the first large-learning-rate step swamps
// the data term and training stalls.
inline apnet::EmbeddingTable make_learnable_embeddings(const std::vector<apnet::QAExample>& data,
                                                       std::size_t dim) {
    apnet::Vocabulary vocab = apnet::Vocabulary::with_oov();
    for (const auto& tok : apnet::corpus_tokens(data)) vocab.add(tok);
    apnet::EmbeddingTable table;
    table.dim = dim;
    table.w0 = apnet::Mat(dim, vocab.size());
    apnet::Rng rng(99);
    for (std::size_t j = 0; j < vocab.size(); ++j)
        for (std::size_t i = 0; i < dim; ++i) table.w0(i, j) = apnet::rand_uniform(rng, -1.0, 1.0);
    table.vocab = std::move(vocab);
    return table;
}

}  // namespace apnet_test
