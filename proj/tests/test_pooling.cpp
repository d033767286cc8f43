#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numeric>

#include "apnet/model.hpp"
#include "apnet/model_gradcheck.hpp"
#include "apnet/pooling.hpp"
#include "support/oracles.hpp"

using namespace apnet;
using apnet_test::bit_equal;
using apnet_test::max_abs_diff;
using apnet_test::rand_mat;
using apnet_test::rand_vec;

TEST_CASE("maxpool_tanh takes row maxima then tanh") {
    const Mat m{{1, 5}, {-2, -3}};
    const Vec r = maxpool_tanh(m);
    REQUIRE(r == Vec{std::tanh(5.0), std::tanh(-2.0)});
}

TEST_CASE("maxpool_tanh of a single column is elementwise tanh") {
    Rng rng(3);
    Mat m = rand_mat(rng, 5, 1, -2.0, 2.0);
    const Vec r = maxpool_tanh(m);
    for (std::size_t i = 0; i < 5; ++i) REQUIRE(r[i] == std::tanh(m(i, 0)));
    for (double v : r) {
        REQUIRE(v > -1.0);
        REQUIRE(v < 1.0);
    }
}

TEST_CASE("maxpool_tanh_backward scatters to the argmax entries only") {
    const Mat m{{1, 5}, {-2, -3}};
    const Vec r = maxpool_tanh(m);
    Mat dm(2, 2);
    maxpool_tanh_backward(m, r, Vec{1.0, 1.0}, dm);
    REQUIRE(dm(0, 0) == 0.0);
    REQUIRE(dm(0, 1) == Catch::Approx(1.0 - r[0] * r[0]));
    REQUIRE(dm(1, 0) == Catch::Approx(1.0 - r[1] * r[1]));
    REQUIRE(dm(1, 1) == 0.0);
}

TEST_CASE("soft_alignment with zero U is the zero matrix") {
    Rng rng(5);
    const Mat q = rand_mat(rng, 3, 4);
    const Mat a = rand_mat(rng, 3, 6);
    AttentionParams p;
    p.u = Mat(3, 3);
    const Mat g = soft_alignment(q, a, p);
    REQUIRE(g.rows == 4);
    REQUIRE(g.cols == 6);
    for (double v : g.data) REQUIRE(v == 0.0);
}

TEST_CASE("soft_alignment with one channel is a tanh outer product") {
    Mat q(1, 3);
    q(0, 0) = 0.5;
    q(0, 1) = -1.0;
    q(0, 2) = 2.0;
    Mat a(1, 2);
    a(0, 0) = 1.5;
    a(0, 1) = -0.25;
    AttentionParams p;
    p.u = Mat(1, 1);
    p.u(0, 0) = 0.8;
    const Mat g = soft_alignment(q, a, p);
    for (std::size_t m = 0; m < 3; ++m)
        for (std::size_t l = 0; l < 2; ++l)
            REQUIRE(g(m, l) == Catch::Approx(std::tanh(q(0, m) * 0.8 * a(0, l))).epsilon(1e-12));
}

TEST_CASE("soft_alignment validates channel agreement") {
    Rng rng(7);
    AttentionParams p;
    p.u = rand_mat(rng, 3, 3);
    REQUIRE_THROWS_AS(soft_alignment(rand_mat(rng, 3, 2), rand_mat(rng, 4, 2), p),
                      std::invalid_argument);
    REQUIRE_THROWS_AS(soft_alignment(rand_mat(rng, 4, 2), rand_mat(rng, 4, 2), p),
                      std::invalid_argument);
}

TEST_CASE("attention with zero U degrades to exact uniform weights and column means") {
    Rng rng(9);
    for (int trial = 0; trial < 10; ++trial) {
        const std::size_t c = 2 + rand_index(rng, 4);
        const std::size_t m_len = 1 + rand_index(rng, 6);
        const std::size_t l_len = 1 + rand_index(rng, 6);
        const Mat q = rand_mat(rng, c, m_len);
        const Mat a = rand_mat(rng, c, l_len);
        AttentionParams p;
        p.u = Mat(c, c);
        const AttentionPoolResult res = attention_pool(q, a, p);

        // exp(0) = 1 exactly, so each weight is exactly 1/M (resp. 1/L)
        for (double w : res.trace.sigma_q) REQUIRE(w == 1.0 / static_cast<double>(m_len));
        for (double w : res.trace.sigma_a) REQUIRE(w == 1.0 / static_cast<double>(l_len));

        // r collapses to plain column means
        for (std::size_t i = 0; i < c; ++i) {
            double mean_q = 0.0, mean_a = 0.0;
            for (std::size_t j = 0; j < m_len; ++j) mean_q += q(i, j);
            for (std::size_t j = 0; j < l_len; ++j) mean_a += a(i, j);
            mean_q /= static_cast<double>(m_len);
            mean_a /= static_cast<double>(l_len);
            REQUIRE(res.r_q[i] == Catch::Approx(mean_q).margin(1e-13));
            REQUIRE(res.r_a[i] == Catch::Approx(mean_a).margin(1e-13));
        }
    }
}

TEST_CASE("attention over single-column inputs returns those columns") {
    Rng rng(11);
    const Mat q = rand_mat(rng, 4, 1);
    const Mat a = rand_mat(rng, 4, 1);
    AttentionParams p;
    p.u = rand_mat(rng, 4, 4);
    const AttentionPoolResult res = attention_pool(q, a, p);
    REQUIRE(res.trace.sigma_q == Vec{1.0});
    REQUIRE(res.trace.sigma_a == Vec{1.0});
    REQUIRE(bit_equal(res.r_q, q.col(0)));
    REQUIRE(bit_equal(res.r_a, a.col(0)));
}

TEST_CASE("attention weights sum to one") {
    Rng rng(13);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t c = 2 + rand_index(rng, 4);
        const Mat q = rand_mat(rng, c, 1 + rand_index(rng, 7));
        const Mat a = rand_mat(rng, c, 1 + rand_index(rng, 7));
        AttentionParams p;
        p.u = rand_mat(rng, c, c);
        const AttentionPoolResult res = attention_pool(q, a, p);
        double sq = 0.0, sa = 0.0;
        for (double w : res.trace.sigma_q) sq += w;
        for (double w : res.trace.sigma_a) sa += w;
        REQUIRE(sq == Catch::Approx(1.0).epsilon(1e-12));
        REQUIRE(sa == Catch::Approx(1.0).epsilon(1e-12));
        REQUIRE(res.trace.g_matrix.rows == q.cols);
        REQUIRE(res.trace.g_matrix.cols == a.cols);
    }
}

TEST_CASE("permuting answer columns permutes sigma_a and leaves outputs bit-identical") {
    Rng rng(17);
    for (int trial = 0; trial < 30; ++trial) {
        const std::size_t c = 2 + rand_index(rng, 4);
        const std::size_t l_len = 2 + rand_index(rng, 8);
        const Mat q = rand_mat(rng, c, 1 + rand_index(rng, 6));
        const Mat a = rand_mat(rng, c, l_len);
        AttentionParams p;
        p.u = rand_mat(rng, c, c);

        const AttentionPoolResult base = attention_pool(q, a, p);
        const double base_score = cosine_score(base.r_q, base.r_a);

        std::vector<std::size_t> perm(l_len);
        std::iota(perm.begin(), perm.end(), 0);
        std::shuffle(perm.begin(), perm.end(), rng);
        Mat ap(c, l_len);
        for (std::size_t j = 0; j < l_len; ++j) ap.set_col(j, a.col(perm[j]));

        const AttentionPoolResult permuted = attention_pool(q, ap, p);
        const double perm_score = cosine_score(permuted.r_q, permuted.r_a);

        REQUIRE(bit_equal(permuted.r_q, base.r_q));
        REQUIRE(bit_equal(permuted.r_a, base.r_a));
        REQUIRE(std::memcmp(&base_score, &perm_score, sizeof(double)) == 0);
        REQUIRE(bit_equal(permuted.trace.sigma_q, base.trace.sigma_q));
        for (std::size_t j = 0; j < l_len; ++j)
            REQUIRE(std::memcmp(&permuted.trace.sigma_a[j], &base.trace.sigma_a[perm[j]],
                                sizeof(double)) == 0);
    }
}

TEST_CASE("r_q stays inside the span of the question columns") {
    Rng rng(19);
    const Mat q = rand_mat(rng, 3, 5);
    const Mat a = rand_mat(rng, 3, 4);
    AttentionParams p;
    p.u = rand_mat(rng, 3, 3);
    const AttentionPoolResult res = attention_pool(q, a, p);
    Vec expect(3, 0.0);
    for (std::size_t j = 0; j < 5; ++j)
        for (std::size_t i = 0; i < 3; ++i) expect[i] += res.trace.sigma_q[j] * q(i, j);
    REQUIRE(max_abs_diff(res.r_q, expect) < 1e-12);
}

TEST_CASE("cosine score identities") {
    const Vec v{1.0, 2.0, -3.0};
    Vec neg = v;
    for (double& x : neg) x = -x;
    REQUIRE(cosine_score(v, v) == Catch::Approx(1.0).epsilon(1e-12));
    REQUIRE(cosine_score(v, neg) == Catch::Approx(-1.0).epsilon(1e-12));
    REQUIRE(cosine_score(Vec{1.0, 0.0}, Vec{0.0, 2.0}) == 0.0);

    Rng rng(23);
    for (int trial = 0; trial < 20; ++trial) {
        const Vec a = rand_vec(rng, 5);
        const Vec b = rand_vec(rng, 5);
        Vec a3 = a;
        for (double& x : a3) x *= 3.0;
        REQUIRE(cosine_score(a3, b) == Catch::Approx(cosine_score(a, b)).margin(1e-12));
        const double s = cosine_score(a, b);
        REQUIRE(s >= -1.0 - 1e-12);
        REQUIRE(s <= 1.0 + 1e-12);
    }
}

TEST_CASE("cosine rejects zero-norm representations") {
    REQUIRE_THROWS_AS(cosine_score(Vec{0.0, 0.0}, Vec{1.0, 2.0}), ScoringError);
    REQUIRE_THROWS_AS(cosine_score(Vec{1.0, 2.0}, Vec{0.0, 0.0}), ScoringError);
}

TEST_CASE("cosine_backward matches finite differences") {
    Rng rng(29);
    Mat rq_m(1, 4), ra_m(1, 4);
    for (std::size_t i = 0; i < 4; ++i) {
        rq_m(0, i) = rand_uniform(rng, -1.0, 1.0);
        ra_m(0, i) = rand_uniform(rng, -1.0, 1.0);
    }
    auto loss_fn = [&] { return cosine_score(rq_m.data, ra_m.data); };
    Gradients analytic;
    {
        Vec d_rq, d_ra;
        cosine_backward(rq_m.data, ra_m.data, loss_fn(), 1.0, d_rq, d_ra);
        analytic.emplace("rq", Mat(1, 4, d_rq));
        analytic.emplace("ra", Mat(1, 4, d_ra));
    }
    std::vector<ParamView> views{{"rq", &rq_m}, {"ra", &ra_m}};
    const auto report = grad_check(loss_fn, views, analytic);
    REQUIRE_FALSE(report.failed);
    REQUIRE(report.max_relative_error <= 1e-6);
}

TEST_CASE("attention backward passes a finite-difference check through the head") {
    // loss = cosine(attention_pool(Q, A, U)) with Q, A, U all free
    Rng rng(31);
    Mat q = rand_mat(rng, 3, 4, -0.8, 0.8);
    Mat a = rand_mat(rng, 3, 5, -0.8, 0.8);
    AttentionParams p;
    p.u = rand_mat(rng, 3, 3, -0.5, 0.5);

    auto loss_fn = [&] {
        const AttentionPoolResult res = attention_pool(q, a, p);
        return cosine_score(res.r_q, res.r_a);
    };

    Gradients analytic;
    {
        AttentionCache cache;
        const AttentionPoolResult res = attention_pool(q, a, p, &cache);
        const double score = cosine_score(res.r_q, res.r_a);
        Vec d_rq, d_ra;
        cosine_backward(res.r_q, res.r_a, score, 1.0, d_rq, d_ra);
        Mat dq(3, 4), da(3, 5);
        attention_pool_backward(q, a, p, cache, d_rq, d_ra, dq, da, analytic);
        analytic.emplace("q", dq);
        analytic.emplace("a", da);
    }

    std::vector<ParamView> views = p.views();
    views.push_back({"q", &q});
    views.push_back({"a", &a});
    const auto report = grad_check(loss_fn, views, analytic);
    REQUIRE_FALSE(report.failed);
    REQUIRE(report.max_relative_error <= 1e-4);
}

TEST_CASE("plain pooling scores a sequence against itself as cosine one") {
    std::vector<std::string> stream;
    for (int i = 0; i < 8; ++i) stream.push_back("w" + std::to_string(i));
    EmbeddingTable emb = build_vocab(stream, nullptr, 6, 77);
    Rng rng(78);
    const std::vector<std::string> tokens{"w0", "w3", "w5", "w1"};
    // identical sequences collapse to identical max-pooled representations
    for (ModelKind kind : {ModelKind::qa_cnn, ModelKind::qa_bilstm}) {
        const Model model = init_model(kind, emb, 5, 3, 3, rng);
        const ScoreResult res = score_pair(model, tokens, tokens);
        REQUIRE(res.score == Catch::Approx(1.0).epsilon(1e-12));
        REQUIRE_FALSE(res.trace.has_value());
    }
    // the attentive heads weight the two sides differently (row vs column
    // maxima of the alignment), so self-similarity is bounded, not exact
    for (ModelKind kind : {ModelKind::ap_cnn, ModelKind::ap_bilstm}) {
        const Model model = init_model(kind, emb, 5, 3, 3, rng);
        const ScoreResult res = score_pair(model, tokens, tokens);
        REQUIRE(res.score <= 1.0 + 1e-12);
        REQUIRE(res.score >= -1.0 - 1e-12);
        REQUIRE(res.trace.has_value());
        REQUIRE(res.trace->sigma_q.size() == tokens.size());
        REQUIRE(res.trace->sigma_a.size() == tokens.size());
    }
}

TEST_CASE("same seed, same model, same scores") {
    std::vector<std::string> stream;
    for (int i = 0; i < 10; ++i) stream.push_back("w" + std::to_string(i));
    const std::vector<std::string> q{"w1", "w2", "w3"};
    const std::vector<std::string> a{"w4", "w5", "w6", "w7"};
    auto fresh_score = [&] {
        EmbeddingTable emb = build_vocab(stream, nullptr, 6, 5);
        Rng rng(6);
        const Model model = init_model(ModelKind::ap_bilstm, std::move(emb), 0, 3, 1, rng);
        return score_pair(model, q, a).score;
    };
    const double s1 = fresh_score();
    const double s2 = fresh_score();
    REQUIRE(std::memcmp(&s1, &s2, sizeof(double)) == 0);
}

TEST_CASE("full-model gradients through the attentive head stay within tolerance") {
    const GradCheckReport report = model_grad_check(ModelKind::ap_cnn, 2024);
    REQUIRE_FALSE(report.failed);
    REQUIRE(report.max_relative_error <= 1e-4);
}
