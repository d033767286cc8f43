#pragma once

// Scoring heads over encoded sequences Q (c x M) and A (c x L).
//
// Plain head: r_j = tanh(max over columns of row j), then cosine.
//
// Attentive head: a soft-alignment matrix
//     G = tanh(Q^T U A)            (M x L)
// is reduced by a row-wise max into g_q (length M) and a column-wise max
// into g_a (length L); softmax turns those into attention vectors sigma_q /
// sigma_a, and the representations are the attention-weighted column sums
//     r_q = Q sigma_q,   r_a = A sigma_a
// with no trailing nonlinearity. The weighted sums and softmax denominators
// accumulate in value order, so permuting answer columns permutes sigma_a
// and leaves (r_q, r_a, score) bit-unchanged.

#include <vector>

#include "apnet/error.hpp"
#include "apnet/mat.hpp"
#include "apnet/params.hpp"

namespace apnet {

struct AttentionParams {
    Mat u;  // c x c bilinear form

    std::vector<ParamView> views() { return {{"att.u", &u}}; }
};

struct AttentionTrace {
    Mat g_matrix;  // M x L
    Vec sigma_q;   // length M, sums to 1
    Vec sigma_a;   // length L, sums to 1
};

inline Vec maxpool_tanh(const Mat& m) {
    if (m.empty()) throw std::invalid_argument("maxpool_tanh: empty matrix");
    Vec r = axis_max(m, Axis::rows);
    for (double& x : r) x = std::tanh(x);
    return r;
}

// dM[j, argmax_j] += dr_j * (1 - r_j^2); argmax recomputed with the same
// fold as the forward pass.
inline void maxpool_tanh_backward(const Mat& m, const Vec& r, const Vec& dr, Mat& dm) {
    for (std::size_t j = 0; j < m.rows; ++j)
        dm(j, row_argmax(m, j)) += dr[j] * (1.0 - r[j] * r[j]);
}

inline Mat soft_alignment(const Mat& q, const Mat& a, const AttentionParams& p) {
    if (q.rows != a.rows || p.u.rows != q.rows || p.u.cols != q.rows)
        throw std::invalid_argument("soft_alignment: channel mismatch Q " + q.shape_str() +
                                    ", A " + a.shape_str() + ", U " + p.u.shape_str());
    return map_tanh(matmul(transpose(q), matmul(p.u, a)));
}

struct AttentionCache {
    Mat ua;  // U * A
    Mat g;   // tanh'd alignment
    Vec sigma_q, sigma_a;
};

struct AttentionPoolResult {
    Vec r_q, r_a;
    AttentionTrace trace;
};

inline AttentionPoolResult attention_pool(const Mat& q, const Mat& a, const AttentionParams& p,
                                          AttentionCache* cache = nullptr) {
    if (q.rows != a.rows || p.u.rows != q.rows || p.u.cols != q.rows)
        throw std::invalid_argument("attention_pool: channel mismatch Q " + q.shape_str() +
                                    ", A " + a.shape_str() + ", U " + p.u.shape_str());
    Mat ua = matmul(p.u, a);
    Mat g = map_tanh(matmul(transpose(q), ua));
    const Vec g_q = axis_max(g, Axis::rows);
    const Vec g_a = axis_max(g, Axis::cols);
    AttentionPoolResult res;
    res.trace.sigma_q = softmax_vec(g_q);
    res.trace.sigma_a = softmax_vec(g_a);
    res.r_q = weighted_col_sum(q, res.trace.sigma_q);
    res.r_a = weighted_col_sum(a, res.trace.sigma_a);
    res.trace.g_matrix = g;
    if (cache) {
        cache->g = res.trace.g_matrix;
        cache->ua = std::move(ua);
        cache->sigma_q = res.trace.sigma_q;
        cache->sigma_a = res.trace.sigma_a;
    }
    return res;
}

// Backward through r = M * sigma, the two softmaxes, the max scatter and the
// bilinear alignment. Adds into dq/da and emits dU under "att.u".
inline void attention_pool_backward(const Mat& q, const Mat& a, const AttentionParams& p,
                                    const AttentionCache& cache, const Vec& d_rq,
                                    const Vec& d_ra, Mat& dq, Mat& da, Gradients& grads) {
    const std::size_t m_len = q.cols;
    const std::size_t l_len = a.cols;

    Vec d_sq(m_len, 0.0), d_sa(l_len, 0.0);
    for (std::size_t i = 0; i < q.rows; ++i) {
        for (std::size_t m = 0; m < m_len; ++m) {
            dq(i, m) += d_rq[i] * cache.sigma_q[m];
            d_sq[m] += q(i, m) * d_rq[i];
        }
        for (std::size_t l = 0; l < l_len; ++l) {
            da(i, l) += d_ra[i] * cache.sigma_a[l];
            d_sa[l] += a(i, l) * d_ra[i];
        }
    }

    auto softmax_backward = [](const Vec& s, const Vec& ds) {
        double inner = 0.0;
        for (std::size_t j = 0; j < s.size(); ++j) inner += s[j] * ds[j];
        Vec dg(s.size());
        for (std::size_t j = 0; j < s.size(); ++j) dg[j] = s[j] * (ds[j] - inner);
        return dg;
    };
    const Vec d_gq = softmax_backward(cache.sigma_q, d_sq);
    const Vec d_ga = softmax_backward(cache.sigma_a, d_sa);

    // max-pool scatter, then tanh
    Mat ds(m_len, l_len);
    for (std::size_t j = 0; j < m_len; ++j) ds(j, row_argmax(cache.g, j)) += d_gq[j];
    for (std::size_t j = 0; j < l_len; ++j) ds(col_argmax(cache.g, j), j) += d_ga[j];
    for (std::size_t j = 0; j < m_len; ++j)
        for (std::size_t l = 0; l < l_len; ++l) {
            const double gv = cache.g(j, l);
            ds(j, l) *= 1.0 - gv * gv;
        }

    // S = Q^T (U A):  dQ += (U A) dS^T,  dA += U^T Q dS,  dU += Q dS A^T
    add_inplace(dq, matmul(cache.ua, transpose(ds)));
    add_inplace(da, matmul(transpose(p.u), matmul(q, ds)));
    accumulate(grads, "att.u", matmul(q, matmul(ds, transpose(a))));
}

inline double cosine_score(const Vec& r_q, const Vec& r_a) {
    const double nq = norm(r_q);
    const double na = norm(r_a);
    if (nq == 0.0 || na == 0.0)
        throw ScoringError("cosine_score: zero-norm representation");
    return dot(r_q, r_a) / (nq * na);
}

inline void cosine_backward(const Vec& r_q, const Vec& r_a, double score, double d_score,
                            Vec& d_rq, Vec& d_ra) {
    const double nq = norm(r_q);
    const double na = norm(r_a);
    const double inv = 1.0 / (nq * na);
    d_rq.assign(r_q.size(), 0.0);
    d_ra.assign(r_a.size(), 0.0);
    for (std::size_t i = 0; i < r_q.size(); ++i) {
        d_rq[i] = d_score * (r_a[i] * inv - score * r_q[i] / (nq * nq));
        d_ra[i] = d_score * (r_q[i] * inv - score * r_a[i] / (na * na));
    }
}

}  // namespace apnet
