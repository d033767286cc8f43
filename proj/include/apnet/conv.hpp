#pragma once

// Window-concatenation convolution over an embedding sequence. Column m of
// the context matrix stacks the k embeddings around position m (zero vectors
// past the sequence boundary); the convolution itself is then a single
// matrix product W1 * Z plus a per-column bias, output length equals input
// length.
//
// Window centering: odd k takes (k-1)/2 neighbors on each side. Even k is
// accepted too and takes k/2 - 1 left neighbors and k/2 right neighbors,
// e.g. k=2 pairs each word with its right neighbor.

#include <string>

#include "apnet/mat.hpp"
#include "apnet/params.hpp"
#include "apnet/rng.hpp"

namespace apnet {

struct ConvParams {
    Mat w1;      // c x d*k
    Mat b1;      // c x 1
    std::size_t window = 1;
    std::size_t filters = 0;

    std::vector<ParamView> views() {
        return {{"conv.w1", &w1}, {"conv.b1", &b1}};
    }
};

// Uniform [-r, r] with r = sqrt(6 / (fan_in + fan_out)), drawn row-major.
inline Mat init_uniform(std::size_t rows, std::size_t cols, Rng& rng) {
    const double r = std::sqrt(6.0 / static_cast<double>(rows + cols));
    Mat out(rows, cols);
    for (double& x : out.data) x = rand_uniform(rng, -r, r);
    return out;
}

inline ConvParams init_conv(std::size_t filters, std::size_t dim, std::size_t window, Rng& rng) {
    if (window < 1) throw std::invalid_argument("init_conv: window must be >= 1");
    ConvParams p;
    p.window = window;
    p.filters = filters;
    p.w1 = init_uniform(filters, dim * window, rng);
    p.b1 = Mat(filters, 1);
    return p;
}

// Number of window positions left of the center word.
inline std::size_t window_left(std::size_t k) { return (k % 2 == 1) ? (k - 1) / 2 : k / 2 - 1; }

// d x T embeddings -> d*k x T stacked context windows.
inline Mat build_context_matrix(const Mat& emb, std::size_t k) {
    if (k < 1) throw std::invalid_argument("build_context_matrix: window must be >= 1");
    const std::size_t d = emb.rows;
    const std::size_t t_len = emb.cols;
    const std::ptrdiff_t left = static_cast<std::ptrdiff_t>(window_left(k));
    Mat z(d * k, t_len);
    for (std::size_t m = 0; m < t_len; ++m) {
        for (std::size_t w = 0; w < k; ++w) {
            const std::ptrdiff_t src =
                static_cast<std::ptrdiff_t>(m) + static_cast<std::ptrdiff_t>(w) - left;
            if (src < 0 || src >= static_cast<std::ptrdiff_t>(t_len)) continue;  // zero pad
            for (std::size_t i = 0; i < d; ++i)
                z(w * d + i, m) = emb(i, static_cast<std::size_t>(src));
        }
    }
    return z;
}

// Adjoint of build_context_matrix: scatter-adds window slices back onto the
// embedding positions they were gathered from.
inline void context_matrix_backward(const Mat& dz, std::size_t d, std::size_t k, Mat& d_emb) {
    const std::size_t t_len = dz.cols;
    const std::ptrdiff_t left = static_cast<std::ptrdiff_t>(window_left(k));
    for (std::size_t m = 0; m < t_len; ++m) {
        for (std::size_t w = 0; w < k; ++w) {
            const std::ptrdiff_t src =
                static_cast<std::ptrdiff_t>(m) + static_cast<std::ptrdiff_t>(w) - left;
            if (src < 0 || src >= static_cast<std::ptrdiff_t>(t_len)) continue;
            for (std::size_t i = 0; i < d; ++i)
                d_emb(i, static_cast<std::size_t>(src)) += dz(w * d + i, m);
        }
    }
}

// Y = W1 * Z + b1 per column.
inline Mat conv_forward(const Mat& z, const ConvParams& p) {
    if (z.rows != p.w1.cols)
        throw std::invalid_argument("conv_forward: context rows " + std::to_string(z.rows) +
                                    " != w1 cols " + std::to_string(p.w1.cols));
    Mat y = matmul(p.w1, z);
    for (std::size_t i = 0; i < y.rows; ++i)
        for (std::size_t j = 0; j < y.cols; ++j) y(i, j) += p.b1(i, 0);
    return y;
}

// Accumulates dW1 = dY Z^T, db1 = row sums of dY, and returns dZ = W1^T dY.
inline Mat conv_backward(const Mat& z, const ConvParams& p, const Mat& dy, Gradients& grads) {
    accumulate(grads, "conv.w1", matmul(dy, transpose(z)));
    Mat db(p.b1.rows, 1);
    for (std::size_t i = 0; i < dy.rows; ++i) {
        double acc = 0.0;
        for (std::size_t j = 0; j < dy.cols; ++j) acc += dy(i, j);
        db(i, 0) = acc;
    }
    accumulate(grads, "conv.b1", db);
    return matmul(transpose(p.w1), dy);
}

}  // namespace apnet
