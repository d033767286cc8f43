#pragma once

// Dense double-precision matrices plus the small set of primitives the
// ranking models are built from: matrix product, elementwise tanh/sigmoid,
// softmax and per-axis max reductions.
//
// Determinism notes:
//  * matmul accumulates over the inner dimension in ascending index order
//    (i-k-j loops), so repeated runs are bit-identical.
//  * softmax_vec and ordered_sum accumulate addends in value order, so any
//    permutation of the same multiset of inputs produces bit-identical sums.
//    Attentive pooling relies on this to stay bit-stable under column
//    permutations of its inputs.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <stdexcept>
#include <string>
#include <vector>

namespace apnet {

using Vec = std::vector<double>;

// Total order on non-NaN doubles that places -0.0 before +0.0.
inline bool value_order_less(double a, double b) {
    if (a < b) return true;
    if (b < a) return false;
    return std::signbit(a) && !std::signbit(b);
}

// Sum in value order; permutation-insensitive for a fixed multiset of terms.
inline double ordered_sum(Vec terms) {
    std::sort(terms.begin(), terms.end(), value_order_less);
    double acc = 0.0;
    for (double t : terms) acc += t;
    return acc;
}

struct Mat {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;  // row-major

    Mat() = default;

    Mat(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {
        if (r == 0 || c == 0) throw std::invalid_argument("Mat: dimensions must be positive");
    }

    Mat(std::size_t r, std::size_t c, std::vector<double> d)
        : rows(r), cols(c), data(std::move(d)) {
        if (r == 0 || c == 0) throw std::invalid_argument("Mat: dimensions must be positive");
        if (data.size() != r * c)
            throw std::invalid_argument("Mat: data length " + std::to_string(data.size()) +
                                        " != " + std::to_string(r) + "x" + std::to_string(c));
    }

    Mat(std::initializer_list<std::initializer_list<double>> init) {
        rows = init.size();
        if (rows == 0) throw std::invalid_argument("Mat: empty initializer");
        cols = init.begin()->size();
        data.reserve(rows * cols);
        for (const auto& row : init) {
            if (row.size() != cols) throw std::invalid_argument("Mat: ragged initializer");
            data.insert(data.end(), row.begin(), row.end());
        }
    }

    double& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }

    bool empty() const { return data.empty(); }

    std::string shape_str() const {
        return std::to_string(rows) + "x" + std::to_string(cols);
    }

    Vec col(std::size_t j) const {
        Vec out(rows);
        for (std::size_t i = 0; i < rows; ++i) out[i] = (*this)(i, j);
        return out;
    }

    void set_col(std::size_t j, const Vec& v) {
        for (std::size_t i = 0; i < rows; ++i) (*this)(i, j) = v[i];
    }

    bool same_shape(const Mat& o) const { return rows == o.rows && cols == o.cols; }
};

inline Mat matmul(const Mat& a, const Mat& b) {
    if (a.cols != b.rows)
        throw std::invalid_argument("matmul: shape mismatch " + a.shape_str() + " * " +
                                    b.shape_str());
    Mat out(a.rows, b.cols);
    for (std::size_t i = 0; i < a.rows; ++i) {
        const double* arow = a.data.data() + i * a.cols;
        double* orow = out.data.data() + i * out.cols;
        for (std::size_t k = 0; k < a.cols; ++k) {
            const double aik = arow[k];
            const double* brow = b.data.data() + k * b.cols;
            for (std::size_t j = 0; j < b.cols; ++j) orow[j] += aik * brow[j];
        }
    }
    return out;
}

inline Mat transpose(const Mat& a) {
    Mat out(a.cols, a.rows);
    for (std::size_t i = 0; i < a.rows; ++i)
        for (std::size_t j = 0; j < a.cols; ++j) out(j, i) = a(i, j);
    return out;
}

inline Vec matvec(const Mat& a, const Vec& v) {
    if (a.cols != v.size())
        throw std::invalid_argument("matvec: shape mismatch " + a.shape_str() + " * " +
                                    std::to_string(v.size()));
    Vec out(a.rows, 0.0);
    for (std::size_t i = 0; i < a.rows; ++i) {
        double acc = 0.0;
        for (std::size_t k = 0; k < a.cols; ++k) acc += a(i, k) * v[k];
        out[i] = acc;
    }
    return out;
}

inline Mat map_tanh(const Mat& a) {
    Mat out = a;
    for (double& x : out.data) x = std::tanh(x);
    return out;
}

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

inline Mat map_sigmoid(const Mat& a) {
    Mat out = a;
    for (double& x : out.data) x = sigmoid(x);
    return out;
}

// Softmax with max subtraction; the denominator is accumulated in value
// order, see header comment.
inline Vec softmax_vec(const Vec& g) {
    if (g.empty()) throw std::invalid_argument("softmax_vec: empty input");
    double mx = g[0];
    for (double x : g)
        if (value_order_less(mx, x)) mx = x;
    Vec exps(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) exps[i] = std::exp(g[i] - mx);
    const double denom = ordered_sum(exps);
    Vec out(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) out[i] = exps[i] / denom;
    return out;
}

enum class Axis { rows, cols };

// Per-row maxima (axis=rows, length a.rows) or per-column maxima
// (axis=cols, length a.cols).
inline Vec axis_max(const Mat& a, Axis axis) {
    if (a.empty()) throw std::invalid_argument("axis_max: empty matrix");
    if (axis == Axis::rows) {
        Vec out(a.rows);
        for (std::size_t i = 0; i < a.rows; ++i) {
            double mx = a(i, 0);
            for (std::size_t j = 1; j < a.cols; ++j)
                if (value_order_less(mx, a(i, j))) mx = a(i, j);
            out[i] = mx;
        }
        return out;
    }
    Vec out(a.cols);
    for (std::size_t j = 0; j < a.cols; ++j) {
        double mx = a(0, j);
        for (std::size_t i = 1; i < a.rows; ++i)
            if (value_order_less(mx, a(i, j))) mx = a(i, j);
        out[j] = mx;
    }
    return out;
}

// Index of the maximum entry in row i, matching the axis_max fold so the
// scattered backward hits a position holding the forward maximum.
inline std::size_t row_argmax(const Mat& a, std::size_t i) {
    std::size_t arg = 0;
    for (std::size_t j = 1; j < a.cols; ++j)
        if (value_order_less(a(i, arg), a(i, j))) arg = j;
    return arg;
}

inline std::size_t col_argmax(const Mat& a, std::size_t j) {
    std::size_t arg = 0;
    for (std::size_t i = 1; i < a.rows; ++i)
        if (value_order_less(a(arg, j), a(i, j))) arg = i;
    return arg;
}

inline double dot(const Vec& a, const Vec& b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
    return acc;
}

inline double norm(const Vec& a) { return std::sqrt(dot(a, a)); }

// out[i] = sum_j w[j] * m(i, j), each row accumulated in value order so the
// result is bit-stable under a simultaneous permutation of columns and
// weights.
inline Vec weighted_col_sum(const Mat& m, const Vec& w) {
    if (m.cols != w.size())
        throw std::invalid_argument("weighted_col_sum: " + m.shape_str() + " vs weights " +
                                    std::to_string(w.size()));
    Vec out(m.rows);
    Vec terms(m.cols);
    for (std::size_t i = 0; i < m.rows; ++i) {
        for (std::size_t j = 0; j < m.cols; ++j) terms[j] = w[j] * m(i, j);
        out[i] = ordered_sum(terms);
    }
    return out;
}

inline void add_inplace(Mat& dst, const Mat& src) {
    if (!dst.same_shape(src))
        throw std::invalid_argument("add_inplace: shape mismatch " + dst.shape_str() + " vs " +
                                    src.shape_str());
    for (std::size_t i = 0; i < dst.data.size(); ++i) dst.data[i] += src.data[i];
}

inline bool all_finite(const Mat& a) {
    for (double x : a.data)
        if (!std::isfinite(x)) return false;
    return true;
}

}  // namespace apnet
