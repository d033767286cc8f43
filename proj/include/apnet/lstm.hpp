#pragma once

// LSTM cell and bidirectional wrapper. Per step, with x_t the current input
// column and h/C the recurrent state:
//
//   i_t = sigmoid(Wi x_t + Ui h_{t-1} + bi)         input gate
//   f_t = sigmoid(Wf x_t + Uf h_{t-1} + bf)         forget gate
//   o_t = sigmoid(Wo x_t + Uo h_{t-1} + bo)         output gate
//   m_t = tanh   (Wm x_t + Um h_{t-1} + bm)         candidate cell
//   C_t = i_t * m_t + f_t * C_{t-1}
//   h_t = o_t * tanh(C_t)
//
// The bidirectional encoder runs one cell left-to-right and an independent
// cell right-to-left from zero initial state and stacks the two hidden
// vectors per position (forward half on top), so the channel count is 2H.
// Question and answer are encoded with the same parameter set.

#include <array>
#include <string>

#include "apnet/conv.hpp"  // init_uniform
#include "apnet/mat.hpp"
#include "apnet/params.hpp"

namespace apnet {

struct LstmGate {
    Mat w;  // H x d
    Mat u;  // H x H
    Mat b;  // H x 1
};

struct LstmDirParams {
    LstmGate in, forget, out, cand;
};

struct BiLstmParams {
    std::size_t hidden = 0;
    LstmDirParams fwd, bwd;

    std::vector<ParamView> views() {
        std::vector<ParamView> v;
        auto add_dir = [&v](const std::string& prefix, LstmDirParams& d) {
            const std::array<std::pair<const char*, LstmGate*>, 4> gates = {
                std::pair{"i", &d.in}, std::pair{"f", &d.forget}, std::pair{"o", &d.out},
                std::pair{"m", &d.cand}};
            for (auto [g, gate] : gates) {
                v.push_back({prefix + ".w" + g, &gate->w});
                v.push_back({prefix + ".u" + g, &gate->u});
                v.push_back({prefix + ".b" + g, &gate->b});
            }
        };
        add_dir("lstm.fwd", fwd);
        add_dir("lstm.bwd", bwd);
        return v;
    }
};

inline LstmDirParams init_lstm_dir(std::size_t hidden, std::size_t dim, Rng& rng) {
    auto make_gate = [&](double bias) {
        LstmGate g;
        g.w = init_uniform(hidden, dim, rng);
        g.u = init_uniform(hidden, hidden, rng);
        g.b = Mat(hidden, 1);
        for (double& x : g.b.data) x = bias;
        return g;
    };
    LstmDirParams p;
    p.in = make_gate(0.0);
    p.forget = make_gate(1.0);  // standard stabilizer
    p.out = make_gate(0.0);
    p.cand = make_gate(0.0);
    return p;
}

inline BiLstmParams init_bilstm(std::size_t hidden, std::size_t dim, Rng& rng) {
    BiLstmParams p;
    p.hidden = hidden;
    p.fwd = init_lstm_dir(hidden, dim, rng);
    p.bwd = init_lstm_dir(hidden, dim, rng);
    return p;
}

struct LstmStepResult {
    Vec h, c;           // outputs
    Vec i, f, o, m;     // gate activations, kept for backward
};

inline LstmStepResult lstm_step(const Vec& x, const Vec& h_prev, const Vec& c_prev,
                                const LstmDirParams& p) {
    const std::size_t h_size = p.in.b.rows;
    auto gate = [&](const LstmGate& g, bool is_tanh) {
        Vec a = matvec(g.w, x);
        const Vec rec = matvec(g.u, h_prev);
        for (std::size_t j = 0; j < h_size; ++j) {
            a[j] += rec[j] + g.b(j, 0);
            a[j] = is_tanh ? std::tanh(a[j]) : sigmoid(a[j]);
        }
        return a;
    };
    LstmStepResult r;
    r.i = gate(p.in, false);
    r.f = gate(p.forget, false);
    r.o = gate(p.out, false);
    r.m = gate(p.cand, true);
    r.c.resize(h_size);
    r.h.resize(h_size);
    for (std::size_t j = 0; j < h_size; ++j) {
        r.c[j] = r.i[j] * r.m[j] + r.f[j] * c_prev[j];
        r.h[j] = r.o[j] * std::tanh(r.c[j]);
    }
    return r;
}

// Per-direction unroll cache; column t holds the step-t vectors in the
// direction's own processing order.
struct LstmTrace {
    Mat h, c, i, f, o, m;  // H x T each
};

namespace detail {

inline LstmTrace run_direction(const Mat& emb, const LstmDirParams& p, bool reversed) {
    const std::size_t h_size = p.in.b.rows;
    const std::size_t t_len = emb.cols;
    LstmTrace tr{Mat(h_size, t_len), Mat(h_size, t_len), Mat(h_size, t_len),
                 Mat(h_size, t_len), Mat(h_size, t_len), Mat(h_size, t_len)};
    Vec h(h_size, 0.0), c(h_size, 0.0);
    for (std::size_t step = 0; step < t_len; ++step) {
        const std::size_t pos = reversed ? t_len - 1 - step : step;
        const LstmStepResult r = lstm_step(emb.col(pos), h, c, p);
        tr.h.set_col(step, r.h);
        tr.c.set_col(step, r.c);
        tr.i.set_col(step, r.i);
        tr.f.set_col(step, r.f);
        tr.o.set_col(step, r.o);
        tr.m.set_col(step, r.m);
        h = r.h;
        c = r.c;
    }
    return tr;
}

// Backprop through one unrolled direction. d_h_ext holds the loss gradient
// w.r.t. this direction's hidden vector per processing step; emits parameter
// gradients under `prefix` and scatter-adds input gradients into d_emb.
inline void direction_backward(const Mat& emb, const LstmDirParams& p, const LstmTrace& tr,
                               const Mat& d_h_ext, bool reversed, const std::string& prefix,
                               Gradients& grads, Mat& d_emb) {
    const std::size_t h_size = p.in.b.rows;
    const std::size_t t_len = emb.cols;
    auto grad_gate = [&](const char* g) {
        return std::array<Mat*, 3>{
            &grads.try_emplace(prefix + ".w" + g, Mat(h_size, emb.rows)).first->second,
            &grads.try_emplace(prefix + ".u" + g, Mat(h_size, h_size)).first->second,
            &grads.try_emplace(prefix + ".b" + g, Mat(h_size, 1)).first->second};
    };
    auto gi = grad_gate("i"), gf = grad_gate("f"), go = grad_gate("o"), gm = grad_gate("m");

    Vec dh_next(h_size, 0.0), dc_next(h_size, 0.0);
    for (std::size_t step = t_len; step-- > 0;) {
        const std::size_t pos = reversed ? t_len - 1 - step : step;
        Vec dh(h_size), dc(h_size);
        Vec da_i(h_size), da_f(h_size), da_o(h_size), da_m(h_size);
        const bool has_prev = step > 0;
        for (std::size_t j = 0; j < h_size; ++j) {
            dh[j] = d_h_ext(j, step) + dh_next[j];
            const double tc = std::tanh(tr.c(j, step));
            const double o = tr.o(j, step);
            dc[j] = dc_next[j] + dh[j] * o * (1.0 - tc * tc);
            const double i = tr.i(j, step);
            const double f = tr.f(j, step);
            const double m = tr.m(j, step);
            const double c_prev = has_prev ? tr.c(j, step - 1) : 0.0;
            da_o[j] = dh[j] * tc * o * (1.0 - o);
            da_i[j] = dc[j] * m * i * (1.0 - i);
            da_f[j] = dc[j] * c_prev * f * (1.0 - f);
            da_m[j] = dc[j] * i * (1.0 - m * m);
            dc_next[j] = dc[j] * f;
        }
        const Vec x = emb.col(pos);
        Vec h_prev(h_size, 0.0);
        if (has_prev) h_prev = tr.h.col(step - 1);
        std::fill(dh_next.begin(), dh_next.end(), 0.0);
        auto apply = [&](const Vec& da, const LstmGate& gate, const std::array<Mat*, 3>& sink) {
            for (std::size_t j = 0; j < h_size; ++j) {
                for (std::size_t kk = 0; kk < emb.rows; ++kk) (*sink[0])(j, kk) += da[j] * x[kk];
                for (std::size_t kk = 0; kk < h_size; ++kk)
                    (*sink[1])(j, kk) += da[j] * h_prev[kk];
                (*sink[2])(j, 0) += da[j];
            }
            for (std::size_t kk = 0; kk < h_size; ++kk) {
                double acc = 0.0;
                for (std::size_t j = 0; j < h_size; ++j) acc += gate.u(j, kk) * da[j];
                dh_next[kk] += acc;
            }
            for (std::size_t kk = 0; kk < emb.rows; ++kk) {
                double acc = 0.0;
                for (std::size_t j = 0; j < h_size; ++j) acc += gate.w(j, kk) * da[j];
                d_emb(kk, pos) += acc;
            }
        };
        apply(da_i, p.in, gi);
        apply(da_f, p.forget, gf);
        apply(da_o, p.out, go);
        apply(da_m, p.cand, gm);
    }
}

}  // namespace detail

struct BiLstmCache {
    LstmTrace fwd, bwd;
};

// d x T embeddings -> 2H x T hidden states, forward direction stacked over
// backward; fills `cache` for the backward pass when given.
inline Mat bilstm_forward(const Mat& emb, const BiLstmParams& p, BiLstmCache* cache = nullptr) {
    const std::size_t h_size = p.hidden;
    const std::size_t t_len = emb.cols;
    LstmTrace f = detail::run_direction(emb, p.fwd, false);
    LstmTrace b = detail::run_direction(emb, p.bwd, true);
    Mat out(2 * h_size, t_len);
    for (std::size_t t = 0; t < t_len; ++t) {
        for (std::size_t j = 0; j < h_size; ++j) {
            out(j, t) = f.h(j, t);
            // backward trace column s corresponds to original position T-1-s
            out(h_size + j, t) = b.h(j, t_len - 1 - t);
        }
    }
    if (cache) {
        cache->fwd = std::move(f);
        cache->bwd = std::move(b);
    }
    return out;
}

inline void bilstm_backward(const Mat& emb, const BiLstmParams& p, const BiLstmCache& cache,
                            const Mat& dy, Gradients& grads, Mat& d_emb) {
    const std::size_t h_size = p.hidden;
    const std::size_t t_len = emb.cols;
    Mat d_fwd(h_size, t_len), d_bwd(h_size, t_len);
    for (std::size_t t = 0; t < t_len; ++t) {
        for (std::size_t j = 0; j < h_size; ++j) {
            d_fwd(j, t) = dy(j, t);
            d_bwd(j, t_len - 1 - t) = dy(h_size + j, t);
        }
    }
    detail::direction_backward(emb, p.fwd, cache.fwd, d_fwd, false, "lstm.fwd", grads, d_emb);
    detail::direction_backward(emb, p.bwd, cache.bwd, d_bwd, true, "lstm.bwd", grads, d_emb);
}

}  // namespace apnet
