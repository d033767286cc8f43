#pragma once

// Named parameter registry. Every trainable matrix in a model is exposed as
// a (name, Mat*) view; the optimizer, the gradient checker and the
// checkpoint writer all iterate the same views.

#include <map>
#include <string>
#include <vector>

#include "apnet/mat.hpp"

namespace apnet {

struct ParamView {
    std::string name;
    Mat* value = nullptr;
};

// Gradient accumulator keyed by parameter name. std::map keeps iteration
// order stable (sorted by name).
using Gradients = std::map<std::string, Mat>;

inline void accumulate(Gradients& grads, const std::string& name, const Mat& g) {
    auto it = grads.find(name);
    if (it == grads.end()) {
        grads.emplace(name, g);
    } else {
        add_inplace(it->second, g);
    }
}

inline void accumulate_scaled(Gradients& grads, const std::string& name, const Mat& g,
                              double scale) {
    auto it = grads.find(name);
    if (it == grads.end()) it = grads.emplace(name, Mat(g.rows, g.cols)).first;
    if (!it->second.same_shape(g))
        throw std::invalid_argument("gradient shape mismatch for " + name);
    for (std::size_t i = 0; i < g.data.size(); ++i) it->second.data[i] += scale * g.data[i];
}

}  // namespace apnet
