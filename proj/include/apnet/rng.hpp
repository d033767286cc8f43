#pragma once

// Seeded RNG used everywhere randomness is needed. Distribution objects are
// constructed per call so the engine state alone captures the full stream
// position; checkpoints persist it via the stream round trip below.

#include <random>
#include <sstream>
#include <string>

namespace apnet {

using Rng = std::mt19937_64;

inline double rand_uniform(Rng& rng, double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

// Uniform index in [0, n).
inline std::size_t rand_index(Rng& rng, std::size_t n) {
    return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
}

inline std::string rng_state_string(const Rng& rng) {
    std::ostringstream os;
    os << rng;
    return os.str();
}

inline Rng rng_from_state(const std::string& state) {
    Rng rng;
    std::istringstream is(state);
    is >> rng;
    return rng;
}

}  // namespace apnet
