#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "eevo/math.hpp"
#include "eevo/model.hpp"

namespace test_util {

inline std::vector<float> random_vector(std::mt19937& rng, std::size_t n, float stddev = 1.0f) {
    std::normal_distribution<float> dist(0.0f, stddev);
    std::vector<float> v(n);
    for (float& x : v) {
        x = dist(rng);
    }
    return v;
}

inline eevo::Matrix random_matrix(std::mt19937& rng, std::size_t rows, std::size_t cols,
                                  float stddev = 1.0f) {
    eevo::Matrix m(rows, cols);
    std::normal_distribution<float> dist(0.0f, stddev);
    for (float& x : m.data) {
        x = dist(rng);
    }
    return m;
}

inline std::vector<eevo::TokenId> random_prompt(std::mt19937& rng, std::uint32_t d_vocab,
                                                std::size_t min_len, std::size_t max_len) {
    std::uniform_int_distribution<std::size_t> len_dist(min_len, max_len);
    std::uniform_int_distribution<eevo::TokenId> id_dist(0,
                                                         static_cast<eevo::TokenId>(d_vocab - 1));
    std::vector<eevo::TokenId> prompt(len_dist(rng));
    for (auto& t : prompt) {
        t = id_dist(rng);
    }
    return prompt;
}

inline eevo::ModelConfig tiny_config(std::uint32_t layers = 4, std::uint32_t d_model = 16,
                                     std::uint32_t d_vocab = 16) {
    eevo::ModelConfig c;
    c.layers = layers;
    c.d_model = d_model;
    c.d_vocab = d_vocab;
    c.n_heads = 4;
    c.d_ff = 2 * d_model;
    c.max_seq = 64;
    return c;
}

// |a-b| <= tol * max(1, |a|, |b|): relative in the large, absolute near zero.
inline bool close(double a, double b, double tol) {
    return std::abs(a - b) <= tol * std::max({1.0, std::abs(a), std::abs(b)});
}

}  // namespace test_util
