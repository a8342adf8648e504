#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace eevo {

// Engine arithmetic is single precision throughout; the test suite checks
// these kernels against double-precision re-evaluations.

inline constexpr float kLayerNormEps = 1e-6f;

// Dense row-major matrix. rows*cols == data.size() always.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<float> data;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0f) {}

    const float* row(std::size_t i) const { return data.data() + i * cols; }
    float* row(std::size_t i) { return data.data() + i * cols; }

    float at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
    float& at(std::size_t r, std::size_t c) { return data[r * cols + c]; }

    std::span<const float> row_span(std::size_t i) const { return {row(i), cols}; }
};

// Strict left-to-right accumulation. matvec and the pruned projection both
// go through this kernel, so a gathered row reproduces the full-projection
// entry bit for bit.
float dot(std::span<const float> a, std::span<const float> b);

// result[i] = <row i of w, h>. Throws InvalidInput on h.size() != w.cols.
std::vector<float> matvec(const Matrix& w, std::span<const float> h);

// Max-subtracted softmax; entries in (0,1], sums to 1 within 1e-6.
// Throws InvalidInput on empty input.
std::vector<float> softmax(std::span<const float> logits);

// Indices of the k largest entries, descending by value, ties broken by
// lower index first. Throws InvalidInput unless 1 <= k <= values.size().
std::vector<std::size_t> top_k(std::span<const float> values, std::size_t k);

// Index of the largest entry, lowest index wins on ties.
std::size_t argmax(std::span<const float> values);

// (h - mean) / sqrt(var + eps) * gain, eps = kLayerNormEps.
std::vector<float> layer_norm(std::span<const float> h, std::span<const float> gain);

// tanh-approximation GELU, applied elementwise.
std::vector<float> gelu(std::span<const float> h);

}  // namespace eevo
