#include "eevo/math.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "eevo/errors.hpp"

namespace eevo {

float dot(std::span<const float> a, std::span<const float> b) {
    if (a.size() != b.size()) {
        throw InvalidInput("dot: length mismatch");
    }
    float acc = 0.0f;
    for (std::size_t i = 0; i < a.size(); ++i) {
        acc += a[i] * b[i];
    }
    return acc;
}

std::vector<float> matvec(const Matrix& w, std::span<const float> h) {
    if (h.size() != w.cols) {
        throw InvalidInput("matvec: vector length does not match matrix cols");
    }
    std::vector<float> out(w.rows);
    for (std::size_t i = 0; i < w.rows; ++i) {
        out[i] = dot(w.row_span(i), h);
    }
    return out;
}

std::vector<float> softmax(std::span<const float> logits) {
    if (logits.empty()) {
        throw InvalidInput("softmax: empty input");
    }
    float max_val = logits[0];
    for (float v : logits) {
        max_val = std::max(max_val, v);
    }
    std::vector<float> out(logits.size());
    float sum = 0.0f;
    for (std::size_t i = 0; i < logits.size(); ++i) {
        out[i] = std::exp(logits[i] - max_val);
        sum += out[i];
    }
    const float inv = 1.0f / sum;
    for (float& v : out) {
        v *= inv;
    }
    return out;
}

std::vector<std::size_t> top_k(std::span<const float> values, std::size_t k) {
    if (k == 0 || k > values.size()) {
        throw InvalidInput("top_k: k out of range");
    }
    std::vector<std::size_t> idx(values.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    const auto by_value_desc = [&](std::size_t a, std::size_t b) {
        if (values[a] != values[b]) return values[a] > values[b];
        return a < b;
    };
    std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(k), idx.end(),
                      by_value_desc);
    idx.resize(k);
    return idx;
}

std::size_t argmax(std::span<const float> values) {
    if (values.empty()) {
        throw InvalidInput("argmax: empty input");
    }
    std::size_t best = 0;
    for (std::size_t i = 1; i < values.size(); ++i) {
        if (values[i] > values[best]) best = i;
    }
    return best;
}

std::vector<float> layer_norm(std::span<const float> h, std::span<const float> gain) {
    if (h.empty()) {
        throw InvalidInput("layer_norm: empty input");
    }
    if (h.size() != gain.size()) {
        throw InvalidInput("layer_norm: gain length mismatch");
    }
    const float n = static_cast<float>(h.size());
    float mean = 0.0f;
    for (float v : h) {
        mean += v;
    }
    mean /= n;
    float var = 0.0f;
    for (float v : h) {
        const float d = v - mean;
        var += d * d;
    }
    var /= n;
    const float inv_std = 1.0f / std::sqrt(var + kLayerNormEps);
    std::vector<float> out(h.size());
    for (std::size_t i = 0; i < h.size(); ++i) {
        out[i] = (h[i] - mean) * inv_std * gain[i];
    }
    return out;
}

std::vector<float> gelu(std::span<const float> h) {
    constexpr float c = 0.7978845608028654f;  // sqrt(2/pi)
    std::vector<float> out(h.size());
    for (std::size_t i = 0; i < h.size(); ++i) {
        const float x = h[i];
        out[i] = 0.5f * x * (1.0f + std::tanh(c * (x + 0.044715f * x * x * x)));
    }
    return out;
}

}  // namespace eevo
